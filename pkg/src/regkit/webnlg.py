"""Convert local WebNLG v1.5 XML files into corpus documents.

Each ``<lex>`` with a ``<template>`` and ``<references>`` becomes one
document. Template placeholders (``AGENT-1``, ``PATIENT-2``, ``BRIDGE-1``)
are matched in order to the ``<reference>`` elements sorted by their
``number`` attribute. The entity attribute, with spaces turned into
underscores, is the slot tag; literal values keep their double quotes
(``"Kuttikkattoor"``). Sentences end after a standalone ``.``, ``!`` or
``?`` token of the template.
"""
from __future__ import annotations

import logging
import re
import xml.etree.ElementTree as ET
from pathlib import Path
from typing import Iterable, Iterator

from .corpus import Document, SlotAnnotation

log = logging.getLogger(__name__)

PLACEHOLDER = re.compile(r"^((?:AGENT|PATIENT|BRIDGE)-\d+)(.*)$")
_FULL = re.compile(r"^(?:AGENT|PATIENT|BRIDGE)-\d+$")
TYPE_TO_FORM = {"name": "proper_name", "pronoun": "pronoun", "description": "description", "demonstrative": "description"}
SENTENCE_END = {".", "!", "?"}


def entity_tag(entity: str) -> str:
    return "_".join(entity.split())


def _split_template(template: str) -> list[str]:
    out = []
    for tok in template.split():
        m = PLACEHOLDER.match(tok)
        if m and m.group(2):
            out.extend([m.group(1), m.group(2)])
        else:
            out.append(tok)
    return out


def lex_to_document(lex: ET.Element, doc_id: str, split: str, domain_label: str | None = None) -> Document | None:
    template = lex.findtext("template")
    refs = lex.find("references")
    if template is None or refs is None:
        return None
    references = sorted(refs.findall("reference"), key=lambda r: int(r.get("number", "0")))
    tokens = _split_template(template)
    n_slots = sum(bool(_FULL.match(t)) for t in tokens)
    if n_slots != len(references):
        log.warning("%s: %d placeholders but %d references; skipped", doc_id, n_slots, len(references))
        return None
    sentences: list[tuple[str, ...]] = []
    slots: list[SlotAnnotation] = []
    cur: list[str] = []
    refs_iter = iter(references)
    for tok in tokens:
        if _FULL.match(tok):
            ref = next(refs_iter)
            tag = entity_tag(ref.get("entity", tok))
            gold = tuple((ref.text or tag).split()) or (tag,)
            slots.append(
                SlotAnnotation(len(sentences), len(cur), tag, gold, tag, TYPE_TO_FORM.get(ref.get("type", "")))
            )
            cur.append(tag)
        else:
            cur.append(tok)
        if tok in SENTENCE_END:
            sentences.append(tuple(cur))
            cur = []
    if cur:
        sentences.append(tuple(cur))
    return Document(doc_id, tuple(sentences), tuple(slots), split, domain_label)


def read_webnlg(paths: Iterable[str | Path], split: str, domain_label: str | None = None) -> Iterator[Document]:
    """Yield documents from XML files or directories of them (sorted order)."""
    files: list[Path] = []
    for p in map(Path, paths):
        files.extend(sorted(p.rglob("*.xml")) if p.is_dir() else [p])
    seen: set[str] = set()
    for f in files:
        root = ET.parse(f).getroot()
        for entry in root.iter("entry"):
            eid = entry.get("eid", "")
            category = entry.get("category", "")
            for lex in entry.findall("lex"):
                doc_id = f"{f.stem}/{category}/{eid}/{lex.get('lid', '')}"
                if doc_id in seen:
                    continue
                seen.add(doc_id)
                doc = lex_to_document(lex, doc_id, split, domain_label)
                if doc is not None:
                    yield doc


def category(doc: Document) -> str:
    return doc.doc_id.split("/")[1]


def label_seen_unseen(docs: Iterable[Document], train_categories: set[str]) -> list[Document]:
    """Mark each document seen/unseen by whether its category occurs in training."""
    import dataclasses

    return [dataclasses.replace(d, domain_label="seen" if category(d) in train_categories else "unseen") for d in docs]
