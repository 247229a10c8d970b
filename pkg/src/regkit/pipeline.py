"""Run a REG system over corpus documents and read/write prediction files."""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Mapping, Sequence

from .corpus import DOC_K, Corpus, CorpusError, Document, EntityMeta, extract_instances
from .pronouns import PronounTable, build_pronoun_table
from .realization import realize
from .rules import SYSTEMS as RULE_SYSTEMS

SYSTEM_NAMES = ("rreg-s", "rreg-l", "ml-s", "ml-l", "external")


@dataclass(frozen=True)
class Prediction:
    doc_id: str
    slot_index: int
    re: tuple[str, ...]
    form: str | None = None
    rationale: str | None = None

    def to_record(self) -> dict:
        rec = {"doc_id": self.doc_id, "slot_index": self.slot_index, "re": list(self.re)}
        if self.form is not None:
            rec["form"] = self.form
        return rec


def pronoun_table_for(corpus: Corpus) -> PronounTable:
    return build_pronoun_table(corpus.split("train"), corpus.registry)


def _rule_document(args) -> list[Prediction]:
    doc, system, table, k = args
    decide = RULE_SYSTEMS[system]
    out = []
    for inst in extract_instances(doc, k):
        d = decide(inst, table)
        out.append(Prediction(doc.doc_id, inst.slot_index, realize(d, inst, table).tokens, d.form, d.rationale))
    return out


def _ml_document(args) -> list[Prediction]:
    from .ml import generate

    doc, model, table, registry, k = args
    insts = extract_instances(doc, k)
    return [
        Prediction(doc.doc_id, i.slot_index, re.tokens, form)
        for i, (form, re) in zip(insts, generate(model, insts, table, registry))
    ]


def _map(fn, items: list, jobs: int) -> Iterator:
    if jobs <= 1 or len(items) < 2:
        return map(fn, items)
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return iter(list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * jobs)))))


def run_system(
    system: str,
    docs: Sequence[Document],
    table: PronounTable,
    model=None,
    registry: Mapping[str, EntityMeta] | None = None,
    k=DOC_K,
    jobs: int = 1,
) -> list[Prediction]:
    """Predictions for every slot of ``docs``, in document then slot order."""
    docs = list(docs)
    # the sentinel does not survive pickling into worker processes
    ks = [d.k if k is DOC_K else k for d in docs]
    if system in RULE_SYSTEMS:
        chunks = _map(_rule_document, [(d, system, table, dk) for d, dk in zip(docs, ks)], jobs)
    elif system in ("ml-s", "ml-l"):
        if model is None:
            raise ValueError(f"{system} needs a trained model")
        expected = "ml-s" if system == "ml-s" else "ml-l"
        if not model.schema.name.startswith(expected):
            raise ValueError(f"model schema {model.schema.name!r} does not fit system {system!r}")
        chunks = _map(_ml_document, [(d, model, table, registry, dk) for d, dk in zip(docs, ks)], jobs)
    else:
        raise ValueError(f"unknown system {system!r}")
    return [p for chunk in chunks for p in chunk]


def write_predictions(preds: Iterable[Prediction], fh: IO[str]) -> None:
    for p in preds:
        fh.write(json.dumps(p.to_record(), ensure_ascii=False) + "\n")


def write_decisions(preds: Iterable[Prediction], fh: IO[str]) -> None:
    for p in preds:
        fh.write(json.dumps({"doc_id": p.doc_id, "slot_index": p.slot_index, "form": p.form,
                             "rationale": p.rationale}) + "\n")


def read_predictions(stream) -> list[Prediction]:
    from .corpus import _lines

    out = []
    seen = set()
    for n, raw in _lines(stream):
        try:
            rec = json.loads(raw)
        except json.JSONDecodeError as e:
            raise CorpusError(f"invalid JSON: {e.msg}", n) from None
        if not isinstance(rec, dict):
            raise CorpusError("record must be an object", n)
        for key, kind in (("doc_id", str), ("slot_index", int), ("re", list)):
            if not isinstance(rec.get(key), kind):
                raise CorpusError(f"expected {kind.__name__}", n, key)
        re_toks = rec["re"]
        if not re_toks or not all(isinstance(t, str) and t for t in re_toks):
            raise CorpusError("re must be a non-empty token list", n, "re")
        key = (rec["doc_id"], rec["slot_index"])
        if key in seen:
            raise CorpusError(f"duplicate prediction for {key}", n)
        seen.add(key)
        out.append(Prediction(rec["doc_id"], rec["slot_index"], tuple(re_toks), rec.get("form")))
    return out


def as_mapping(preds: Iterable[Prediction]) -> dict[tuple[str, int], tuple[tuple[str, ...], str | None]]:
    return {(p.doc_id, p.slot_index): (p.re, p.form) for p in preds}
