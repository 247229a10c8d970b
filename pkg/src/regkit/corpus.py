"""Delexicalized REG corpora: data model, JSONL persistence, instance extraction.

A document is a list of tokenized sentences in which every referring
expression has been replaced by a single entity-tag token (a *slot*).
Each slot remembers the gold referring expression it replaced.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Mapping, Sequence

SPLITS = ("train", "dev", "test")
FORMS = ("pronoun", "proper_name", "description")
ROLES = ("subject", "object", "other")
CASES = ("nominative", "accusative", "genitive", "reflexive")
GENDERS = ("male", "female", "neuter", "unknown")
PLURALITIES = ("singular", "plural", "unknown")

_WS = re.compile(r"\s")

# short keys used in the registry file
_CASE_KEYS = {"nom": "nominative", "acc": "accusative", "gen": "genitive", "refl": "reflexive"}


class CorpusError(ValueError):
    """Malformed corpus or registry input. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


@dataclass(frozen=True)
class Token:
    surface: str
    is_entity_slot: bool = False


@dataclass(frozen=True)
class SlotAnnotation:
    sent: int
    tok: int
    entity_tag: str
    gold_re_tokens: tuple[str, ...]
    chain_id: str
    gold_form: str | None = None
    grammatical_role: str | None = None
    case: str | None = None

    @property
    def position(self) -> tuple[int, int]:
        return (self.sent, self.tok)


@dataclass(frozen=True)
class Document:
    doc_id: str
    sentences: tuple[tuple[str, ...], ...]
    slots: tuple[SlotAnnotation, ...]
    split: str = "train"
    domain_label: str | None = None
    paragraphs: tuple[int, ...] | None = None
    k: int | None = None

    def tokens(self) -> Iterator[list[Token]]:
        positions = {s.position for s in self.slots}
        for i, sent in enumerate(self.sentences):
            yield [Token(w, (i, j) in positions) for j, w in enumerate(sent)]

    def paragraph_of(self, sent: int) -> int:
        if self.paragraphs is None:
            return 0
        return self.paragraphs[sent]

    def token_offset(self, sent: int, tok: int) -> int:
        """Document-level index of a token."""
        return sum(len(s) for s in self.sentences[:sent]) + tok

    def text(self) -> str:
        return " ".join(" ".join(s) for s in self.sentences)


@dataclass(frozen=True)
class EntityMeta:
    entity_tag: str
    entity_type: str = "unknown"
    gender: str = "unknown"
    plurality: str = "singular"
    pronoun_paradigm: Mapping[str, str] | None = None


class Registry(dict):
    """entity_tag -> EntityMeta, with a default for unknown entities."""

    def meta(self, tag: str) -> EntityMeta:
        found = self.get(tag)
        if found is not None:
            return found
        return EntityMeta(tag)


@dataclass
class Corpus:
    documents: dict[str, list[Document]] = field(default_factory=lambda: {s: [] for s in SPLITS})
    registry: Registry = field(default_factory=Registry)

    def split(self, name: str) -> list[Document]:
        return self.documents.get(name, [])

    def all_documents(self) -> Iterator[Document]:
        for name in SPLITS:
            yield from self.documents.get(name, [])

    def document(self, doc_id: str) -> Document:
        for doc in self.all_documents():
            if doc.doc_id == doc_id:
                return doc
        raise KeyError(doc_id)


@dataclass(frozen=True)
class Instance:
    """One slot together with its context window.

    ``window`` is the (first, last) sentence index covered by the context.
    """

    doc_id: str
    slot_index: int
    entity_tag: str
    pre_context: tuple[str, ...]
    post_context: tuple[str, ...]
    current_sentence_index: int
    token_index: int
    gold_re_tokens: tuple[str, ...]
    gold_form: str | None
    grammatical_role: str | None
    window: tuple[int, int]
    document: Document = field(compare=False, repr=False, hash=False)

    @property
    def slot(self) -> SlotAnnotation:
        return self.document.slots[self.slot_index]

    @property
    def sentence_initial(self) -> bool:
        return self.token_index == 0


# -- parsing ---------------------------------------------------------------


def _require(rec: dict, key: str, kind, line: int, prefix: str = ""):
    if key not in rec:
        raise CorpusError("missing required field", line, prefix + key)
    value = rec[key]
    if not isinstance(value, kind):
        raise CorpusError(f"expected {getattr(kind, '__name__', kind)}", line, prefix + key)
    return value


def _check_token(tok, line: int, where: str) -> str:
    if not isinstance(tok, str) or not tok or _WS.search(tok):
        raise CorpusError(f"invalid token {tok!r}", line, where)
    return tok


def _optional_enum(rec: dict, key: str, allowed: Sequence[str], line: int, prefix: str):
    value = rec.get(key)
    if value is None:
        return None
    if value not in allowed:
        raise CorpusError(f"{value!r} not in {list(allowed)}", line, prefix + key)
    return value


def document_from_record(rec: dict, line: int = 0) -> Document:
    if not isinstance(rec, dict):
        raise CorpusError("record must be a JSON object", line)
    doc_id = _require(rec, "doc_id", str, line)
    split = rec.get("split", "train")
    if split not in SPLITS:
        raise CorpusError(f"{split!r} not in {list(SPLITS)}", line, "split")
    domain = rec.get("domain_label")
    if domain is not None and not isinstance(domain, str):
        raise CorpusError("expected string", line, "domain_label")
    raw_sents = _require(rec, "sentences", list, line)
    sentences = []
    for i, sent in enumerate(raw_sents):
        if not isinstance(sent, list):
            raise CorpusError("sentence must be a token list", line, f"sentences[{i}]")
        sentences.append(tuple(_check_token(t, line, f"sentences[{i}]") for t in sent))

    slots = []
    for n, s in enumerate(_require(rec, "slots", list, line)):
        p = f"slots[{n}]."
        if not isinstance(s, dict):
            raise CorpusError("slot must be an object", line, f"slots[{n}]")
        si = _require(s, "sent", int, line, p)
        ti = _require(s, "tok", int, line, p)
        tag = _check_token(_require(s, "entity_tag", str, line, p), line, p + "entity_tag")
        if not 0 <= si < len(sentences):
            raise CorpusError(f"sentence index {si} out of range", line, p + "sent")
        if not 0 <= ti < len(sentences[si]):
            raise CorpusError(f"token index {ti} out of range", line, p + "tok")
        if sentences[si][ti] != tag:
            raise CorpusError(
                f"token at ({si}, {ti}) is {sentences[si][ti]!r}, expected tag {tag!r}", line, p + "entity_tag"
            )
        gold = _require(s, "gold_re", list, line, p)
        if not gold:
            raise CorpusError("gold_re must be non-empty", line, p + "gold_re")
        gold = tuple(_check_token(t, line, p + "gold_re") for t in gold)
        chain_id = s.get("chain_id", tag)
        if not isinstance(chain_id, str):
            raise CorpusError("expected string", line, p + "chain_id")
        slots.append(
            SlotAnnotation(
                sent=si,
                tok=ti,
                entity_tag=tag,
                gold_re_tokens=gold,
                chain_id=chain_id,
                gold_form=_optional_enum(s, "gold_form", FORMS, line, p),
                grammatical_role=_optional_enum(s, "gram_role", ROLES, line, p),
                case=_optional_enum(s, "case", CASES, line, p),
            )
        )
    positions = [sl.position for sl in slots]
    if positions != sorted(positions) or len(set(positions)) != len(positions):
        raise CorpusError("slots must be in document order without duplicates", line, "slots")
    chain_tags: dict[str, str] = {}
    for sl in slots:
        if chain_tags.setdefault(sl.chain_id, sl.entity_tag) != sl.entity_tag:
            raise CorpusError(f"chain {sl.chain_id!r} mixes entity tags", line, "slots")

    paragraphs = rec.get("paragraphs")
    if paragraphs is not None:
        if (
            not isinstance(paragraphs, list)
            or len(paragraphs) != len(sentences)
            or not all(isinstance(p, int) for p in paragraphs)
            or any(b < a for a, b in zip(paragraphs, paragraphs[1:]))
        ):
            raise CorpusError("one non-decreasing paragraph index per sentence", line, "paragraphs")
        paragraphs = tuple(paragraphs)
    k = rec.get("k")
    if k is not None and (not isinstance(k, int) or k < 0):
        raise CorpusError("k must be a non-negative integer", line, "k")
    return Document(doc_id, tuple(sentences), tuple(slots), split, domain, paragraphs, k)


def document_to_record(doc: Document) -> dict:
    rec: dict = {"doc_id": doc.doc_id, "split": doc.split}
    if doc.domain_label is not None:
        rec["domain_label"] = doc.domain_label
    if doc.k is not None:
        rec["k"] = doc.k
    rec["sentences"] = [list(s) for s in doc.sentences]
    if doc.paragraphs is not None:
        rec["paragraphs"] = list(doc.paragraphs)
    slots = []
    for s in doc.slots:
        out = {
            "sent": s.sent,
            "tok": s.tok,
            "entity_tag": s.entity_tag,
            "gold_re": list(s.gold_re_tokens),
            "chain_id": s.chain_id,
        }
        if s.gold_form is not None:
            out["gold_form"] = s.gold_form
        if s.grammatical_role is not None:
            out["gram_role"] = s.grammatical_role
        if s.case is not None:
            out["case"] = s.case
        slots.append(out)
    rec["slots"] = slots
    return rec


def _lines(stream: IO | bytes | str | Iterable[str]) -> Iterator[tuple[int, str]]:
    if isinstance(stream, bytes):
        stream = stream.decode("utf-8")
    if isinstance(stream, str):
        stream = stream.splitlines()
    for n, raw in enumerate(stream, 1):
        if isinstance(raw, bytes):
            try:
                raw = raw.decode("utf-8")
            except UnicodeDecodeError as e:
                raise CorpusError(f"invalid UTF-8: {e}", n) from None
        if raw.strip():
            yield n, raw


def iter_documents(stream) -> Iterator[Document]:
    seen: set[str] = set()
    for n, raw in _lines(stream):
        try:
            rec = json.loads(raw)
        except json.JSONDecodeError as e:
            raise CorpusError(f"invalid JSON: {e.msg}", n) from None
        doc = document_from_record(rec, n)
        if doc.doc_id in seen:
            raise CorpusError(f"duplicate doc_id {doc.doc_id!r}", n, "doc_id")
        seen.add(doc.doc_id)
        yield doc


def parse_corpus(stream, registry: Registry | None = None) -> Corpus:
    """Read corpus JSONL (bytes, text, or a line iterable) into a Corpus."""
    corpus = Corpus(registry=registry if registry is not None else Registry())
    for doc in iter_documents(stream):
        corpus.documents.setdefault(doc.split, []).append(doc)
    return corpus


def dump_corpus(corpus: Corpus | Iterable[Document], fh: IO[str]) -> None:
    docs = corpus.all_documents() if isinstance(corpus, Corpus) else corpus
    for doc in docs:
        fh.write(json.dumps(document_to_record(doc), ensure_ascii=False) + "\n")


def load_corpus(path, registry: Registry | None = None) -> Corpus:
    with open(path, "rb") as fh:
        return parse_corpus(fh, registry)


def parse_registry(data: Mapping) -> Registry:
    if not isinstance(data, Mapping):
        raise CorpusError("registry must be a JSON object")
    reg = Registry()
    for tag, entry in data.items():
        if not isinstance(entry, Mapping):
            raise CorpusError("entry must be an object", field=tag)
        gender = entry.get("gender", "unknown")
        gender = {"neutral": "neuter"}.get(gender, gender)
        if gender not in GENDERS:
            raise CorpusError(f"gender {gender!r} not in {list(GENDERS)}", field=tag)
        plurality = entry.get("plurality", "singular")
        if plurality not in PLURALITIES:
            raise CorpusError(f"plurality {plurality!r} not in {list(PLURALITIES)}", field=tag)
        paradigm = None
        if entry.get("pronouns"):
            paradigm = {_CASE_KEYS.get(k, k): v for k, v in entry["pronouns"].items()}
            if not {"nominative", "accusative"} <= paradigm.keys():
                raise CorpusError("pronoun paradigm needs nom and acc", field=tag)
        reg[tag] = EntityMeta(tag, entry.get("type", "unknown"), gender, plurality, paradigm)
    return reg


def registry_to_dict(reg: Mapping[str, EntityMeta]) -> dict:
    inverse = {v: k for k, v in _CASE_KEYS.items()}
    out = {}
    for tag, m in sorted(reg.items()):
        entry = {"type": m.entity_type, "gender": m.gender, "plurality": m.plurality}
        if m.pronoun_paradigm:
            entry["pronouns"] = {inverse.get(k, k): v for k, v in m.pronoun_paradigm.items()}
        out[tag] = entry
    return out


def load_registry(path) -> Registry:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as e:
            raise CorpusError(f"invalid JSON: {e.msg}", e.lineno) from None
    return parse_registry(data)


# -- instances and relexicalization -----------------------------------------

# use the k stored on the document
DOC_K = object()


def context_window(doc: Document, sent: int, k: int | None) -> tuple[int, int]:
    last = len(doc.sentences) - 1
    if k is None:
        return (0, last)
    if k < 0:
        raise ValueError("k must be >= 0")
    return (max(0, sent - k), min(last, sent + k))


def extract_instances(doc: Document, k=DOC_K) -> list[Instance]:
    """One Instance per slot, in slot order.

    ``k`` is the number of neighbouring sentences on each side; ``None``
    means the whole document. The default uses the document's own ``k``.
    """
    if k is DOC_K:
        k = doc.k
    out = []
    for i, slot in enumerate(doc.slots):
        first, last = context_window(doc, slot.sent, k)
        pre: list[str] = []
        for s in doc.sentences[first : slot.sent]:
            pre.extend(s)
        pre.extend(doc.sentences[slot.sent][: slot.tok])
        post = list(doc.sentences[slot.sent][slot.tok + 1 :])
        for s in doc.sentences[slot.sent + 1 : last + 1]:
            post.extend(s)
        out.append(
            Instance(
                doc_id=doc.doc_id,
                slot_index=i,
                entity_tag=slot.entity_tag,
                pre_context=tuple(pre),
                post_context=tuple(post),
                current_sentence_index=slot.sent,
                token_index=slot.tok,
                gold_re_tokens=slot.gold_re_tokens,
                gold_form=slot.gold_form,
                grammatical_role=slot.grammatical_role,
                window=(first, last),
                document=doc,
            )
        )
    return out


def relexicalize_spans(doc: Document, realized: Sequence[Sequence[str]]) -> tuple[list[str], list[tuple[int, int]]]:
    """Substitute REs into slots; returns tokens and the [start, end) span of each slot."""
    if len(realized) != len(doc.slots):
        raise ValueError(f"{doc.doc_id}: {len(realized)} REs for {len(doc.slots)} slots")
    by_pos = {s.position: i for i, s in enumerate(doc.slots)}
    tokens: list[str] = []
    spans: list[tuple[int, int]] = [(0, 0)] * len(doc.slots)
    for si, sent in enumerate(doc.sentences):
        for ti, tok in enumerate(sent):
            i = by_pos.get((si, ti))
            if i is None:
                tokens.append(tok)
                continue
            start = len(tokens)
            tokens.extend(realized[i])
            spans[i] = (start, len(tokens))
    return tokens, spans


def relexicalize(doc: Document, realized: Sequence[Sequence[str]]) -> str:
    return " ".join(relexicalize_spans(doc, realized)[0])


def sentence_texts(doc: Document, realized: Sequence[Sequence[str]]) -> list[str]:
    """Per-sentence relexicalized text."""
    if len(realized) != len(doc.slots):
        raise ValueError(f"{doc.doc_id}: {len(realized)} REs for {len(doc.slots)} slots")
    by_pos = {s.position: i for i, s in enumerate(doc.slots)}
    out = []
    for si, sent in enumerate(doc.sentences):
        toks: list[str] = []
        for ti, tok in enumerate(sent):
            i = by_pos.get((si, ti))
            toks.extend([tok] if i is None else realized[i])
        out.append(" ".join(toks))
    return out
