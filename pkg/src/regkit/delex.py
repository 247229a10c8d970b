"""Build delexicalized REG documents from coreference-annotated text.

Every kept mention of a chain is collapsed into one slot token carrying the
chain's tag. Human chains get their tag from the first name pattern found,
in this priority order::

    firstname-lastname, title-firstname-lastname, modified firstname-lastname,
    title-lastname, lastname, modified-lastname, firstname

Other chains use their longest all-proper-noun mention. Patterns look only
at a mention's core (the tokens before its first comma).
"""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from typing import Callable, Iterator, Mapping, Sequence

from .corpus import (
    CASES,
    FORMS,
    ROLES,
    SPLITS,
    CorpusError,
    Document,
    EntityMeta,
    Registry,
    SlotAnnotation,
    _check_token,
    _lines,
    _require,
)

log = logging.getLogger(__name__)

TITLES = frozenset({"Mr.", "Ms.", "Mrs.", "Dr.", "Mr", "Ms", "Mrs", "Dr", "President", "Chairman"})
HUMAN_TYPES = frozenset({"PERSON", "HUMAN"})
PROPER_TAGS = frozenset({"NNP", "NNPS"})

_INITIAL = re.compile(r"^[A-Z]\.$")
_FIRST = frozenset("i me my mine myself we us our ours ourselves".split())
_SECOND = frozenset("you your yours yourself yourselves".split())
_HUMAN_PRONOUNS = frozenset("he him his himself she her hers herself".split())
# capitalized but never part of a name when POS tags are absent
_CLOSED_CLASS = _FIRST | _SECOND | _HUMAN_PRONOUNS | frozenset(
    "it its itself they them their theirs themselves the a an this that these those".split()
)

FORM_ALIASES = {
    "name": "proper_name",
    "proper": "proper_name",
    "pronominal": "pronoun",
    "common": "description",
    "demonstrative": "description",
    "definite": "description",
    "indefinite": "description",
}


@dataclass(frozen=True)
class Mention:
    sent: int
    start: int
    end: int  # exclusive
    tokens: tuple[str, ...]
    person: str = "third"
    is_union: bool = False
    pos_tags: tuple[str, ...] | None = None
    form: str | None = None
    grammatical_role: str | None = None
    case: str | None = None
    entity_type: str | None = None

    @property
    def position(self) -> tuple[int, int]:
        return (self.sent, self.start)


@dataclass(frozen=True)
class CoreferenceChain:
    chain_id: str
    mentions: tuple[Mention, ...]
    entity_type: str | None = None

    def __len__(self) -> int:
        return len(self.mentions)


@dataclass(frozen=True)
class AnnotatedDocument:
    doc_id: str
    sentences: tuple[tuple[str, ...], ...]
    chains: tuple[CoreferenceChain, ...] = ()
    split: str = "train"
    domain_label: str | None = None
    paragraphs: tuple[int, ...] | None = None


@dataclass(frozen=True)
class Overlap:
    doc_id: str
    kept_chain: str
    dropped_chain: str
    mention: Mention


# -- filtering ---------------------------------------------------------------


def _person(m: Mention) -> str:
    if m.person != "third":
        return m.person
    word = m.tokens[0].lower() if len(m.tokens) == 1 else ""
    if word in _FIRST:
        return "first"
    if word in _SECOND:
        return "second"
    return "third"


def filter_mentions(chain: CoreferenceChain) -> CoreferenceChain:
    """Drop first/second-person and union (coordinated group) mentions."""
    kept = tuple(m for m in chain.mentions if _person(m) == "third" and not m.is_union)
    return CoreferenceChain(chain.chain_id, kept, chain.entity_type)


# -- tag selection -----------------------------------------------------------


def core_tokens(m: Mention) -> tuple[str, ...]:
    """Mention tokens before the first comma, which drops appositives and
    non-restrictive relative clauses ("Mr. Blum , 41 ," -> "Mr. Blum")."""
    if "," in m.tokens[1:]:
        return m.tokens[: m.tokens.index(",", 1)]
    return m.tokens


@dataclass
class NameShape:
    """Token classes of one mention."""

    tokens: Sequence[str]
    name: list[bool]
    title: list[bool]

    @classmethod
    def of(cls, m: Mention) -> "NameShape":
        tokens = core_tokens(m)
        title = [t in TITLES for t in tokens]
        if m.pos_tags is not None:
            name = [p in PROPER_TAGS and not ti for p, ti in zip(m.pos_tags, title)]
        else:
            name = [t[:1].isupper() and t.lower() not in _CLOSED_CLASS and not ti for t, ti in zip(tokens, title)]
        return cls(tokens, name, title)

    def is_modifier(self, i: int) -> bool:
        return not self.name[i] and not self.title[i]


@dataclass
class TagSelector:
    """Name-pattern matcher.

    ``middle_initial`` decides whether "Ronald B. Koenig" counts as a
    firstname-lastname form. Off by default, which tags that
    chain ``Mr._Koenig``.
    """

    middle_initial: bool = False
    human_types: frozenset = HUMAN_TYPES

    def _full_name(self, sh: NameShape, lo: int) -> bool:
        """tokens[lo:] is firstname lastname (optionally with an initial)."""
        rest = len(sh.tokens) - lo
        if rest == 2:
            return sh.name[lo] and sh.name[lo + 1]
        if rest == 3 and self.middle_initial:
            return sh.name[lo] and bool(_INITIAL.match(sh.tokens[lo + 1])) and sh.name[lo + 2]
        return False

    def _full_name_len(self) -> tuple[int, ...]:
        return (2, 3) if self.middle_initial else (2,)

    def firstname_lastname(self, sh: NameShape, chain) -> bool:
        return len(sh.tokens) in self._full_name_len() and self._full_name(sh, 0)

    def title_firstname_lastname(self, sh: NameShape, chain) -> bool:
        return len(sh.tokens) >= 3 and sh.title[0] and self._full_name(sh, 1)

    def modified_firstname_lastname(self, sh: NameShape, chain) -> bool:
        for n in self._full_name_len():
            lo = len(sh.tokens) - n
            if lo >= 1 and self._full_name(sh, lo) and all(sh.is_modifier(i) for i in range(lo)):
                return True
        return False

    def title_lastname(self, sh: NameShape, chain) -> bool:
        return len(sh.tokens) == 2 and sh.title[0] and sh.name[1]

    def lastname(self, sh: NameShape, chain) -> bool:
        if len(sh.tokens) != 1 or not sh.name[0]:
            return False
        firsts, lasts = _name_parts(chain)
        return sh.tokens[0] in lasts or sh.tokens[0] not in firsts

    def modified_lastname(self, sh: NameShape, chain) -> bool:
        n = len(sh.tokens)
        return n >= 2 and sh.name[-1] and all(sh.is_modifier(i) for i in range(n - 1))

    def firstname(self, sh: NameShape, chain) -> bool:
        if len(sh.tokens) != 1 or not sh.name[0]:
            return False
        firsts, _ = _name_parts(chain)
        return sh.tokens[0] in firsts

    @property
    def patterns(self) -> list[tuple[str, Callable]]:
        return [
            ("firstname-lastname", self.firstname_lastname),
            ("title-firstname-lastname", self.title_firstname_lastname),
            ("modified firstname-lastname", self.modified_firstname_lastname),
            ("title-lastname", self.title_lastname),
            ("lastname", self.lastname),
            ("modified-lastname", self.modified_lastname),
            ("firstname", self.firstname),
        ]

    def is_human(self, chain: CoreferenceChain, registry: Mapping[str, EntityMeta] | None = None) -> bool:
        types = {chain.entity_type} | {m.entity_type for m in chain.mentions}
        if any(t is not None and t.upper() in self.human_types for t in types):
            return True
        if registry:
            for m in chain.mentions:
                meta = registry.get("_".join(m.tokens))
                if meta is not None and meta.entity_type.upper() in self.human_types:
                    return True
        return any(len(m.tokens) == 1 and m.tokens[0].lower() in _HUMAN_PRONOUNS for m in chain.mentions)

    def match(self, chain: CoreferenceChain) -> tuple[str, Mention] | None:
        shapes = [(m, NameShape.of(m)) for m in chain.mentions]
        for name, test in self.patterns:
            for m, sh in shapes:
                if test(sh, chain):
                    return name, m
        return None

    def select(self, chain: CoreferenceChain, registry: Mapping[str, EntityMeta] | None = None) -> str:
        if not chain.mentions:
            raise ValueError(f"chain {chain.chain_id!r} is empty")
        chosen = None
        if self.is_human(chain, registry):
            hit = self.match(chain)
            if hit is not None:
                chosen = hit[1]
        else:
            best = -1
            for m in chain.mentions:
                sh = NameShape.of(m)
                if all(sh.name) and len(sh.tokens) > best:
                    chosen, best = m, len(sh.tokens)
            if chosen is None:
                # "Gruntal & Co." -> "Gruntal"
                for m in chain.mentions:
                    sh = NameShape.of(m)
                    run = 0
                    while run < len(sh.name) and sh.name[run]:
                        run += 1
                    if run:
                        return "_".join(sh.tokens[:run])
        if chosen is None:
            chosen = chain.mentions[0]
        return "_".join(core_tokens(chosen))


def _name_parts(chain: CoreferenceChain) -> tuple[set[str], set[str]]:
    """First and last name tokens of multi-token proper-name mentions."""
    firsts, lasts = set(), set()
    for m in chain.mentions:
        sh = NameShape.of(m)
        idx = [i for i, (n, t) in enumerate(zip(sh.name, sh.title)) if n and not t]
        if len(idx) >= 2:
            firsts.add(sh.tokens[idx[0]])
            lasts.add(sh.tokens[idx[-1]])
    return firsts, lasts


def select_chain_tag(chain: CoreferenceChain, middle_initial: bool = False) -> str:
    return TagSelector(middle_initial=middle_initial).select(chain)


# -- building ----------------------------------------------------------------


def resolve_overlaps(doc: AnnotatedDocument, chains: Sequence[CoreferenceChain]):
    """Keep mentions of earlier chains (by first mention) where spans collide."""
    order = sorted((c for c in chains if c.mentions), key=lambda c: (c.mentions[0].position, c.chain_id))
    owner: dict[tuple[int, int], str] = {}
    kept: list[CoreferenceChain] = []
    overlaps: list[Overlap] = []
    for c in order:
        ms = []
        for m in c.mentions:
            cells = [(m.sent, i) for i in range(m.start, m.end)]
            clash = next((owner[x] for x in cells if x in owner), None)
            if clash is not None:
                overlaps.append(Overlap(doc.doc_id, clash, c.chain_id, m))
                log.warning("%s: mention %r of chain %s overlaps chain %s; dropped",
                            doc.doc_id, " ".join(m.tokens), c.chain_id, clash)
                continue
            for x in cells:
                owner[x] = c.chain_id
            ms.append(m)
        if ms:
            kept.append(CoreferenceChain(c.chain_id, tuple(ms), c.entity_type))
    return kept, overlaps


def _gold_form(form: str | None) -> str | None:
    if form is None:
        return None
    form = FORM_ALIASES.get(form, form)
    return form if form in FORMS else None


def build_document(
    doc: AnnotatedDocument,
    registry: Mapping[str, EntityMeta] | None = None,
    k: int | None = None,
    selector: TagSelector | None = None,
) -> tuple[Document, list[Overlap], dict[str, str]]:
    """Delexicalize ``doc``; also returns dropped overlaps and chain_id -> tag."""
    selector = selector or TagSelector()
    if k is not None and k < 0:
        raise ValueError("k must be >= 0")
    chains = [c for c in (filter_mentions(c) for c in doc.chains) if c.mentions]
    tags = {c.chain_id: selector.select(c, registry) for c in chains}
    chains, overlaps = resolve_overlaps(doc, chains)

    starts: dict[tuple[int, int], tuple[CoreferenceChain, Mention]] = {}
    covered: set[tuple[int, int]] = set()
    for c in chains:
        for m in c.mentions:
            starts[(m.sent, m.start)] = (c, m)
            covered.update((m.sent, i) for i in range(m.start, m.end))

    sentences = []
    slots = []
    for si, sent in enumerate(doc.sentences):
        out: list[str] = []
        for ti, tok in enumerate(sent):
            hit = starts.get((si, ti))
            if hit is not None:
                c, m = hit
                slots.append(
                    SlotAnnotation(
                        sent=si,
                        tok=len(out),
                        entity_tag=tags[c.chain_id],
                        gold_re_tokens=m.tokens,
                        chain_id=c.chain_id,
                        gold_form=_gold_form(m.form),
                        grammatical_role=m.grammatical_role,
                        case=m.case,
                    )
                )
                out.append(tags[c.chain_id])
            elif (si, ti) not in covered:
                out.append(tok)
        sentences.append(tuple(out))
    built = Document(doc.doc_id, tuple(sentences), tuple(slots), doc.split, doc.domain_label, doc.paragraphs, k)
    return built, overlaps, tags


def build_instances(
    doc: AnnotatedDocument,
    registry: Mapping[str, EntityMeta] | None = None,
    k: int | None = None,
    middle_initial: bool = False,
) -> Document:
    return build_document(doc, registry, k, TagSelector(middle_initial=middle_initial))[0]


def chain_meta(chain: CoreferenceChain, tag: str, selector: TagSelector | None = None) -> EntityMeta:
    """Best-effort entity meta from a chain's own pronouns and type."""
    selector = selector or TagSelector()
    lemmas = [m.tokens[0].lower() for m in chain.mentions if len(m.tokens) == 1]
    gender, plurality = "unknown", "singular"
    if any(x in ("he", "him", "his", "himself") for x in lemmas):
        gender = "male"
    elif any(x in ("she", "her", "hers", "herself") for x in lemmas):
        gender = "female"
    elif any(x in ("it", "its", "itself") for x in lemmas):
        gender = "neuter"
    if any(x in ("they", "them", "their", "theirs", "themselves") for x in lemmas):
        plurality = "plural"
    etype = chain.entity_type or next((m.entity_type for m in chain.mentions if m.entity_type), None)
    if etype is None:
        etype = "PERSON" if selector.is_human(chain) else "unknown"
    return EntityMeta(tag, etype, gender, plurality)


# -- input format ------------------------------------------------------------


def _mention_from_record(rec, sentences, pos, line: int, where: str) -> Mention:
    if not isinstance(rec, dict):
        raise CorpusError("mention must be an object", line, where)
    si = _require(rec, "sent", int, line, where + ".")
    start = _require(rec, "start", int, line, where + ".")
    end = _require(rec, "end", int, line, where + ".")
    if not (0 <= si < len(sentences)) or not (0 <= start < end <= len(sentences[si])):
        raise CorpusError(f"span ({si}, {start}:{end}) out of range", line, where)
    tokens = sentences[si][start:end]
    if "tokens" in rec and list(rec["tokens"]) != list(tokens):
        raise CorpusError(f"tokens {rec['tokens']!r} do not match span text {list(tokens)!r}", line, where)
    tags = rec.get("pos")
    if tags is None and pos is not None:
        tags = pos[si][start:end]
    if tags is not None and len(tags) != len(tokens):
        raise CorpusError("pos length differs from span length", line, where)
    person = rec.get("person", "third")
    if person not in ("first", "second", "third"):
        raise CorpusError(f"person {person!r}", line, where)
    role = rec.get("gram_role")
    if role is not None and role not in ROLES:
        raise CorpusError(f"gram_role {role!r} not in {list(ROLES)}", line, where)
    case = rec.get("case")
    if case is not None and case not in CASES:
        raise CorpusError(f"case {case!r} not in {list(CASES)}", line, where)
    return Mention(
        sent=si,
        start=start,
        end=end,
        tokens=tuple(tokens),
        person=person,
        is_union=bool(rec.get("is_union", False)),
        pos_tags=tuple(tags) if tags is not None else None,
        form=rec.get("form"),
        grammatical_role=role,
        case=case,
        entity_type=rec.get("entity_type"),
    )


def annotated_from_record(rec: dict, line: int = 0) -> AnnotatedDocument:
    if not isinstance(rec, dict):
        raise CorpusError("record must be a JSON object", line)
    doc_id = _require(rec, "doc_id", str, line)
    split = rec.get("split", "train")
    if split not in SPLITS:
        raise CorpusError(f"{split!r} not in {list(SPLITS)}", line, "split")
    sentences = []
    for i, sent in enumerate(_require(rec, "sentences", list, line)):
        if not isinstance(sent, list):
            raise CorpusError("sentence must be a token list", line, f"sentences[{i}]")
        sentences.append(tuple(_check_token(t, line, f"sentences[{i}]") for t in sent))
    pos = rec.get("pos")
    if pos is not None and (len(pos) != len(sentences) or any(len(p) != len(s) for p, s in zip(pos, sentences))):
        raise CorpusError("pos must parallel sentences", line, "pos")
    chains = []
    for ci, c in enumerate(rec.get("chains", [])):
        where = f"chains[{ci}]"
        if not isinstance(c, dict):
            raise CorpusError("chain must be an object", line, where)
        chain_id = str(c.get("chain_id", ci))
        mentions = [
            _mention_from_record(m, sentences, pos, line, f"{where}.mentions[{mi}]")
            for mi, m in enumerate(_require(c, "mentions", list, line, where + "."))
        ]
        mentions.sort(key=lambda m: m.position)
        for a, b in zip(mentions, mentions[1:]):
            if a.sent == b.sent and b.start < a.end:
                raise CorpusError("mentions of one chain overlap", line, where)
        chains.append(CoreferenceChain(chain_id, tuple(mentions), c.get("entity_type")))
    paragraphs = rec.get("paragraphs")
    if paragraphs is not None:
        if len(paragraphs) != len(sentences):
            raise CorpusError("one paragraph index per sentence", line, "paragraphs")
        paragraphs = tuple(paragraphs)
    return AnnotatedDocument(doc_id, tuple(sentences), tuple(chains), split, rec.get("domain_label"), paragraphs)


def iter_annotated(stream) -> Iterator[AnnotatedDocument]:
    seen: set[str] = set()
    for n, raw in _lines(stream):
        try:
            rec = json.loads(raw)
        except json.JSONDecodeError as e:
            raise CorpusError(f"invalid JSON: {e.msg}", n) from None
        doc = annotated_from_record(rec, n)
        if doc.doc_id in seen:
            raise CorpusError(f"duplicate doc_id {doc.doc_id!r}", n, "doc_id")
        seen.add(doc.doc_id)
        yield doc


def build_corpus_documents(
    docs, registry: Mapping[str, EntityMeta] | None = None, k: int | None = None, middle_initial: bool = False
) -> tuple[list[Document], Registry, list[Overlap]]:
    """Delexicalize a stream of annotated documents.

    The returned registry extends ``registry`` with inferred meta for tags it
    does not already cover.
    """
    selector = TagSelector(middle_initial=middle_initial)
    reg = Registry(registry or {})
    out, overlaps = [], []
    for doc in docs:
        built, ov, tags = build_document(doc, reg, k, selector)
        out.append(built)
        overlaps.extend(ov)
        for c in doc.chains:
            tag = tags.get(c.chain_id)
            if tag is not None and tag not in reg:
                reg[tag] = chain_meta(filter_mentions(c), tag, selector)
    return out, reg, overlaps
