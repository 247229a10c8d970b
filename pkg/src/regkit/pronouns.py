"""Pronoun paradigms and the per-entity pronoun dictionary."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .corpus import Corpus, Document, EntityMeta, Registry

PARADIGMS: dict[str, dict[str, str]] = {
    "he": {"nominative": "he", "accusative": "him", "genitive": "his", "reflexive": "himself"},
    "she": {"nominative": "she", "accusative": "her", "genitive": "her", "reflexive": "herself"},
    "it": {"nominative": "it", "accusative": "it", "genitive": "its", "reflexive": "itself"},
    "they": {"nominative": "they", "accusative": "them", "genitive": "their", "reflexive": "themselves"},
}

# tie-break order for equally frequent lemmas
LEMMA_PRECEDENCE = ("he", "she", "it", "they")

LEMMA_OF = {form: lemma for lemma, p in PARADIGMS.items() for form in p.values()}
LEMMA_OF.update({"hers": "she", "theirs": "they"})

# Closed English personal / possessive / reflexive inventory used to reduce
# string outputs to a pronominal yes/no label.
PRONOUNS = frozenset(
    """
    i me my mine myself we us our ours ourselves
    you your yours yourself yourselves
    he him his himself she her hers herself it its itself
    they them their theirs themselves
    """.split()
)


def is_pronoun_string(tokens: Iterable[str]) -> bool:
    toks = [t.lower() for t in tokens]
    return len(toks) == 1 and toks[0] in PRONOUNS


def paradigm_from_meta(meta: EntityMeta) -> dict[str, str]:
    """Fallback paradigm for entities without pronominal training data."""
    if meta.pronoun_paradigm:
        return dict(meta.pronoun_paradigm)
    if meta.plurality == "plural":
        return dict(PARADIGMS["they"])
    if meta.gender == "female":
        return dict(PARADIGMS["she"])
    if meta.gender == "male":
        return dict(PARADIGMS["he"])
    return dict(PARADIGMS["it"])


@dataclass
class PronounTable:
    paradigms: dict[str, dict[str, str]] = field(default_factory=dict)
    registry: Registry = field(default_factory=Registry)

    def __post_init__(self):
        for tag, p in self.paradigms.items():
            if not {"nominative", "accusative"} <= p.keys():
                raise ValueError(f"paradigm for {tag!r} lacks nominative/accusative")

    def paradigm(self, tag: str) -> dict[str, str]:
        meta = self.registry.get(tag)
        if meta is not None and meta.pronoun_paradigm:
            return dict(meta.pronoun_paradigm)
        found = self.paradigms.get(tag)
        if found is not None:
            return found
        return paradigm_from_meta(self.registry.meta(tag))

    def nominative(self, tag: str) -> str:
        return self.paradigm(tag)["nominative"]


def _slot_lemma(slot) -> str | None:
    toks = slot.gold_re_tokens
    if len(toks) != 1:
        return None
    if slot.gold_form not in (None, "pronoun"):
        return None
    return LEMMA_OF.get(toks[0].lower())


def build_pronoun_table(
    training: Corpus | Iterable[Document], registry: Mapping[str, EntityMeta] | None = None
) -> PronounTable:
    """Most frequent third-person pronoun lemma per entity seen in training."""
    docs = training.split("train") if isinstance(training, Corpus) else training
    if registry is None:
        registry = training.registry if isinstance(training, Corpus) else Registry()
    counts: dict[str, Counter] = {}
    for doc in docs:
        for slot in doc.slots:
            lemma = _slot_lemma(slot)
            if lemma is not None:
                counts.setdefault(slot.entity_tag, Counter())[lemma] += 1
    paradigms = {}
    for tag, c in counts.items():
        best = max(LEMMA_PRECEDENCE, key=lambda lem: (c[lem], -LEMMA_PRECEDENCE.index(lem)))
        paradigms[tag] = dict(PARADIGMS[best])
    reg = registry if isinstance(registry, Registry) else Registry(registry)
    return PronounTable(paradigms, reg)
