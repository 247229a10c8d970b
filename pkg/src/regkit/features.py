"""Categorical feature vectors for referential-form classification.

Distances are measured between slot starts: in tokens of the delexicalized
document, in sentences, and in paragraphs. The antecedent of a slot is the
nearest preceding slot with the same entity tag.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import Document, EntityMeta, Instance, Registry

NONE = "none"


@dataclass(frozen=True)
class Binner:
    """Maps a non-negative distance to an ordered bin label.

    A value equal to a boundary falls in the lower bin, so bin ``i`` covers
    ``(boundaries[i-1], boundaries[i]]``.
    """

    feature_name: str
    scheme: str
    boundaries: tuple[float, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.boundaries, self.boundaries[1:])):
            raise ValueError(f"{self.feature_name}: boundaries must be strictly increasing")
        if len(self.labels) < len(self.boundaries) + 1:
            raise ValueError(f"{self.feature_name}: need {len(self.boundaries) + 1} labels")

    def index(self, value: float) -> int:
        return bisect.bisect_left(self.boundaries, value)

    def __call__(self, value: float) -> str:
        return self.labels[self.index(value)]

    def to_dict(self) -> dict:
        return {"feature": self.feature_name, "scheme": self.scheme,
                "boundaries": list(self.boundaries), "labels": list(self.labels)}

    @classmethod
    def from_dict(cls, d: Mapping) -> "Binner":
        return cls(d["feature"], d["scheme"], tuple(d["boundaries"]), tuple(d["labels"]))


def quantile_binner(name: str, values: Sequence[float], n: int) -> Binner:
    if len(values) == 0:
        raise ValueError(f"{name}: no training distances to bin")
    qs = np.percentile(np.asarray(values, dtype=float), [100.0 * i / n for i in range(1, n)])
    bounds: list[float] = []
    for q in qs.tolist():
        if not bounds or q > bounds[-1]:
            bounds.append(q)
    return Binner(name, f"quantile({n})", tuple(bounds), tuple(f"q{i}" for i in range(n)))


SENTENCE_FIXED = ("fixed", (0, 1), ("same", "one_away", "more"))
PARAGRAPH_FIXED = ("fixed", (0, 1, 2), ("same", "one_away", "two_away", "more"))


def fixed_binner(name: str, spec) -> Binner:
    scheme, bounds, labels = spec
    return Binner(name, scheme, tuple(float(b) for b in bounds), labels)


@dataclass(frozen=True)
class FeatureSchema:
    name: str
    features: tuple[str, ...]
    bins: Mapping[str, object]  # feature -> quantile count or fixed spec


ML_S = FeatureSchema(
    "ml-s",
    ("first_mention", "same_sentence", "recency_sent", "recency_word", "competition", "position"),
    {"recency_sent": 2, "recency_word": 5},
)
ML_L_WEBNLG = FeatureSchema(
    "ml-l",
    ("role", "antecedent_role", "entity_type", "gender", "recency_word", "recency_sent"),
    {"recency_word": 5, "recency_sent": 2},
)
ML_L_WSJ = FeatureSchema(
    "ml-l-wsj",
    ("role", "antecedent_role", "entity_type", "plurality", "gender", "recency_word", "recency_sent", "recency_par"),
    {"recency_word": 5, "recency_sent": SENTENCE_FIXED, "recency_par": PARAGRAPH_FIXED},
)
SCHEMAS = {s.name: s for s in (ML_S, ML_L_WEBNLG, ML_L_WSJ)}


@dataclass(frozen=True)
class Antecedent:
    slot_index: int
    words: int
    sentences: int
    paragraphs: int
    role: str | None


def mention_index(doc: Document, slot_index: int) -> tuple[int, int]:
    """(position of this slot among its entity's mentions, number of mentions)."""
    tag = doc.slots[slot_index].entity_tag
    same = [i for i, s in enumerate(doc.slots) if s.entity_tag == tag]
    return same.index(slot_index), len(same)


def antecedent(doc: Document, slot_index: int) -> Antecedent | None:
    target = doc.slots[slot_index]
    for j in range(slot_index - 1, -1, -1):
        s = doc.slots[j]
        if s.entity_tag == target.entity_tag:
            return Antecedent(
                j,
                doc.token_offset(target.sent, target.tok) - doc.token_offset(s.sent, s.tok),
                target.sent - s.sent,
                doc.paragraph_of(target.sent) - doc.paragraph_of(s.sent),
                s.grammatical_role,
            )
    return None


def distances(docs: Iterable[Document]) -> dict[str, list[int]]:
    out: dict[str, list[int]] = {"recency_word": [], "recency_sent": [], "recency_par": []}
    for doc in docs:
        for i in range(len(doc.slots)):
            a = antecedent(doc, i)
            if a is not None:
                out["recency_word"].append(a.words)
                out["recency_sent"].append(a.sentences)
                out["recency_par"].append(a.paragraphs)
    return out


def fit_bins(training: Iterable[Document], schema: FeatureSchema) -> dict[str, Binner]:
    docs = list(training)
    if not docs:
        raise ValueError("empty training data")
    dist = distances(docs)
    binners = {}
    for name, spec in schema.bins.items():
        if isinstance(spec, int):
            if dist[name]:
                binners[name] = quantile_binner(name, dist[name], spec)
            else:  # no antecedents at all: one bin
                binners[name] = Binner(name, f"quantile({spec})", (), tuple(f"q{i}" for i in range(spec)))
        else:
            binners[name] = fixed_binner(name, spec)
    return binners


def _position(idx: int, count: int) -> str:
    if idx == 0:
        return "first"
    if idx == count - 1:
        return "last"
    if idx == 1:
        return "second"
    return "middle"


def _competition(doc: Document, ante: int, target: int) -> bool:
    tag = doc.slots[target].entity_tag
    return any(doc.slots[j].entity_tag != tag for j in range(ante + 1, target))


def _recency(binners: Mapping[str, Binner], ante: Antecedent | None) -> dict[str, str]:
    if ante is None:
        return {k: NONE for k in ("recency_word", "recency_sent", "recency_par")}
    out = {"recency_word": binners["recency_word"](ante.words), "recency_sent": binners["recency_sent"](ante.sentences)}
    par = binners.get("recency_par")
    out["recency_par"] = par(ante.paragraphs) if par else NONE
    return out


def extract_ml_s(instance: Instance, binners: Mapping[str, Binner]) -> dict[str, str]:
    doc, i = instance.document, instance.slot_index
    ante = antecedent(doc, i)
    idx, count = mention_index(doc, i)
    rec = _recency(binners, ante)
    return {
        "first_mention": "yes" if ante is None else "no",
        "same_sentence": NONE if ante is None else ("yes" if ante.sentences == 0 else "no"),
        "recency_sent": rec["recency_sent"],
        "recency_word": rec["recency_word"],
        "competition": NONE if ante is None else ("yes" if _competition(doc, ante.slot_index, i) else "no"),
        "position": _position(idx, count),
    }


def extract_ml_l(
    instance: Instance,
    binners: Mapping[str, Binner],
    registry: Mapping[str, EntityMeta] | None = None,
    schema: FeatureSchema = ML_L_WEBNLG,
) -> dict[str, str]:
    reg = registry if isinstance(registry, Registry) else Registry(registry or {})
    meta = reg.meta(instance.entity_tag)
    ante = antecedent(instance.document, instance.slot_index)
    rec = _recency(binners, ante)
    values = {
        "role": instance.grammatical_role or "other",
        "antecedent_role": NONE if ante is None else (ante.role or "other"),
        "entity_type": meta.entity_type,
        "plurality": meta.plurality,
        "gender": meta.gender,
        **rec,
    }
    return {f: values[f] for f in schema.features}


def extract(
    instance: Instance,
    schema: FeatureSchema,
    binners: Mapping[str, Binner],
    registry: Mapping[str, EntityMeta] | None = None,
) -> dict[str, str]:
    if schema.name == "ml-s":
        return extract_ml_s(instance, binners)
    return extract_ml_l(instance, binners, registry, schema)
