"""Feature-based REG: 3-way form classification plus back-off content selection.

The form classifier is either gradient-boosted trees (scikit-learn's
histogram GBDT with native categorical splits) or a categorical Naive Bayes
with add-one smoothing. Content is the most frequent training RE of the
entity with the predicted form and matching feature signature; features are
dropped least-important first until something matches.
"""
from __future__ import annotations

import base64
import json
import math
import pickle
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import Document, EntityMeta, Instance, extract_instances
from .features import SCHEMAS, Binner, FeatureSchema, extract, fit_bins
from .pronouns import PronounTable
from .realization import RealizedRE, capitalize_initial, realize_pronoun, realize_proper_name

CLASSES = ("pronoun", "proper_name", "description")
MODEL_FORMAT = "regkit-form-model"
MODEL_VERSION = 1


class SchemaMismatch(ValueError):
    pass


# -- classifiers -------------------------------------------------------------


@dataclass
class CategoricalNB:
    """Naive Bayes over categorical features, add-one smoothed.

    Unseen values get the smoothed zero-count probability.
    """

    classes: list[str] = field(default_factory=list)
    class_counts: list[int] = field(default_factory=list)
    value_counts: list[dict[str, list[int]]] = field(default_factory=list)

    kind = "nb"

    def fit(self, X: Sequence[Sequence[str]], y: Sequence[str]) -> "CategoricalNB":
        self.classes = [c for c in CLASSES if c in set(y)]
        ci = {c: i for i, c in enumerate(self.classes)}
        self.class_counts = [0] * len(self.classes)
        self.value_counts = [dict() for _ in range(len(X[0]) if X else 0)]
        for row, label in zip(X, y):
            k = ci[label]
            self.class_counts[k] += 1
            for f, v in enumerate(row):
                self.value_counts[f].setdefault(v, [0] * len(self.classes))[k] += 1
        return self

    def log_scores(self, row: Sequence[str]) -> list[float]:
        total = sum(self.class_counts)
        out = []
        for k, n in enumerate(self.class_counts):
            s = math.log((n + 1) / (total + len(self.classes)))
            for f, v in enumerate(row):
                counts = self.value_counts[f]
                c = counts[v][k] if v in counts else 0
                s += math.log((c + 1) / (n + len(counts) + 1))
            out.append(s)
        return out

    def predict_scores(self, X) -> np.ndarray:
        return np.array([self.log_scores(r) for r in X], dtype=float).reshape(len(X), len(self.classes))

    def state(self) -> dict:
        return {"classes": self.classes, "class_counts": self.class_counts,
                "value_counts": [dict(sorted(d.items())) for d in self.value_counts]}

    @classmethod
    def from_state(cls, state: Mapping) -> "CategoricalNB":
        return cls(list(state["classes"]), list(state["class_counts"]), [dict(d) for d in state["value_counts"]])


@dataclass
class BoostedTrees:
    """Histogram GBDT over label-encoded categorical features.

    Values unseen in training are encoded as missing.
    """

    params: dict = field(default_factory=dict)
    seed: int = 0
    encoders: list[dict[str, int]] = field(default_factory=list)
    classes: list[str] = field(default_factory=list)
    model: object = None
    # pickle bytes as loaded; re-pickling an unpickled estimator is not byte-stable
    blob: str | None = field(default=None, repr=False, compare=False)

    kind = "gbdt"
    max_categories = 254

    def _encode(self, X) -> np.ndarray:
        out = np.full((len(X), len(self.encoders)), np.nan)
        for i, row in enumerate(X):
            for f, v in enumerate(row):
                code = self.encoders[f].get(v)
                if code is not None:
                    out[i, f] = code
        return out

    def fit(self, X, y) -> "BoostedTrees":
        from sklearn.ensemble import HistGradientBoostingClassifier

        n_feat = len(X[0])
        self.encoders = []
        for f in range(n_feat):
            freq = Counter(row[f] for row in X)
            ranked = sorted(freq, key=lambda v: (-freq[v], v))[: self.max_categories]
            self.encoders.append({v: i for i, v in enumerate(sorted(ranked))})
        self.classes = [c for c in CLASSES if c in set(y)]
        opts = {"max_iter": 200, "learning_rate": 0.1, "min_samples_leaf": 5, **self.params}
        self.model = HistGradientBoostingClassifier(
            categorical_features=list(range(n_feat)), early_stopping=False, random_state=self.seed, **opts
        )
        self.model.fit(self._encode(X), np.asarray(y))
        self.blob = None
        return self

    def predict_scores(self, X) -> np.ndarray:
        proba = self.model.predict_proba(self._encode(X))
        order = [list(self.model.classes_).index(c) for c in self.classes]
        return proba[:, order]

    def state(self) -> dict:
        if self.blob is None:
            self.blob = base64.b64encode(pickle.dumps(self.model, protocol=4)).decode("ascii")
        blob = self.blob
        return {"params": self.params, "seed": self.seed, "encoders": self.encoders,
                "classes": self.classes, "sklearn_pickle": blob}

    @classmethod
    def from_state(cls, state: Mapping) -> "BoostedTrees":
        model = pickle.loads(base64.b64decode(state["sklearn_pickle"]))
        return cls(dict(state["params"]), state["seed"], [dict(e) for e in state["encoders"]],
                   list(state["classes"]), model, state["sklearn_pickle"])


CLASSIFIERS = {"nb": CategoricalNB, "gbdt": BoostedTrees}


def make_classifier(kind: str, seed: int = 0, params: Mapping | None = None):
    if kind == "nb":
        return CategoricalNB()
    if kind == "gbdt":
        return BoostedTrees(dict(params or {}), seed)
    raise ValueError(f"unknown classifier {kind!r}")


def _argmax_forms(scores: np.ndarray, classes: Sequence[str]) -> list[str]:
    # equal scores resolve by CLASSES order
    rank = sorted(range(len(classes)), key=lambda k: CLASSES.index(classes[k]))
    out = []
    for row in scores:
        best = rank[0]
        for k in rank[1:]:
            if row[k] > row[best]:
                best = k
        out.append(classes[best])
    return out


# -- variant index -----------------------------------------------------------


@dataclass
class VariantIndex:
    """(entity, form, importance-ordered signature prefix) -> RE counts."""

    importance: tuple[str, ...]
    table: dict[tuple, Counter] = field(default_factory=dict)

    def add(self, tag: str, form: str, features: Mapping[str, str], re_tokens: Sequence[str], count: int = 1) -> None:
        sig = tuple(features[f] for f in self.importance)
        text = " ".join(re_tokens)
        for j in range(len(sig) + 1):
            self.table.setdefault((tag, form, sig[:j]), Counter())[text] += count

    def candidates(self, tag: str, form: str, signature: Sequence[str]) -> Counter:
        return self.table.get((tag, form, tuple(signature)), Counter())

    def lookup(self, tag: str, form: str, features: Mapping[str, str]) -> tuple[str | None, int]:
        """Most frequent variant and the number of lookups it took."""
        sig = tuple(features[f] for f in self.importance)
        steps = 0
        for j in range(len(sig), -1, -1):
            steps += 1
            found = self.table.get((tag, form, sig[:j]))
            if found:
                return min(found, key=lambda v: (-found[v], v)), steps
        return None, steps

    def to_list(self) -> list:
        rows = [[tag, form, list(sig), sorted(c.items())] for (tag, form, sig), c in self.table.items()
                if len(sig) == len(self.importance)]
        return sorted(rows)

    @classmethod
    def from_list(cls, importance: Sequence[str], rows) -> "VariantIndex":
        idx = cls(tuple(importance))
        for tag, form, sig, counts in rows:
            feats = dict(zip(idx.importance, sig))
            for text, n in counts:
                idx.add(tag, form, feats, text.split(" "), n)
        return idx


# -- model -------------------------------------------------------------------


@dataclass
class FormModel:
    schema: FeatureSchema
    binners: dict[str, Binner]
    classifier: object
    feature_importance: tuple[str, ...]
    index: VariantIndex
    seed: int = 0

    def features(self, instance: Instance, registry: Mapping[str, EntityMeta] | None = None) -> dict[str, str]:
        return extract(instance, self.schema, self.binners, registry)

    def to_json(self) -> str:
        doc = {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "schema": {"name": self.schema.name, "features": list(self.schema.features)},
            "seed": self.seed,
            "binners": [self.binners[k].to_dict() for k in sorted(self.binners)],
            "classifier": {"kind": self.classifier.kind, "state": self.classifier.state()},
            "feature_importance": list(self.feature_importance),
            "variants": self.index.to_list(),
        }
        return json.dumps(doc, sort_keys=True, ensure_ascii=False, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "FormModel":
        doc = json.loads(text)
        if doc.get("format") != MODEL_FORMAT:
            raise ValueError("not a regkit form model")
        if doc.get("version") != MODEL_VERSION:
            raise ValueError(f"unsupported model version {doc.get('version')}")
        schema = SCHEMAS[doc["schema"]["name"]]
        if list(schema.features) != doc["schema"]["features"]:
            raise SchemaMismatch("stored feature list differs from the built-in schema")
        binners = {d["feature"]: Binner.from_dict(d) for d in doc["binners"]}
        clf = CLASSIFIERS[doc["classifier"]["kind"]].from_state(doc["classifier"]["state"])
        importance = tuple(doc["feature_importance"])
        return cls(schema, binners, clf, importance, VariantIndex.from_list(importance, doc["variants"]), doc["seed"])

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "FormModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def _rows(schema: FeatureSchema, vectors: Sequence[Mapping[str, str]]) -> list[list[str]]:
    rows = []
    for v in vectors:
        if set(v) != set(schema.features):
            raise SchemaMismatch(f"expected features {schema.features}, got {tuple(v)}")
        rows.append([v[f] for f in schema.features])
    return rows


def predict_forms(model: FormModel, vectors: Sequence[Mapping[str, str]]) -> list[str]:
    if not vectors:
        return []
    clf = model.classifier
    return _argmax_forms(clf.predict_scores(_rows(model.schema, vectors)), clf.classes)


def predict_form(model: FormModel, features: Mapping[str, str]) -> str:
    return predict_forms(model, [features])[0]


def permutation_importance(
    classifier, schema: FeatureSchema, X: list[list[str]], y: Sequence[str], seed: int = 0, repeats: int = 5
) -> tuple[list[str], list[float]]:
    """Mean accuracy drop when one feature column is shuffled.

    Ties keep schema order.
    """
    rng = np.random.default_rng(seed)
    y = list(y)

    def accuracy(rows):
        pred = _argmax_forms(classifier.predict_scores(rows), classifier.classes)
        return sum(p == g for p, g in zip(pred, y)) / len(y)

    base = accuracy(X)
    drops = []
    for f in range(len(schema.features)):
        total = 0.0
        for _ in range(repeats):
            perm = rng.permutation(len(X))
            shuffled = [row[:f] + [X[p][f]] + row[f + 1 :] for row, p in zip(X, perm)]
            total += base - accuracy(shuffled)
        drops.append(round(total / repeats, 12))
    order = sorted(range(len(drops)), key=lambda f: (-drops[f], f))
    return [schema.features[f] for f in order], drops


def _labelled(docs: Iterable[Document]) -> list[Instance]:
    out = []
    for doc in docs:
        for inst in extract_instances(doc, None):
            if inst.gold_form is None:
                raise ValueError(f"{doc.doc_id} slot {inst.slot_index}: missing gold_form")
            out.append(inst)
    return out


def feature_importance(
    model: FormModel, dev: Iterable[Document], registry: Mapping[str, EntityMeta] | None = None, seed: int | None = None
) -> list[str]:
    insts = _labelled(dev)
    if not insts:
        return list(model.schema.features)
    X = _rows(model.schema, [model.features(i, registry) for i in insts])
    order, _ = permutation_importance(model.classifier, model.schema, X, [i.gold_form for i in insts],
                                      model.seed if seed is None else seed)
    return order


def train(
    training: Iterable[Document],
    schema: FeatureSchema | str,
    classifier: str = "gbdt",
    seed: int = 0,
    registry: Mapping[str, EntityMeta] | None = None,
    dev: Iterable[Document] | None = None,
    params: Mapping | None = None,
) -> FormModel:
    """Fit bins, classifier, importance order and variant index.

    Importance is measured on ``dev`` when it has labelled slots, otherwise on
    the training data.
    """
    schema = SCHEMAS[schema] if isinstance(schema, str) else schema
    docs = list(training)
    insts = _labelled(docs)
    if not insts:
        raise ValueError("empty training data")
    binners = fit_bins(docs, schema)
    vectors = [extract(i, schema, binners, registry) for i in insts]
    X = _rows(schema, vectors)
    y = [i.gold_form for i in insts]
    clf = make_classifier(classifier, seed, params).fit(X, y)
    model = FormModel(schema, binners, clf, tuple(schema.features), VariantIndex(tuple(schema.features)), seed)
    dev_docs = list(dev) if dev is not None else []
    if dev_docs and _labelled(dev_docs):
        importance = feature_importance(model, dev_docs, registry)
    else:
        importance, _ = permutation_importance(clf, schema, X, y, seed)
    model.feature_importance = tuple(importance)
    model.index = build_variant_index(insts, vectors, model.feature_importance)
    return model


def build_variant_index(instances: Sequence[Instance], vectors: Sequence[Mapping[str, str]], importance: Sequence[str]) -> VariantIndex:
    idx = VariantIndex(tuple(importance))
    for inst, vec in zip(instances, vectors):
        if inst.gold_form is not None:
            idx.add(inst.entity_tag, inst.gold_form, vec, inst.gold_re_tokens)
    return idx


def select_content(
    model: FormModel,
    instance: Instance,
    form: str,
    features: Mapping[str, str],
    index: VariantIndex | None = None,
    table: PronounTable | None = None,
) -> RealizedRE:
    index = index if index is not None else model.index
    text, _ = index.lookup(instance.entity_tag, form, features)
    if text is not None:
        return RealizedRE(tuple(text.split(" ")), form)
    if form == "pronoun":
        out = realize_pronoun(instance.entity_tag, instance.grammatical_role, table or PronounTable(), instance.slot.case)
        return capitalize_initial(out) if instance.sentence_initial else out
    return RealizedRE(realize_proper_name(instance.entity_tag).tokens, form)


def generate(
    model: FormModel, instances: Sequence[Instance], table: PronounTable, registry: Mapping[str, EntityMeta] | None = None
) -> list[tuple[str, RealizedRE]]:
    vectors = [model.features(i, registry) for i in instances]
    forms = predict_forms(model, vectors)
    return [(f, select_content(model, i, f, v, table=table)) for i, f, v in zip(instances, forms, vectors)]
