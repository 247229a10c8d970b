"""Automatic evaluation: RE accuracy, string edit distance, corpus BLEU,
text/sentence accuracy and pronominalization precision/recall/F1.

Every score is derived from additive counts (:class:`Counts`), so per-domain
reports sum exactly to the overall one.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping, Sequence

from .corpus import Document, sentence_texts
from .pronouns import is_pronoun_string

MAX_N = 4


def normalize(re: Sequence[str] | str) -> str:
    """Lowercase, single-space-joined."""
    text = re if isinstance(re, str) else " ".join(re)
    return " ".join(text.lower().split())


def re_accuracy(predictions: Sequence, golds: Sequence) -> float:
    if len(predictions) != len(golds):
        raise ValueError(f"{len(predictions)} predictions for {len(golds)} golds")
    if not golds:
        return 0.0
    return sum(normalize(p) == normalize(g) for p, g in zip(predictions, golds)) / len(golds)


def levenshtein(a: Sequence, b: Sequence) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i]
        for j, y in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y)))
        prev = cur
    return prev[-1]


def sed(pred: Sequence[str] | str, gold: Sequence[str] | str, level: str = "char") -> int:
    """Levenshtein distance over normalized strings (``level`` char or token)."""
    p, g = normalize(pred), normalize(gold)
    if level == "char":
        return levenshtein(p, g)
    if level == "token":
        return levenshtein(p.split(), g.split())
    raise ValueError(f"unknown SED level {level!r}")


# -- BLEU --------------------------------------------------------------------


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu_stats(candidate: Sequence[str], reference: Sequence[str]) -> tuple[list[int], list[int], int, int]:
    """Clipped n-gram matches, candidate n-gram totals, and both lengths."""
    matches, totals = [], []
    for n in range(1, MAX_N + 1):
        c, r = _ngrams(candidate, n), _ngrams(reference, n)
        matches.append(sum(min(k, r[g]) for g, k in c.items()))
        totals.append(max(0, len(candidate) - n + 1))
    return matches, totals, len(candidate), len(reference)


def bleu_from_stats(matches: Sequence[int], totals: Sequence[int], cand_len: int, ref_len: int, smooth: bool = False) -> float:
    if cand_len == 0:
        return 0.0
    logs = 0.0
    for m, t in zip(matches, totals):
        if smooth:
            m, t = m + 1, t + 1
        if m == 0 or t == 0:
            return 0.0
        logs += math.log(m / t)
    bp = 1.0 if cand_len > ref_len else math.exp(1 - ref_len / cand_len)
    return 100.0 * bp * math.exp(logs / len(matches))


def _tok(text: str | Sequence[str], lowercase: bool) -> list[str]:
    toks = text.split() if isinstance(text, str) else list(text)
    return [t.lower() for t in toks] if lowercase else toks


def corpus_bleu(candidates: Sequence, references: Sequence, smooth: bool = False, lowercase: bool = True) -> float:
    """Corpus BLEU-4 on a 0-100 scale, one reference per candidate."""
    if len(candidates) != len(references):
        raise ValueError("candidate and reference counts differ")
    if not candidates:
        raise ValueError("empty corpus")
    matches, totals, c_len, r_len = [0] * MAX_N, [0] * MAX_N, 0, 0
    for c, r in zip(candidates, references):
        m, t, cl, rl = bleu_stats(_tok(c, lowercase), _tok(r, lowercase))
        matches = [a + b for a, b in zip(matches, m)]
        totals = [a + b for a, b in zip(totals, t)]
        c_len += cl
        r_len += rl
    return bleu_from_stats(matches, totals, c_len, r_len, smooth)


# -- grouped accuracies ------------------------------------------------------


def text_accuracy(correct_by_document: Sequence[Sequence[bool]]) -> float:
    """Share of documents (with at least one slot) whose slots are all correct."""
    groups = [g for g in correct_by_document if len(g)]
    return sum(all(g) for g in groups) / len(groups) if groups else 0.0


def sentence_accuracy(correct_by_sentence: Sequence[Sequence[bool]]) -> float:
    """Same as :func:`text_accuracy`, over sentences; slotless ones are skipped."""
    return text_accuracy(correct_by_sentence)


def prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def pronominalization_prf(predicted: Sequence[bool], gold: Sequence[bool]) -> tuple[float, float, float]:
    if len(predicted) != len(gold):
        raise ValueError("label lists differ in length")
    tp = sum(p and g for p, g in zip(predicted, gold))
    fp = sum(p and not g for p, g in zip(predicted, gold))
    fn = sum(g and not p for p, g in zip(predicted, gold))
    return prf(tp, fp, fn)


# -- report ------------------------------------------------------------------


@dataclass
class Counts:
    n_slots: int = 0
    n_correct: int = 0
    sed_sum: int = 0
    n_docs: int = 0
    n_docs_correct: int = 0
    n_sents: int = 0
    n_sents_correct: int = 0
    tp: int = 0
    fp: int = 0
    fn: int = 0
    bleu_matches: list[int] = field(default_factory=lambda: [0] * MAX_N)
    bleu_totals: list[int] = field(default_factory=lambda: [0] * MAX_N)
    cand_len: int = 0
    ref_len: int = 0

    def __add__(self, other: "Counts") -> "Counts":
        out = Counts()
        for k, v in asdict(self).items():
            w = getattr(other, k)
            setattr(out, k, [a + b for a, b in zip(v, w)] if isinstance(v, list) else v + w)
        return out

    def scores(self, smooth: bool = False) -> dict[str, float]:
        p, r, f = prf(self.tp, self.fp, self.fn)
        n = self.n_slots
        return {
            "re_accuracy": self.n_correct / n if n else 0.0,
            "sed_mean": self.sed_sum / n if n else 0.0,
            "bleu": bleu_from_stats(self.bleu_matches, self.bleu_totals, self.cand_len, self.ref_len, smooth),
            "text_accuracy": self.n_docs_correct / self.n_docs if self.n_docs else 0.0,
            "sentence_accuracy": self.n_sents_correct / self.n_sents if self.n_sents else 0.0,
            "pronom_precision": p,
            "pronom_recall": r,
            "pronom_f1": f,
        }


@dataclass
class SlotResult:
    doc_id: str
    slot_index: int
    prediction: str
    gold: str
    correct: bool
    sed: int
    pred_pronoun: bool
    gold_pronoun: bool


@dataclass
class EvalReport:
    counts: Counts
    by_domain: dict[str, Counts]
    options: dict
    diagnostics: list[SlotResult] = field(default_factory=list)

    def scores(self) -> dict[str, float]:
        return self.counts.scores(self.options.get("bleu_smooth", False))

    def domain_scores(self) -> dict[str, dict[str, float]]:
        smooth = self.options.get("bleu_smooth", False)
        return {k: c.scores(smooth) for k, c in sorted(self.by_domain.items())}

    def to_dict(self, diagnostics: bool = False) -> dict:
        out = {
            "options": self.options,
            "scores": self.scores(),
            "counts": asdict(self.counts),
            "by_domain": {k: {"scores": s, "counts": asdict(self.by_domain[k])} for k, s in self.domain_scores().items()},
        }
        if diagnostics:
            out["diagnostics"] = [asdict(d) for d in self.diagnostics]
        return out

    @classmethod
    def from_dict(cls, d: Mapping) -> "EvalReport":
        by = {k: Counts(**v["counts"]) for k, v in d.get("by_domain", {}).items()}
        diags = [SlotResult(**x) for x in d.get("diagnostics", [])]
        return cls(Counts(**d["counts"]), by, dict(d.get("options", {})), diags)


def _is_pronominal_prediction(tokens: Sequence[str], form: str | None) -> bool:
    if form == "pronominal":
        return True
    if form == "non_pronominal":
        return False
    return is_pronoun_string(tokens)


def document_counts(
    doc: Document,
    predicted: Sequence[Sequence[str]],
    forms: Sequence[str | None] | None = None,
    sed_level: str = "char",
    lowercase_bleu: bool = True,
) -> tuple[Counts, list[SlotResult]]:
    if len(predicted) != len(doc.slots):
        raise ValueError(f"{doc.doc_id}: {len(predicted)} predictions for {len(doc.slots)} slots")
    forms = forms if forms is not None else [None] * len(predicted)
    c = Counts()
    results = []
    by_sent: dict[int, list[bool]] = {}
    for i, (slot, pred) in enumerate(zip(doc.slots, predicted)):
        ok = normalize(pred) == normalize(slot.gold_re_tokens)
        d = sed(pred, slot.gold_re_tokens, sed_level)
        pp = _is_pronominal_prediction(pred, forms[i])
        gp = slot.gold_form == "pronoun" if slot.gold_form is not None else is_pronoun_string(slot.gold_re_tokens)
        c.n_slots += 1
        c.n_correct += ok
        c.sed_sum += d
        c.tp += pp and gp
        c.fp += pp and not gp
        c.fn += gp and not pp
        by_sent.setdefault(slot.sent, []).append(ok)
        results.append(SlotResult(doc.doc_id, i, " ".join(pred), " ".join(slot.gold_re_tokens), ok, d, pp, gp))
    if doc.slots:
        c.n_docs = 1
        c.n_docs_correct = int(all(r.correct for r in results))
    c.n_sents = len(by_sent)
    c.n_sents_correct = sum(all(v) for v in by_sent.values())
    cand = " ".join(sentence_texts(doc, predicted))
    ref = " ".join(sentence_texts(doc, [s.gold_re_tokens for s in doc.slots]))
    m, t, cl, rl = bleu_stats(_tok(cand, lowercase_bleu), _tok(ref, lowercase_bleu))
    c.bleu_matches, c.bleu_totals, c.cand_len, c.ref_len = m, t, cl, rl
    return c, results


def evaluate(
    docs: Iterable[Document],
    predictions: Mapping[tuple[str, int], tuple[Sequence[str], str | None]],
    sed_level: str = "char",
    bleu_smooth: bool = False,
    lowercase_bleu: bool = True,
) -> EvalReport:
    """Score predictions keyed by (doc_id, slot_index) against gold slots.

    Every slot must have exactly one prediction and vice versa.
    """
    docs = list(docs)
    expected = {(d.doc_id, i) for d in docs for i in range(len(d.slots))}
    missing = expected - predictions.keys()
    extra = predictions.keys() - expected
    if missing or extra:
        raise ValueError(f"prediction/slot mismatch: {len(missing)} missing, {len(extra)} unexpected "
                         f"(e.g. {sorted(missing or extra)[0]})")
    total = Counts()
    by_domain: dict[str, Counts] = {}
    diags: list[SlotResult] = []
    for d in docs:
        preds = [predictions[(d.doc_id, i)] for i in range(len(d.slots))]
        c, res = document_counts(d, [p[0] for p in preds], [p[1] for p in preds], sed_level, lowercase_bleu)
        total = total + c
        if d.domain_label is not None:
            by_domain[d.domain_label] = by_domain.get(d.domain_label, Counts()) + c
        diags.extend(res)
    options = {"sed_level": sed_level, "bleu_smooth": bleu_smooth, "lowercase_bleu": lowercase_bleu,
               "normalization": "lowercase, whitespace-joined tokens"}
    return EvalReport(total, by_domain, options, diags)


# -- table rendering ---------------------------------------------------------

COLUMNS = (
    ("RE Acc", "re_accuracy", True),
    ("SED", "sed_mean", False),
    ("BLEU", "bleu", False),
    ("Text Acc", "text_accuracy", True),
    ("Precision", "pronom_precision", True),
    ("Recall", "pronom_recall", True),
    ("F1", "pronom_f1", True),
)


def _cell(scores: Mapping[str, float], key: str, percent: bool) -> str:
    v = scores[key]
    return f"{100 * v:.2f}" if percent else f"{v:.2f}"


def render_table(rows: Sequence[tuple[str, EvalReport]], split: bool = False, text_level: str = "document") -> str:
    """Aligned text table; with ``split`` each cell reads ``a/b`` over domain labels."""
    text_key = "sentence_accuracy" if text_level == "sentence" else "text_accuracy"
    cols = [(h, text_key if k == "text_accuracy" else k, pct) for h, k, pct in COLUMNS]
    header = ["Model"] + [h for h, _, _ in cols]
    body = []
    labels: list[str] = []
    for name, rep in rows:
        if split:
            per = rep.domain_scores()
            labels = list(per)
            cells = ["/".join(_cell(per[l], k, p) for l in labels) for _, k, p in cols]
        else:
            s = rep.scores()
            cells = [_cell(s, k, p) for _, k, p in cols]
        body.append([name] + cells)
    widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]
    fmt = lambda r: "  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths)))
    lines = [fmt(header), "  ".join("-" * w for w in widths)] + [fmt(r) for r in body]
    if split and labels:
        lines.append(f"cells: {'/'.join(labels)}")
    if rows:
        o = rows[0][1].options
        lines.append(f"normalization: {o.get('normalization', 'lowercase')}; SED level: {o.get('sed_level', 'char')}")
    return "\n".join(lines) + "\n"
