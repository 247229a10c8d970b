import math
import random
from functools import lru_cache

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import synthetic_document
from regkit.corpus import Document, SlotAnnotation
from regkit.metrics import (
    Counts,
    EvalReport,
    corpus_bleu,
    evaluate,
    normalize,
    pronominalization_prf,
    re_accuracy,
    render_table,
    sed,
    sentence_accuracy,
    text_accuracy,
)


def slow_edit(a, b):
    @lru_cache(maxsize=None)
    def d(i, j):
        if i == 0 or j == 0:
            return i + j
        return min(d(i - 1, j) + 1, d(i, j - 1) + 1, d(i - 1, j - 1) + (a[i - 1] != b[j - 1]))

    return d(len(a), len(b))


def test_normalize_and_accuracy():
    assert normalize(["The", "School"]) == "the school"
    assert normalize("  a\tB ") == "a b"
    assert re_accuracy([["The", "school"], ["it"]], [["the", "school"], ["he"]]) == 0.5
    with pytest.raises(ValueError):
        re_accuracy([["a"]], [])


def test_sed_examples():
    assert sed("kitten", "sitting") == 3
    assert sed(["The", "school"], ["the", "school"]) == 0
    assert sed(["the", "big", "school"], ["the", "school"], level="token") == 1
    with pytest.raises(ValueError):
        sed("a", "b", level="word")


words = st.text(alphabet="abc", max_size=8)


@given(words, words)
def test_sed_matches_recursive_oracle(a, b):
    assert sed(a, b) == slow_edit(a, b)


@given(words, words, words)
def test_sed_metric_axioms(a, b, c):
    assert sed(a, b) == sed(b, a)
    assert (sed(a, b) == 0) == (a == b)
    assert sed(a, c) <= sed(a, b) + sed(b, c)
    assert abs(len(a) - len(b)) <= sed(a, b) <= max(len(a), len(b))


CANDS = ["the cat sat on the mat", "he ran to the park today"]
REFS = ["the cat is on the mat", "he ran to the park"]


def test_bleu_hand_computed():
    # p1 = 10/12, p2 = 7/10, p3 = 4/8, p4 = 2/6; c = 12 > r = 11 so no brevity penalty
    expected = 100 * math.exp((math.log(10 / 12) + math.log(7 / 10) + math.log(4 / 8) + math.log(2 / 6)) / 4)
    assert corpus_bleu(CANDS, REFS) == pytest.approx(expected, abs=1e-9)
    assert round(corpus_bleu(CANDS, REFS), 4) == 55.8395


def test_bleu_identity_and_edge_cases():
    assert corpus_bleu(REFS, REFS) == 100.0
    assert corpus_bleu(["The Cat"], ["the cat"], smooth=True) == 100.0
    assert corpus_bleu(["The Cat"], ["the cat"], smooth=True, lowercase=False) < 100.0
    assert corpus_bleu(["a b"], ["a b"]) == 0.0  # no 3/4-grams without smoothing
    # brevity: candidate "a b c d" against "a b c d e f": bp = exp(1 - 6/4)
    assert corpus_bleu(["a b c d"], ["a b c d e f"]) == pytest.approx(100 * math.exp(1 - 6 / 4))
    with pytest.raises(ValueError):
        corpus_bleu([], [])
    with pytest.raises(ValueError):
        corpus_bleu(["a"], [])


def test_grouped_accuracies():
    assert text_accuracy([[True, True], [True, False], []]) == 0.5
    assert sentence_accuracy([[True], [False], [True], []]) == pytest.approx(2 / 3)
    assert text_accuracy([]) == 0.0


def test_pronominalization_prf():
    p, r, f = pronominalization_prf([True, True, False, False], [True, False, True, False])
    assert (p, r, f) == (0.5, 0.5, 0.5)
    assert pronominalization_prf([False], [False]) == (0.0, 0.0, 0.0)


def _doc(doc_id="d", domain=None):
    sents = (("Ann", "met", "Bob", "."), ("Ann", "left", "."), ("rain", "."))
    slots = (SlotAnnotation(0, 0, "Ann", ("Ann",), "a", "proper_name"),
             SlotAnnotation(0, 2, "Bob", ("Bob",), "b", "proper_name"),
             SlotAnnotation(1, 0, "Ann", ("She",), "a", "pronoun"))
    return Document(doc_id, sents, slots, "test", domain)


def test_evaluate_small_document():
    doc = _doc()
    preds = {("d", 0): (("ann",), None), ("d", 1): (("Bobby",), None), ("d", 2): (("she",), None)}
    rep = evaluate([doc], preds)
    s = rep.scores()
    assert s["re_accuracy"] == pytest.approx(2 / 3)
    assert s["sed_mean"] == pytest.approx(2 / 3)
    assert s["text_accuracy"] == 0.0
    assert s["sentence_accuracy"] == 0.5  # the slotless sentence is skipped
    assert (s["pronom_precision"], s["pronom_recall"]) == (1.0, 1.0)
    assert [d.correct for d in rep.diagnostics] == [True, False, True]


def test_evaluate_rule_forms_and_mismatch():
    doc = _doc()
    preds = {("d", 0): (("Ann",), "pronominal"), ("d", 1): (("Bob",), "non_pronominal"),
             ("d", 2): (("Ann",), "non_pronominal")}
    s = evaluate([doc], preds).scores()
    assert (s["pronom_precision"], s["pronom_recall"]) == (0.0, 0.0)
    with pytest.raises(ValueError):
        evaluate([doc], {("d", 0): (("Ann",), None)})


def test_report_roundtrip():
    rep = evaluate([_doc(domain="seen")], {("d", i): (("x",), None) for i in range(3)}, bleu_smooth=True)
    back = EvalReport.from_dict(rep.to_dict(diagnostics=True))
    assert back.scores() == rep.scores() and back.domain_scores() == rep.domain_scores()
    assert back.diagnostics == rep.diagnostics


@given(st.integers(0, 10_000))
def test_domain_counts_add_up(seed):
    rng = random.Random(seed)
    docs = [synthetic_document(rng, f"d{i}", "test", rng.choice(["seen", "unseen", "other"])) for i in range(8)]
    preds = {}
    for d in docs:
        for i, s in enumerate(d.slots):
            preds[(d.doc_id, i)] = (rng.choice([s.gold_re_tokens, ("it",), ("The", "x")]), None)
    rep = evaluate(docs, preds)
    total = sum(rep.by_domain.values(), Counts())
    assert total == rep.counts


def test_render_table_columns():
    rep = evaluate([_doc(domain="seen"), _doc("e", "unseen")],
                   {(k, i): (("Ann",), None) for k in "de" for i in range(3)})
    flat = render_table([("sys", rep)])
    assert flat.splitlines()[0].split() == ["Model", "RE", "Acc", "SED", "BLEU", "Text", "Acc", "Precision", "Recall", "F1"]
    split = render_table([("sys", rep)], split=True, text_level="sentence")
    assert "33.33/33.33" in split
    assert "cells: seen/unseen" in split
