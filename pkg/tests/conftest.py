import json
import random

import pytest

from regkit.corpus import Document, EntityMeta, Registry, SlotAnnotation, parse_corpus
from regkit.delex import AnnotatedDocument, CoreferenceChain, Mention


# -- acceptance summary: one line per criterion ------------------------------

_CRITERIA: dict[int, list[str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _CRITERIA.setdefault(mark.args[0], []).append(rep.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        outs = _CRITERIA[n]
        if "failed" in outs:
            verdict = "FAIL"
        elif all(o == "skipped" for o in outs):
            verdict = "SKIP"
        else:
            verdict = "PASS" + (" (partly skipped)" if "skipped" in outs else "")
        terminalreporter.write_line(f"criterion {n}: {verdict}")


# -- WebNLG college example ------------------------------------------------

COLLEGE_SENTENCES = [
    'AWH_Engineering_College is in "Kuttikkattoor" , India in the state of Kerala .',
    "AWH_Engineering_College has 250 employees and Kerala is ruled by Kochi .",
    "The Ganges River is also found in India .",
]
# (sent, tok, gold RE, form, role)
COLLEGE_SLOTS = [
    (0, 0, "AWH Engineering College", "proper_name", "subject"),
    (0, 3, "Kuttikkattoor", "proper_name", "object"),
    (0, 5, "India", "proper_name", "object"),
    (0, 10, "Kerala", "proper_name", "object"),
    (1, 0, "The school", "description", "subject"),
    (1, 5, "Kerala", "proper_name", "subject"),
    (1, 9, "Kochi", "proper_name", "object"),
    (2, 1, "Ganges", "proper_name", "other"),
    (2, 7, "India", "proper_name", "object"),
]
COLLEGE_TEXT = (
    "AWH Engineering College is in Kuttikkattoor, India in the state of Kerala. "
    "The school has 250 employees and Kerala is ruled by Kochi. The Ganges River is also found in India."
)
COLLEGE_REGISTRY = {
    "AWH_Engineering_College": {"type": "University", "gender": "neuter", "plurality": "singular"},
    '"Kuttikkattoor"': {"type": "City", "gender": "neuter", "plurality": "singular"},
    "India": {"type": "Country", "gender": "neuter", "plurality": "singular"},
    "Kerala": {"type": "State", "gender": "neuter", "plurality": "singular"},
    "Kochi": {"type": "City", "gender": "neuter", "plurality": "singular"},
    "Ganges": {"type": "River", "gender": "neuter", "plurality": "singular"},
}


def college_record(split="test", domain="seen"):
    sents = [s.split() for s in COLLEGE_SENTENCES]
    slots = []
    for si, ti, gold, form, role in COLLEGE_SLOTS:
        tag = sents[si][ti]
        slots.append({"sent": si, "tok": ti, "entity_tag": tag, "gold_re": gold.split(),
                      "gold_form": form, "gram_role": role, "chain_id": tag})
    return {"doc_id": "webnlg-college", "split": split, "domain_label": domain, "sentences": sents, "slots": slots}


@pytest.fixture
def college_doc():
    return parse_corpus(json.dumps(college_record()) + "\n").split("test")[0]


@pytest.fixture
def college_jsonl():
    return json.dumps(college_record()) + "\n"


# -- WSJ Koenig example ---------------------------------------------------

KOENIG_SENTENCES = [
    "Ronald B. Koenig , 55 years old , was named a senior managing director of the Gruntal & Co. brokerage "
    "subsidiary of this insurance and financial - services firm .",
    "Mr. Koenig will build the corporate - finance and investment - banking business of Gruntal , which has "
    "primarily been a retail - based firm .",
    "He was chairman and co-chief executive officer of Ladenburg , Thalmann & Co. until July , when he was named "
    "co-chairman of the investment-banking firm along with Howard L. Blum Jr. , who then became the sole chief "
    "executive .",
    "Yesterday , Mr. Blum , 41 , said he was n't aware of plans at Ladenburg to name a co-chairman to succeed "
    "Mr. Koenig and said the board would need to approve any appointments or title changes .",
]

_POS = {
    "Ronald": "NNP", "B.": "NNP", "Koenig": "NNP", "Mr.": "NNP", "Gruntal": "NNP", "Co.": "NNP",
    "Ladenburg": "NNP", "Thalmann": "NNP", "Howard": "NNP", "L.": "NNP", "Blum": "NNP", "Jr.": "NNP",
    "He": "PRP", "he": "PRP", ",": ",", "&": "CC", "55": "CD", "41": "CD", "years": "NNS", "old": "JJ",
    "which": "WDT", "who": "WP", "the": "DT", "a": "DT", "investment-banking": "JJ", "firm": "NN",
}

# chain -> list of (sentence, first token text, occurrence, length)
KOENIG_CHAINS = {
    "koenig": ("PERSON", [(0, "Ronald", 0, 8), (1, "Mr.", 0, 2), (2, "He", 0, 1), (2, "he", 0, 1), (3, "Mr.", 1, 2)]),
    "gruntal": ("ORG", [(0, "Gruntal", 0, 3), (1, "Gruntal", 0, 11)]),
    "ladenburg": ("ORG", [(2, "Ladenburg", 0, 5), (2, "the", 0, 3), (3, "Ladenburg", 0, 1)]),
    "blum": ("PERSON", [(2, "Howard", 0, 12), (3, "Mr.", 0, 5), (3, "he", 0, 1)]),
}

KOENIG_PRE = (
    "Mr._Koenig was named a senior managing director of the Gruntal brokerage subsidiary of this insurance "
    "and financial-services firm ."
)
KOENIG_POST = (
    "will build the corporate-finance and investment-banking business of Gruntal. Mr._Koenig was chairman and "
    "co-chief executive officer of Ladenburg until July , when Mr._Koenig was named co-chairman of Ladenburg "
    "along with Mr._Blum. Yesterday, Mr._Blum said Mr._Blum was n't aware of plans at Ladenburg to name a "
    "co-chairman to succeed Mr._Koenig and said the board would need to approve any appointments or title changes."
)


def _find(tokens, word, occurrence):
    hits = [i for i, t in enumerate(tokens) if t == word]
    return hits[occurrence]


def koenig_annotated():
    sents = [tuple(s.split()) for s in KOENIG_SENTENCES]
    chains = []
    for cid, (etype, specs) in KOENIG_CHAINS.items():
        mentions = []
        for si, word, occ, n in specs:
            start = _find(sents[si], word, occ)
            toks = sents[si][start : start + n]
            mentions.append(Mention(si, start, start + n, toks, pos_tags=tuple(_POS.get(t, "XX") for t in toks),
                                    entity_type=etype))
        chains.append(CoreferenceChain(cid, tuple(mentions), etype))
    return AnnotatedDocument("wsj-koenig", tuple(sents), tuple(chains))


def koenig_record():
    doc = koenig_annotated()
    return {
        "doc_id": doc.doc_id,
        "split": "train",
        "sentences": [list(s) for s in doc.sentences],
        "chains": [
            {"chain_id": c.chain_id, "entity_type": c.entity_type,
             "mentions": [{"sent": m.sent, "start": m.start, "end": m.end, "pos": list(m.pos_tags)} for m in c.mentions]}
            for c in doc.chains
        ],
    }


def despace(text):
    """Spacing-insensitive form: no spaces around hyphens or before . and ,"""
    import re

    text = re.sub(r"\s*-\s*", "-", text)
    return re.sub(r"\s+([.,])", r"\1", text)


# -- synthetic corpora --------------------------------------------------------

PEOPLE = {"John_Smith": "male", "Mary_Jones": "female", "Ann_Lee": "female", "Bob_Stone": "male"}
THINGS = ["Acme_Corp", "Paris", "Nile", "Boeing"]
FILLER = "said that went to the over and then was also near".split()


def synthetic_registry():
    reg = Registry()
    for tag, g in PEOPLE.items():
        reg[tag] = EntityMeta(tag, "PERSON", g, "singular")
    for tag in THINGS:
        reg[tag] = EntityMeta(tag, "ORG", "neuter", "singular")
    return reg


def synthetic_document(rng: random.Random, doc_id: str, split="train", domain=None, n_sent=None, entities=None,
                       paragraphs=False) -> Document:
    """Random delexicalized document with plausible gold REs and forms."""
    entities = entities or (list(PEOPLE) + THINGS)
    n_sent = n_sent or rng.randint(1, 6)
    pron = {"male": ("he", "him"), "female": ("she", "her"), "neuter": ("it", "it")}
    reg = synthetic_registry()
    sentences, slots, seen = [], [], set()
    for si in range(n_sent):
        toks = []
        for _ in range(rng.randint(1, 3)):
            tag = rng.choice(entities)
            role = rng.choice(["subject", "object", "other", None])
            toks.extend(rng.sample(FILLER, rng.randint(0, 3)))
            meta = reg.meta(tag)
            if tag not in seen:
                gold, form = tag.split("_"), "proper_name"
            else:
                r = rng.random()
                if r < 0.5:
                    p = pron.get(meta.gender, ("it", "it"))
                    gold, form = [p[1] if role == "object" else p[0]], "pronoun"
                elif r < 0.75:
                    gold, form = ["the", "entity" if meta.entity_type != "PERSON" else "person"], "description"
                else:
                    gold, form = tag.split("_")[-1:], "proper_name"
            seen.add(tag)
            slots.append(SlotAnnotation(si, len(toks), tag, tuple(gold), tag, form, role))
            toks.append(tag)
        toks.extend(rng.sample(FILLER, rng.randint(0, 2)) + ["."])
        sentences.append(tuple(toks))
    par = tuple(si // 2 for si in range(n_sent)) if paragraphs else None
    return Document(doc_id, tuple(sentences), tuple(slots), split, domain, par)


@pytest.fixture
def registry():
    return synthetic_registry()


def annotated_record(doc: Document, registry=None) -> dict:
    """Re-lexicalize a synthetic document into the annotated input format."""
    registry = registry or synthetic_registry()
    sentences, chains = [], {}
    by_pos = {s.position: s for s in doc.slots}
    for si, sent in enumerate(doc.sentences):
        out = []
        for ti, tok in enumerate(sent):
            slot = by_pos.get((si, ti))
            if slot is None:
                out.append(tok)
                continue
            start = len(out)
            out.extend(slot.gold_re_tokens)
            m = {"sent": si, "start": start, "end": len(out), "form": slot.gold_form}
            if slot.grammatical_role:
                m["gram_role"] = slot.grammatical_role
            chains.setdefault(slot.entity_tag, []).append(m)
        sentences.append(out)
    rec = {"doc_id": doc.doc_id, "split": doc.split, "sentences": sentences,
           "chains": [{"chain_id": tag, "entity_type": registry.meta(tag).entity_type, "mentions": ms}
                      for tag, ms in chains.items()]}
    if doc.domain_label is not None:
        rec["domain_label"] = doc.domain_label
    if doc.paragraphs is not None:
        rec["paragraphs"] = list(doc.paragraphs)
    return rec


def write_annotated_corpus(path, seed=0, n_docs=60, domains=("seen", "unseen")):
    rng = random.Random(seed)
    splits = ["train"] * 3 + ["dev", "test"]
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(n_docs):
            doc = synthetic_document(rng, f"doc{i:03d}", splits[i % len(splits)], domains[i % len(domains)])
            fh.write(json.dumps(annotated_record(doc)) + "\n")
    return path


def write_registry(path):
    from regkit.corpus import registry_to_dict

    with open(path, "w", encoding="utf-8") as fh:
        json.dump(registry_to_dict(synthetic_registry()), fh)
    return path
