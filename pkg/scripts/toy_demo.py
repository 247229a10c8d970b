"""Self-contained demo: write a small annotated corpus, delexicalize it and
run all systems. Useful as a smoke test of an installation.

    python scripts/toy_demo.py runs/toy
"""
import json
import random
import sys
from pathlib import Path

from regkit.cli import main as regkit
from regkit.config import ExperimentConfig

from run_experiment import run

PEOPLE = {"John Smith": ("he", "him"), "Mary Jones": ("she", "her"), "Ann Lee": ("she", "her")}
PLACES = ["Paris", "Acme Corp", "the Nile"]
VERBS = ["met", "visited", "called", "left"]


def document(rng, i, split):
    sents, chains = [], {}
    mentioned = set()
    for si in range(rng.randint(2, 5)):
        who = rng.choice(sorted(PEOPLE))
        what = rng.choice(PLACES + sorted(PEOPLE))
        if what == who:
            what = "Paris"
        toks = []
        for ent, role in ((who, "subject"), (what, "object")):
            if ent in mentioned and ent in PEOPLE and rng.random() < 0.6:
                words, form = [PEOPLE[ent][role == "object"]], "pronoun"
            elif ent in mentioned and rng.random() < 0.3:
                words, form = ["the", "person" if ent in PEOPLE else "place"], "description"
            else:
                words, form = ent.split(), "proper_name"
            start = len(toks)
            toks += words
            chains.setdefault(ent, []).append({"sent": si, "start": start, "end": len(toks), "form": form,
                                               "gram_role": role})
            mentioned.add(ent)
            if role == "subject":
                toks.append(rng.choice(VERBS))
        sents.append(toks + ["."])
    return {"doc_id": f"toy{i:03d}", "split": split, "domain_label": "seen" if i % 3 else "unseen",
            "sentences": sents,
            "chains": [{"chain_id": e, "entity_type": "PERSON" if e in PEOPLE else "PLACE", "mentions": m}
                       for e, m in chains.items()]}


if __name__ == "__main__":
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "runs/toy")
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(0)
    splits = ["train"] * 6 + ["dev", "dev", "test", "test"]
    with open(out / "annotated.jsonl", "w") as fh:
        for i in range(200):
            fh.write(json.dumps(document(rng, i, splits[i % len(splits)])) + "\n")
    rc = regkit(["build-corpus", "--input", str(out / "annotated.jsonl"), "--k", "2",
                 "--registry-out", str(out / "registry.json"), "--output", str(out / "corpus.jsonl")])
    if rc:
        sys.exit(rc)
    print(run(ExperimentConfig(corpus=str(out / "corpus.jsonl"), registry=str(out / "registry.json"),
                               out_dir=str(out), seed=1)))
