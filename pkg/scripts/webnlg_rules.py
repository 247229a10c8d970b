"""WebNLG v1.5: convert the XML tree and score all four systems.

Expects ROOT/train, ROOT/dev and ROOT/test directories of XML files. Test
documents whose category never occurs in training are labelled "unseen".

    python scripts/webnlg_rules.py /data/webnlg/v1.5/en runs/webnlg
"""
import sys
import time
from pathlib import Path

from regkit.config import ExperimentConfig
from regkit.corpus import dump_corpus
from regkit.webnlg import category, label_seen_unseen, read_webnlg

from run_experiment import run


def build(root: Path, out: Path) -> Path:
    docs = {s: list(read_webnlg([root / s], s)) for s in ("train", "dev", "test")}
    seen = {category(d) for d in docs["train"]}
    docs["test"] = label_seen_unseen(docs["test"], seen)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "webnlg.jsonl"
    with open(path, "w", encoding="utf-8") as fh:
        dump_corpus(docs["train"] + docs["dev"] + docs["test"], fh)
    print({s: len(d) for s, d in docs.items()}, file=sys.stderr)
    return path


if __name__ == "__main__":
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    t0 = time.time()
    out = Path(sys.argv[2])
    corpus = build(Path(sys.argv[1]), out)
    print(run(ExperimentConfig(corpus=str(corpus), out_dir=str(out))))
    print(f"{time.time() - t0:.1f}s", file=sys.stderr)
