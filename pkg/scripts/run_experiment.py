"""Run every configured system on one corpus and print the comparison table.

    python scripts/run_experiment.py --config runs/webnlg.json
    python scripts/run_experiment.py --corpus corpus.jsonl --out-dir runs/x
"""
import argparse
import dataclasses
import json
import sys
from pathlib import Path

from regkit.cli import main as regkit
from regkit.config import ExperimentConfig


def run(cfg: ExperimentConfig) -> str:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(json.dumps(dataclasses.asdict(cfg), indent=1, sort_keys=True) + "\n")
    common = ["--corpus", cfg.corpus] + (["--registry", cfg.registry] if cfg.registry else [])
    reports = []
    for system in cfg.systems:
        gen = ["generate", *common, "--system", system, "--split", cfg.split, "--jobs", str(cfg.jobs),
               "--output", str(out / f"{system}.pred.jsonl")]
        if cfg.k is not None:
            gen += ["--k", str(cfg.k)]
        if system.startswith("ml"):
            model = out / f"{system}.model.json"
            rc = regkit(["train", *common, "--schema", cfg.schema_for(system), "--classifier", cfg.classifier,
                         "--seed", str(cfg.seed), "--output", str(model)])
            if rc:
                sys.exit(rc)
            gen += ["--model", str(model)]
        else:
            gen += ["--decisions-out", str(out / f"{system}.decisions.jsonl")]
        if regkit(gen):
            sys.exit(1)
        ev = ["evaluate", "--corpus", cfg.corpus, "--split", cfg.split, "--predictions", str(out / f"{system}.pred.jsonl"),
              "--sed-level", cfg.sed_level, "--output", str(out / f"{system}.report.json"), "--table", str(out / f"{system}.txt")]
        if cfg.bleu_smooth:
            ev.append("--bleu-smooth")
        if regkit(ev):
            sys.exit(1)
        reports.append(f"{system.upper()}={out / f'{system}.report.json'}")
    regkit(["report", *reports, "--output", str(out / "table.txt")])
    regkit(["report", *reports, "--split-view", "--output", str(out / "table_split.txt")])
    return (out / "table.txt").read_text() + "\n" + (out / "table_split.txt").read_text()


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config")
    ap.add_argument("--corpus")
    ap.add_argument("--out-dir", default="runs/experiment")
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    if a.config:
        cfg = ExperimentConfig.from_json(a.config)
    elif a.corpus:
        cfg = ExperimentConfig(corpus=a.corpus, out_dir=a.out_dir, seed=a.seed)
    else:
        ap.error("give --config or --corpus")
    print(run(cfg))
