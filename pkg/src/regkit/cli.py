"""Command-line interface: build-corpus, train, generate, evaluate, report.

Exit codes: 0 success, 1 usage error, 2 data error.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from .corpus import SPLITS, CorpusError, Registry, dump_corpus, load_corpus, load_registry, registry_to_dict
from .metrics import EvalReport, evaluate, render_table

log = logging.getLogger("regkit")

EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _registry(args) -> Registry:
    return load_registry(args.registry) if getattr(args, "registry", None) else Registry()


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", encoding="utf-8")


def cmd_build_corpus(args) -> int:
    from .delex import build_corpus_documents, iter_annotated
    from .webnlg import read_webnlg

    registry = _registry(args)
    if args.format == "webnlg":
        docs = list(read_webnlg(args.input, args.split or "train", args.domain_label))
        if args.k is not None:
            docs = [dataclasses.replace(d, k=args.k) for d in docs]
        overlaps = []
    else:
        annotated = []
        for path in args.input:
            with open(path, "rb") as fh:
                try:
                    annotated.extend(iter_annotated(fh))
                except CorpusError as e:
                    raise CorpusError(f"{path}: {e}") from None
        docs, registry, overlaps = build_corpus_documents(annotated, registry, args.k, args.middle_initial)
    out = _open_out(args.output)
    try:
        dump_corpus(docs, out)
    finally:
        if out is not sys.stdout:
            out.close()
    if args.registry_out:
        with _open_out(args.registry_out) as fh:
            json.dump(registry_to_dict(registry), fh, indent=1, sort_keys=True, ensure_ascii=False)
            fh.write("\n")
    n_slots = sum(len(d.slots) for d in docs)
    log.info("wrote %d documents, %d slots (%d overlapping mentions dropped)", len(docs), n_slots, len(overlaps))
    return 0


def cmd_train(args) -> int:
    from .ml import train

    corpus = load_corpus(args.corpus, _registry(args))
    model = train(
        corpus.split("train"),
        args.schema,
        classifier=args.classifier,
        seed=args.seed,
        registry=corpus.registry,
        dev=corpus.split("dev") if args.importance_on == "dev" else None,
    )
    model.save(args.output)
    log.info("model written to %s; importance: %s", args.output, ", ".join(model.feature_importance))
    return 0


def cmd_generate(args) -> int:
    from .pipeline import pronoun_table_for, read_predictions, run_system, write_decisions, write_predictions

    corpus = load_corpus(args.corpus, _registry(args))
    docs = corpus.split(args.split)
    if args.system == "external":
        if not args.predictions:
            raise UsageError("--system external requires --predictions")
        with open(args.predictions, "rb") as fh:
            preds = read_predictions(fh)
        index = {(d.doc_id, i) for d in docs for i in range(len(d.slots))}
        unknown = [(p.doc_id, p.slot_index) for p in preds if (p.doc_id, p.slot_index) not in index]
        if unknown:
            raise CorpusError(f"prediction for unknown slot {unknown[0]}")
    else:
        model = None
        if args.system in ("ml-s", "ml-l"):
            if not args.model:
                raise UsageError(f"--system {args.system} requires --model")
            from .ml import FormModel

            model = FormModel.load(args.model)
        table = pronoun_table_for(corpus)
        preds = run_system(args.system, docs, table, model, corpus.registry, _k(args.k), args.jobs)
    out = _open_out(args.output)
    try:
        write_predictions(preds, out)
    finally:
        if out is not sys.stdout:
            out.close()
    if args.decisions_out and args.system in ("rreg-s", "rreg-l"):
        with _open_out(args.decisions_out) as fh:
            write_decisions(preds, fh)
    return 0


def _k(value):
    from .corpus import DOC_K

    return DOC_K if value is None else value


def cmd_evaluate(args) -> int:
    from .pipeline import as_mapping, read_predictions

    corpus = load_corpus(args.corpus)
    with open(args.predictions, "rb") as fh:
        preds = read_predictions(fh)
    report = evaluate(corpus.split(args.split), as_mapping(preds), args.sed_level, args.bleu_smooth)
    if args.output:
        with _open_out(args.output) as fh:
            json.dump(report.to_dict(args.diagnostics), fh, indent=1, sort_keys=True)
            fh.write("\n")
    name = args.name or Path(args.predictions).stem
    table = render_table([(name, report)], text_level=args.text_level)
    if report.by_domain:
        table += "\n" + render_table([(name, report)], split=True, text_level=args.text_level)
    if args.table:
        with _open_out(args.table) as fh:
            fh.write(table)
    if not args.output and not args.table:
        sys.stdout.write(table)
    return 0


def cmd_report(args) -> int:
    rows = []
    for spec in args.reports:
        name, _, path = spec.rpartition("=")
        with open(path, encoding="utf-8") as fh:
            rows.append((name or Path(path).stem, EvalReport.from_dict(json.load(fh))))
    text = render_table(rows, split=args.split_view, text_level=args.text_level)
    out = _open_out(args.output)
    try:
        out.write(text)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="regkit", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON file of option defaults; explicit flags win")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("build-corpus", help="delexicalize annotated documents into corpus JSONL")
    b.add_argument("--input", nargs="+", required=True)
    b.add_argument("--format", choices=("annotated", "webnlg"), default="annotated")
    b.add_argument("--registry")
    b.add_argument("--registry-out")
    b.add_argument("--k", type=int, help="context sentences each side; omit for whole-document context")
    b.add_argument("--split", choices=SPLITS, help="split for webnlg input")
    b.add_argument("--domain-label")
    b.add_argument("--middle-initial", action="store_true",
                   help="count 'First M. Last' as a firstname-lastname name")
    b.add_argument("--output", required=True)
    b.set_defaults(func=cmd_build_corpus)

    t = sub.add_parser("train", help="train an ML-S / ML-L form model")
    t.add_argument("--corpus", required=True)
    t.add_argument("--registry")
    t.add_argument("--schema", choices=("ml-s", "ml-l", "ml-l-wsj"), default="ml-l")
    t.add_argument("--classifier", choices=("gbdt", "nb"), default="gbdt")
    t.add_argument("--importance-on", choices=("dev", "train"), default="dev")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--output", required=True)
    t.set_defaults(func=cmd_train)

    g = sub.add_parser("generate", help="generate REs for one split")
    g.add_argument("--corpus", required=True)
    g.add_argument("--registry")
    g.add_argument("--split", choices=SPLITS, default="test")
    g.add_argument("--system", choices=("rreg-s", "rreg-l", "ml-s", "ml-l", "external"), required=True)
    g.add_argument("--model")
    g.add_argument("--predictions", help="input predictions for --system external")
    g.add_argument("--k", type=int, help="override the corpus context length")
    g.add_argument("--jobs", type=int, default=1)
    g.add_argument("--decisions-out")
    g.add_argument("--output", default="-")
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("evaluate", help="score predictions against the gold corpus")
    e.add_argument("--corpus", required=True)
    e.add_argument("--split", choices=SPLITS, default="test")
    e.add_argument("--predictions", required=True)
    e.add_argument("--sed-level", choices=("char", "token"), default="char")
    e.add_argument("--bleu-smooth", action="store_true")
    e.add_argument("--text-level", choices=("document", "sentence"), default="document")
    e.add_argument("--diagnostics", action="store_true", help="include per-slot results in the JSON report")
    e.add_argument("--name")
    e.add_argument("--output")
    e.add_argument("--table")
    e.set_defaults(func=cmd_evaluate)

    r = sub.add_parser("report", help="render saved JSON reports as one table")
    r.add_argument("reports", nargs="+", metavar="NAME=REPORT.json")
    r.add_argument("--split-view", action="store_true", help="a/b cells over domain labels")
    r.add_argument("--text-level", choices=("document", "sentence"), default="document")
    r.add_argument("--output", default="-")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    if known.config:
        try:
            with open(known.config, encoding="utf-8") as fh:
                cfg = {k.replace("-", "_"): v for k, v in json.load(fh).items()}
        except (OSError, json.JSONDecodeError, AttributeError) as e:
            print(f"regkit: cannot read config: {e}", file=sys.stderr)
            return EXIT_USAGE
        command = next((a for a in rest if not a.startswith("-")), None)
        sub = parser._subparsers._group_actions[0].choices.get(command)
        if sub is not None:
            for action in sub._actions:
                if action.dest in cfg:
                    action.required = False
            sub.set_defaults(**cfg)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as e:
        print(f"regkit: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (CorpusError, ValueError, KeyError, OSError) as e:
        print(f"regkit: data error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
