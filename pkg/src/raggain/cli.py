"""Command-line interface.

Subcommands mirror the experiment stages: ``index`` and ``retrieve`` build the
lexical side, ``split`` partitions a question file, ``predict`` / ``gain`` run
individual stages, ``evaluate`` runs the full experiment, ``report`` re-renders
the evaluation from written tables, and ``tune`` sweeps a predictor's
hyper-parameter grid. Config-driven commands accept ``--config`` plus any
number of ``--<key> <value>`` overrides, one flag per config key.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import io as tio
from .errors import RagGainError
from .evaluation import DEFAULT_ALPHA, evaluate
from .index import DEFAULT_B, DEFAULT_K1, Index, bm25_search, build_index, tokenize
from .pipeline import (
    ExperimentConfig,
    _predictor_names,
    _resolve_groups,
    compute_gains,
    compute_predictor,
    default_grid,
    load_experiment,
    run_experiment,
    split_questions,
    tune,
)
from .predictors.post import RankedList


def _parse_overrides(extras: list[str], config: ExperimentConfig) -> None:
    i = 0
    while i < len(extras):
        arg = extras[i]
        if not arg.startswith("--"):
            raise RagGainError(f"unexpected argument {arg!r}; overrides look like --key value")
        key = arg[2:]
        if "=" in key:
            key, _, value = key.partition("=")
            i += 1
        else:
            if i + 1 >= len(extras):
                raise RagGainError(f"override --{key} is missing a value")
            value = extras[i + 1]
            i += 2
        config.override(key, value)


def _load_config(args: argparse.Namespace, extras: list[str]) -> ExperimentConfig:
    config = (
        ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    )
    if args.out:
        config.override("out", args.out)
    if args.seed is not None:
        config.override("seed", str(args.seed))
    _parse_overrides(extras, config)
    return config


def _add_config_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="experiment config file (key = value lines)")
    parser.add_argument("--out", help="output directory (overrides the config key)")
    parser.add_argument("--seed", type=int, help="random seed (overrides the config key)")


def cmd_index(args: argparse.Namespace) -> int:
    index = build_index(tio.read_corpus(args.corpus))
    index.save(args.out)
    print(f"indexed {index.n_docs} passages, {index.total_tokens} tokens -> {args.out}")
    return 0


def cmd_retrieve(args: argparse.Namespace) -> int:
    if args.index:
        index = Index.load(args.index)
    elif args.corpus:
        index = build_index(tio.read_corpus(args.corpus))
    else:
        raise RagGainError("retrieve needs --index or --corpus")
    queries = tio.read_queries(args.queries)
    lists: dict[str, RankedList] = {}
    empty: list[str] = []
    for record in queries:
        tokens = tokenize(record.question)
        if not tokens:
            raise RagGainError(f"qid {record.qid}: question is empty after tokenization")
        hits = bm25_search(index, tokens, args.k, k1=args.k1, b=args.b)
        if not hits:
            empty.append(record.qid)
            continue
        lists[record.qid] = RankedList(qid=record.qid, entries=hits)
    if empty:
        raise RagGainError(f"no passages matched for qids: {empty}")
    tio.write_run_file(args.out, lists, tag=args.tag)
    print(f"wrote {sum(len(v) for v in lists.values())} result lines for "
          f"{len(lists)} queries -> {args.out}")
    return 0


def cmd_split(args: argparse.Namespace) -> int:
    queries = tio.read_queries(args.queries)
    parts = split_questions(queries, args.train, args.val, args.test, args.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    import json

    for name, part in zip(("train", "val", "test"), parts):
        path = out_dir / f"{name}.jsonl"
        with open(path, "w", encoding="utf-8") as handle:
            for record in part:
                handle.write(json.dumps(
                    {"qid": record.qid, "question": record.question,
                     "answers": list(record.answers)},
                    sort_keys=True,
                ) + "\n")
        print(f"{name}: {len(part)} questions -> {path}")
    return 0


def cmd_predict(args: argparse.Namespace, extras: list[str]) -> int:
    config = _load_config(args, extras)
    out_dir = Path(config.require("out")) / "predictors"
    out_dir.mkdir(parents=True, exist_ok=True)
    data = load_experiment(config)
    for name in _predictor_names(config):
        column = compute_predictor(data, name)
        tio.write_score_table(out_dir / f"{name}.tsv", column)
        print(f"predictor {name}: {len(column)} questions -> {out_dir / (name + '.tsv')}")
    return 0


def cmd_gain(args: argparse.Namespace, extras: list[str]) -> int:
    from .gain import gain_distribution

    config = _load_config(args, extras)
    out_base = Path(config.require("out"))
    (out_base / "gains").mkdir(parents=True, exist_ok=True)
    (out_base / "hist").mkdir(parents=True, exist_ok=True)
    data = load_experiment(config)
    bins = config.get_int("bins", 10)
    for metric in config.get_list("quality_metrics"):
        gains = compute_gains(data, metric)
        tio.write_score_table(out_base / "gains" / f"{metric}.tsv", gains, value_header="gain")
        hist = gain_distribution([gains[q] for q in sorted(gains)], bins)
        (out_base / "hist" / f"{metric}.txt").write_text(hist.to_text(), encoding="utf-8")
        print(f"gain[{metric}]: mean {hist.mean:.4f}, "
              f"neg/zero/pos {hist.fraction_negative:.2f}/{hist.fraction_zero:.2f}/"
              f"{hist.fraction_positive:.2f}")
    return 0


def cmd_evaluate(args: argparse.Namespace, extras: list[str]) -> int:
    config = _load_config(args, extras)
    result = run_experiment(config)
    sys.stdout.write(result.report.to_text())
    print(f"artifacts written under {result.out_dir}")
    return 0


def cmd_report(args: argparse.Namespace, extras: list[str]) -> int:
    """Re-run the correlation evaluation from tables already on disk."""
    config = _load_config(args, extras)
    out_dir = Path(config.require("out"))
    names = _predictor_names(config)
    columns = {
        name: tio.read_score_table(out_dir / "predictors" / f"{name}.tsv") for name in names
    }
    groups = _resolve_groups(config, names)
    alpha = config.get_float("alpha", DEFAULT_ALPHA)
    report = None
    for metric in config.get_list("quality_metrics"):
        gains = tio.read_score_table(out_dir / "gains" / f"{metric}.tsv")
        common = set(gains)
        for column in columns.values():
            common &= set(column)
        dropped = len(set(gains)) - len(common)
        metric_report = evaluate(
            {n: {q: c[q] for q in common} for n, c in columns.items()},
            {q: gains[q] for q in common},
            groups,
            alpha=alpha,
            metric=metric,
            dropped_qids=dropped,
        )
        report = metric_report if report is None else (report.merge(metric_report) or report)
    sys.stdout.write(report.to_text())
    return 0


def cmd_tune(args: argparse.Namespace, extras: list[str]) -> int:
    config = _load_config(args, extras)
    data = load_experiment(config)
    gain_columns = {m: compute_gains(data, m) for m in config.get_list("quality_metrics")}
    grid = default_grid(args.predictor)

    def column_for(point: dict[str, str]):
        trial = ExperimentConfig(values=dict(config.values))
        for key, value in point.items():
            trial.override(key, value)
        trial_data = load_experiment(trial)
        return compute_predictor(trial_data, args.predictor)

    best, point, totals = tune(grid, column_for, gain_columns)
    print(f"grid points: {len(grid)}")
    for i, (candidate, total) in enumerate(zip(grid, totals)):
        marker = " <- selected" if i == best else ""
        desc = ", ".join(f"{k}={v}" for k, v in candidate.items())
        print(f"  [{i}] {desc}: total correlation {total:.6f}{marker}")
    out = config.get("out")
    if out:
        Path(out).mkdir(parents=True, exist_ok=True)
        lines = ["grid_index\tparams\ttotal_correlation"]
        for i, (candidate, total) in enumerate(zip(grid, totals)):
            desc = ",".join(f"{k}={v}" for k, v in candidate.items())
            lines.append(f"{i}\t{desc}\t{total:.9g}")
        lines.append(f"selected\t{','.join(f'{k}={v}' for k, v in point.items())}\t{totals[best]:.9g}")
        (Path(out) / f"tune_{args.predictor}.tsv").write_text("\n".join(lines) + "\n",
                                                              encoding="utf-8")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="raggain",
        description="Label question-answering runs with retrieval gain and evaluate predictors",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build a lexical index from a JSONL corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("retrieve", help="BM25 retrieval to a TREC run file")
    p.add_argument("--index")
    p.add_argument("--corpus")
    p.add_argument("--queries", required=True)
    p.add_argument("--k", type=int, default=100)
    p.add_argument("--k1", type=float, default=DEFAULT_K1)
    p.add_argument("--b", type=float, default=DEFAULT_B)
    p.add_argument("--tag", default="raggain")
    p.add_argument("--out", required=True)

    p = sub.add_parser("split", help="seeded train/validation/test split of a question file")
    p.add_argument("--queries", required=True)
    p.add_argument("--train", type=int, required=True)
    p.add_argument("--val", type=int, required=True)
    p.add_argument("--test", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    for name, help_text in (
        ("predict", "compute configured predictor score tables"),
        ("gain", "compute quality, gain labels, and gain histograms"),
        ("evaluate", "run the full experiment: predict, gain, correlate, report"),
        ("report", "re-render the evaluation from written score tables"),
        ("tune", "sweep a predictor's hyper-parameter grid on validation gains"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_config_args(p)
        if name == "tune":
            p.add_argument("--predictor", required=True)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args, extras = parser.parse_known_args(argv)
    try:
        if args.command == "index":
            return cmd_index(args)
        if args.command == "retrieve":
            return cmd_retrieve(args)
        if args.command == "split":
            return cmd_split(args)
        if args.command == "predict":
            return cmd_predict(args, extras)
        if args.command == "gain":
            return cmd_gain(args, extras)
        if args.command == "evaluate":
            return cmd_evaluate(args, extras)
        if args.command == "report":
            return cmd_report(args, extras)
        if args.command == "tune":
            return cmd_tune(args, extras)
        parser.error(f"unknown command {args.command!r}")
    except RagGainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
