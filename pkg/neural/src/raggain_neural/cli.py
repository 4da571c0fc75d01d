"""Command-line entry points for the neural signals.

Every subcommand reads and writes the exchange formats of the gain toolkit:
queries/corpus/generation-log JSONL, TREC runs, and qid/value TSV tables.
"""

from __future__ import annotations

import argparse
import sys

from . import formats, models
from .entail import DEFAULT_TOP_PASSAGES, entailment_predict
from .errors import NeuralError
from .genlog import DEFAULT_MAX_NEW_TOKENS, GenerationSettings, generate_log
from .quality import QUALITY_METRICS, quality_scores
from .rerank import DEFAULT_DEPTH, rerank_lists
from .supervised import (
    TrainSettings,
    build_examples,
    predict_supervised,
    train_supervised,
)


def _passages_for(run, corpus_texts, top):
    return {
        qid: [corpus_texts[doc_id] for doc_id, _ in entries[:top] if doc_id in corpus_texts]
        for qid, entries in run.items()
    }


def cmd_generate(args) -> int:
    tokenizer = models.load_tokenizer(args.model)
    model = models.load_causal_lm(args.model)
    questions = formats.read_queries(args.queries)
    modes = ("rag", "norag") if args.mode == "both" else (args.mode,)
    passages_for = None
    if "rag" in modes:
        if not args.run or not args.corpus:
            raise NeuralError("rag generation needs --run and --corpus")
        run = formats.read_run(args.run)
        corpus_texts = formats.read_corpus_texts(args.corpus)
        passages_for = _passages_for(run, corpus_texts, args.top_passages)
    settings = GenerationSettings(
        max_new_tokens=args.max_new_tokens, top_passages=args.top_passages
    )
    ok, failed = generate_log(
        model, tokenizer, questions, passages_for, modes, args.out, args.errors, settings
    )
    print(f"wrote {ok} records to {args.out}; {failed} failures listed in {args.errors}")
    return 0


def cmd_quality(args) -> int:
    tokenizer = models.load_tokenizer(args.model)
    model = models.load_encoder(args.model) if args.metric == "e5" else models.load_classifier(args.model)
    questions = formats.read_queries(args.queries)
    references = {q.qid: list(q.answers) for q in questions}
    log = formats.read_generation_log(args.generation_log)
    from pathlib import Path

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for mode in ("rag", "norag"):
        answers = {}
        for qid in references:
            if mode not in log.get(qid, {}):
                raise NeuralError(f"generation log lacks {mode!r} answer for qid {qid!r}")
            answers[qid] = log[qid][mode]["answer"]
        column = quality_scores(args.metric, model, tokenizer, answers, references)
        path = out_dir / f"{args.metric}.{mode}.tsv"
        formats.write_score_table(path, column)
        print(f"{args.metric}/{mode}: {len(column)} scores -> {path}")
    return 0


def cmd_rerank(args) -> int:
    tokenizer = models.load_tokenizer(args.model)
    model = models.load_classifier(args.model)
    run = formats.read_run(args.run)
    questions = {q.qid: q.question for q in formats.read_queries(args.queries)}
    corpus_texts = formats.read_corpus_texts(args.corpus)
    reranked = rerank_lists(model, tokenizer, run, questions, corpus_texts, depth=args.depth)
    formats.write_run(args.out, reranked, tag=args.tag)
    print(f"reranked {len(reranked)} lists (depth {args.depth}) -> {args.out}")
    return 0


def cmd_entail(args) -> int:
    tokenizer = models.load_tokenizer(args.model)
    model = models.load_classifier(args.model)
    questions = {q.qid: q.question for q in formats.read_queries(args.queries)}
    log = formats.read_generation_log(args.generation_log)
    rag_answers = {
        qid: modes["rag"]["answer"] for qid, modes in log.items() if "rag" in modes
    }
    run = formats.read_run(args.run)
    corpus_texts = formats.read_corpus_texts(args.corpus)
    column = entailment_predict(
        model, tokenizer, questions, rag_answers, run, corpus_texts,
        top_passages=args.top_passages,
    )
    formats.write_score_table(args.out, column)
    print(f"entailment predictor: {len(column)} scores -> {args.out}")
    return 0


def _examples_from_args(args, variant, queries_path, targets=None):
    questions = formats.read_queries(queries_path)
    run = formats.read_run(args.run)
    corpus_texts = formats.read_corpus_texts(args.corpus)
    log = formats.read_generation_log(args.generation_log) if variant == "gen" else None
    return build_examples(
        variant, questions, run, corpus_texts,
        generation_log=log, targets=targets, top_passages=args.top_passages,
    )


def cmd_train(args) -> int:
    targets = formats.read_score_table(args.gains)
    train_examples = _examples_from_args(args, args.variant, args.train_queries, targets)
    val_examples = _examples_from_args(args, args.variant, args.val_queries, targets)
    settings = TrainSettings(
        lr=args.lr, batch_size=args.batch_size, epochs=args.epochs,
        max_length=args.max_length, seed=args.seed,
    )
    result = train_supervised(
        args.variant, args.backbone, train_examples, val_examples, args.out, settings
    )
    formats.write_score_table(result.artifact_dir / "validation_scores.tsv",
                              result.validation_scores)
    print(f"trained {args.variant} regressor: best epoch {result.best_epoch}, "
          f"val MSE {result.val_mse_per_epoch[result.best_epoch]:.6f}, "
          f"{result.truncated_train + result.truncated_val} inputs passage-truncated")
    print(f"artifact -> {result.artifact_dir}")
    return 0


def cmd_predict(args) -> int:
    import json
    from pathlib import Path

    meta = json.loads((Path(args.artifact) / "meta.json").read_text(encoding="utf-8"))
    examples = _examples_from_args(args, meta["variant"], args.queries)
    column = predict_supervised(args.artifact, examples)
    formats.write_score_table(args.out, column)
    print(f"{meta['variant']} regressor: {len(column)} predictions -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="raggain-neural",
        description="Neural signal producers for retrieval-gain evaluation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate answers with per-token entropy logging")
    p.add_argument("--model", required=True, help="causal LM checkpoint (path or hub name)")
    p.add_argument("--queries", required=True)
    p.add_argument("--mode", choices=("both", "rag", "norag"), default="both")
    p.add_argument("--run", help="TREC run supplying passages for rag mode")
    p.add_argument("--corpus", help="corpus JSONL supplying passage texts")
    p.add_argument("--top-passages", type=int, default=5)
    p.add_argument("--max-new-tokens", type=int, default=DEFAULT_MAX_NEW_TOKENS)
    p.add_argument("--out", required=True)
    p.add_argument("--errors", required=True, help="sidecar JSONL for failed generations")

    p = sub.add_parser("quality", help="semantic quality tables for both generation modes")
    p.add_argument("--metric", choices=QUALITY_METRICS, required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--generation-log", required=True)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("rerank", help="rerank run prefixes into a reference run")
    p.add_argument("--model", default=models.DEFAULT_RERANKER)
    p.add_argument("--run", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    p.add_argument("--tag", default="reranked")
    p.add_argument("--out", required=True)

    p = sub.add_parser("entail", help="passage-entailment predictor column")
    p.add_argument("--model", default=models.DEFAULT_LONG_NLI)
    p.add_argument("--queries", required=True)
    p.add_argument("--generation-log", required=True)
    p.add_argument("--run", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--top-passages", type=int, default=DEFAULT_TOP_PASSAGES)
    p.add_argument("--out", required=True)

    p = sub.add_parser("train", help="train a supervised gain regressor")
    p.add_argument("--variant", choices=("post", "gen"), required=True)
    p.add_argument("--backbone", default=models.DEFAULT_BACKBONE)
    p.add_argument("--train-queries", required=True)
    p.add_argument("--val-queries", required=True)
    p.add_argument("--gains", required=True, help="gain label TSV with the regression targets")
    p.add_argument("--run", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--generation-log", help="needed for the gen variant")
    p.add_argument("--top-passages", type=int, default=5)
    p.add_argument("--lr", type=float, default=5e-5)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--epochs", type=int, default=2)
    p.add_argument("--max-length", type=int, default=8192)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="artifact directory")

    p = sub.add_parser("predict", help="score questions with a trained regressor")
    p.add_argument("--artifact", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--run", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--generation-log", help="needed for gen-variant artifacts")
    p.add_argument("--top-passages", type=int, default=5)
    p.add_argument("--out", required=True)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "generate": cmd_generate,
        "quality": cmd_quality,
        "rerank": cmd_rerank,
        "entail": cmd_entail,
        "train": cmd_train,
        "predict": cmd_predict,
    }
    try:
        return handlers[args.command](args)
    except NeuralError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
