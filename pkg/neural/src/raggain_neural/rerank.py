"""Cross-encoder reranking of retrieval runs into reference runs.

The top-``depth`` passages of each query's list are rescored with a
(question, passage) cross-encoder and reordered by the new scores; the output
per qid is always an exact permutation of the input prefix.
"""

from __future__ import annotations

import torch

from .errors import InputError
from .models import pair_logits

DEFAULT_DEPTH = 100


def rerank_lists(
    model,
    tokenizer,
    run: dict[str, list[tuple[str, float]]],
    questions: dict[str, str],
    corpus_texts: dict[str, str],
    depth: int = DEFAULT_DEPTH,
    batch_size: int = 16,
) -> dict[str, list[tuple[str, float]]]:
    missing_questions = sorted(set(run) - set(questions))
    if missing_questions:
        raise InputError(f"run contains qids without question text: {missing_questions}")
    reranked: dict[str, list[tuple[str, float]]] = {}
    for qid in sorted(run):
        entries = run[qid][:depth]
        missing = sorted(doc_id for doc_id, _ in entries if doc_id not in corpus_texts)
        if missing:
            raise InputError(f"qid {qid}: passages missing from corpus: {missing}")
        pairs = [(questions[qid], corpus_texts[doc_id]) for doc_id, _ in entries]
        scores: list[float] = []
        for start in range(0, len(pairs), batch_size):
            logits = pair_logits(model, tokenizer, pairs[start:start + batch_size])
            if logits.shape[-1] == 1:
                batch_scores = logits[:, 0]
            else:
                # multi-label rerankers: use the positive-class logit
                batch_scores = logits[:, -1]
            scores.extend(float(s) for s in batch_scores)
        order = sorted(
            zip((doc_id for doc_id, _ in entries), scores),
            key=lambda item: (-item[1], item[0]),
        )
        reranked[qid] = order
    return reranked
