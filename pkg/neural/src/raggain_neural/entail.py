"""Passage-entailment gain predictor.

For each question, the top retrieved passages are concatenated into the
premise; the hypothesis is the retrieval-augmented answer concatenated with
the question. The entailment probability from a long-context NLI model is the
predictor value. Inputs longer than the model's context window are an error;
nothing is silently truncated.
"""

from __future__ import annotations

import torch

from .errors import ContextLengthError, InputError
from .models import context_limit, entailment_index

DEFAULT_TOP_PASSAGES = 5


@torch.no_grad()
def entailment_predict(
    model,
    tokenizer,
    questions: dict[str, str],
    rag_answers: dict[str, str],
    run: dict[str, list[tuple[str, float]]],
    corpus_texts: dict[str, str],
    top_passages: int = DEFAULT_TOP_PASSAGES,
) -> dict[str, float]:
    idx = entailment_index(model)
    limit = context_limit(model, tokenizer)
    column: dict[str, float] = {}
    for qid in sorted(questions):
        if qid not in rag_answers:
            raise InputError(f"no retrieval-augmented answer for qid {qid!r}")
        if qid not in run or not run[qid]:
            raise InputError(f"qid {qid!r}: empty passage set")
        entries = run[qid][:top_passages]
        missing = sorted(doc_id for doc_id, _ in entries if doc_id not in corpus_texts)
        if missing:
            raise InputError(f"qid {qid}: passages missing from corpus: {missing}")
        premise = " ".join(corpus_texts[doc_id] for doc_id, _ in entries)
        hypothesis = f"{rag_answers[qid]} {questions[qid]}"
        enc = tokenizer(premise, hypothesis, return_tensors="pt")
        n_tokens = enc["input_ids"].shape[1]
        if n_tokens > limit:
            raise ContextLengthError(
                f"qid {qid}: input is {n_tokens} tokens but the model accepts {limit}"
            )
        logits = model(**enc).logits
        column[qid] = float(torch.softmax(logits, dim=-1)[0, idx])
    return column
