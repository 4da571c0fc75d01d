"""Semantic answer-quality metrics: embedding cosine, cross-encoder, NLI.

All three score a generated answer against the reference answers and return
values in [0, 1]; with several references the best-scoring one counts.

- embedding cosine: mean-pooled encoder embeddings, cosine mapped from
  [-1, 1] to [0, 1] by (x + 1) / 2 (monotone, so correlations are unchanged)
- cross-encoder: single raw logit squashed by a logistic sigmoid
- nli: probability of the entailment label with the reference as premise and
  the generated answer as hypothesis
"""

from __future__ import annotations

import math

import torch

from .errors import InputError, ModelLoadError
from .models import entailment_index, mean_pooled_embeddings, pair_logits

QUALITY_METRICS = ("e5", "ce", "nli")


def embedding_quality(model, tokenizer, generated: str, references: list[str]) -> float:
    if not references:
        raise InputError("quality scoring needs at least one reference answer")
    embeddings = mean_pooled_embeddings(model, tokenizer, [generated] + list(references))
    answer = embeddings[0:1]
    refs = embeddings[1:]
    cosines = torch.nn.functional.cosine_similarity(answer, refs, dim=1)
    best = float(cosines.max())
    return min(1.0, max(0.0, (best + 1.0) / 2.0))


def cross_encoder_quality(model, tokenizer, generated: str, references: list[str]) -> float:
    if not references:
        raise InputError("quality scoring needs at least one reference answer")
    if model.config.num_labels != 1:
        raise ModelLoadError(
            f"cross-encoder quality needs a single-logit model, got {model.config.num_labels} labels"
        )
    logits = pair_logits(model, tokenizer, [(generated, ref) for ref in references])
    best = float(logits[:, 0].max())
    return 1.0 / (1.0 + math.exp(-best))


def nli_quality(model, tokenizer, generated: str, references: list[str]) -> float:
    if not references:
        raise InputError("quality scoring needs at least one reference answer")
    idx = entailment_index(model)
    # premise = reference, hypothesis = generated answer
    logits = pair_logits(model, tokenizer, [(ref, generated) for ref in references])
    probs = torch.softmax(logits, dim=-1)[:, idx]
    return float(probs.max())


def quality_scores(
    metric: str,
    model,
    tokenizer,
    answers: dict[str, str],
    references: dict[str, list[str]],
) -> dict[str, float]:
    """One value in [0, 1] per qid for the chosen metric."""
    scorer = {
        "e5": embedding_quality,
        "ce": cross_encoder_quality,
        "nli": nli_quality,
    }.get(metric)
    if scorer is None:
        raise InputError(f"unknown quality metric {metric!r}; expected one of {QUALITY_METRICS}")
    missing = sorted(set(references) - set(answers))
    if missing:
        raise InputError(f"answers missing for qids: {missing}")
    column = {}
    for qid in sorted(answers):
        if qid not in references:
            raise InputError(f"no reference answers for qid {qid!r}")
        column[qid] = scorer(model, tokenizer, answers[qid], list(references[qid]))
    return column
