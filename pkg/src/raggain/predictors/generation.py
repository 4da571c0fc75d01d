"""Post-generation predictors over LLM answer records.

The uncertainty-gap predictor pools per-token entropies of the no-retrieval
answer and the retrieval-augmented answer and takes the difference, so a
positive value means retrieval reduced the model's uncertainty. Entropies are
ingested from generation logs, never recomputed here. Externally produced
per-question score files (entailment, supervised predictors) enter through
``adapt_external_scores``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..errors import GenerationLogError, PredictorError, ScoreTableError

POOL_STRATEGIES = ("mean", "geometric_mean", "harmonic_mean", "min", "max")

MODES = ("rag", "norag")


@dataclass(frozen=True)
class GenerationRecord:
    qid: str
    mode: str
    answer: str
    token_entropies: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise GenerationLogError(f"qid {self.qid}: unknown mode {self.mode!r}")
        if not self.answer.strip():
            raise GenerationLogError(f"qid {self.qid} ({self.mode}): empty answer rejected")
        if not self.token_entropies:
            raise GenerationLogError(
                f"qid {self.qid} ({self.mode}): non-empty answer requires token entropies"
            )
        for h in self.token_entropies:
            if not math.isfinite(h) or h < 0.0:
                raise GenerationLogError(
                    f"qid {self.qid} ({self.mode}): invalid token entropy {h}"
                )


def pool_entropy(entropies: list[float] | tuple[float, ...], strategy: str) -> float:
    """Aggregate a token-entropy sequence with one of the five pooling strategies."""
    if strategy not in POOL_STRATEGIES:
        raise PredictorError(f"unknown pooling strategy {strategy!r}")
    if not entropies:
        raise PredictorError("cannot pool an empty entropy sequence")
    n = len(entropies)
    if strategy == "mean":
        return sum(entropies) / n
    if strategy == "max":
        return max(entropies)
    if strategy == "min":
        return min(entropies)
    if any(h <= 0.0 for h in entropies):
        raise PredictorError(f"{strategy} pooling requires strictly positive entropies")
    if strategy == "geometric_mean":
        return math.exp(sum(math.log(h) for h in entropies) / n)
    return n / sum(1.0 / h for h in entropies)


def uncertainty_gap(
    norag: GenerationRecord, rag: GenerationRecord, strategy: str = "max"
) -> float:
    """pool(no-RAG entropies) - pool(RAG entropies); max pooling by default."""
    if norag.qid != rag.qid:
        raise PredictorError(f"qid mismatch: {norag.qid} vs {rag.qid}")
    if norag.mode != "norag" or rag.mode != "rag":
        raise PredictorError(
            f"qid {norag.qid}: records passed in wrong mode order ({norag.mode}, {rag.mode})"
        )
    return pool_entropy(norag.token_entropies, strategy) - pool_entropy(rag.token_entropies, strategy)


def adapt_external_scores(
    column: dict[str, float], expected_qids: set[str], name: str = "external"
) -> dict[str, float]:
    """Validate an externally produced score column against the expected qid set.

    Coverage must be exact: missing and extra qids are both reported, as are
    non-finite values. Returns the column unchanged on success.
    """
    missing = sorted(expected_qids - set(column))
    if missing:
        raise ScoreTableError(f"{name}: missing qids: {missing}")
    extra = sorted(set(column) - expected_qids)
    if extra:
        raise ScoreTableError(f"{name}: unexpected qids: {extra}")
    for qid, value in sorted(column.items()):
        if not math.isfinite(value):
            raise ScoreTableError(f"{name}: non-finite value {value} for qid {qid}")
    return column
