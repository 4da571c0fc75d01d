"""Post-retrieval predictors over the retrieved score list.

Score-distribution predictors look at the top-k retrieval scores, optionally
regularized by the corpus score s_c:

    wig  (regularized)    mean(top-k) - s_c          (u_wig drops the s_c term)
    nqc  (normalized)     popstd(top-k) / s_c        (qc drops the division)
    smv  (normalized)     mean_i(s_i * |ln(s_i/mu)|) / s_c,  mu = mean(top-k)

k is truncated to the list length on short lists. The list-structure predictor
compares the retrieved list against a reference ranking with rank-biased
overlap; the reference list comes from an external reranker run file.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..errors import PredictorError

EPS_CORPUS_SCORE = 1e-12


@dataclass
class RankedList:
    """Per-query retrieval result: (doc_id, score) pairs, scores non-increasing."""

    qid: str
    entries: list[tuple[str, float]] = field(default_factory=list)

    def __post_init__(self) -> None:
        seen: set[str] = set()
        prev = math.inf
        for doc_id, score in self.entries:
            if doc_id in seen:
                raise PredictorError(f"qid {self.qid}: duplicate doc_id {doc_id!r}")
            seen.add(doc_id)
            if score > prev:
                raise PredictorError(
                    f"qid {self.qid}: scores increase at doc {doc_id!r} ({score} > {prev})"
                )
            prev = score

    def doc_ids(self) -> list[str]:
        return [doc_id for doc_id, _ in self.entries]

    def scores(self) -> list[float]:
        return [score for _, score in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class PostParams:
    k: int = 5
    p: float = 0.95
    depth: int = 100
    rbo_mode: str = "extrapolated"

    def __post_init__(self) -> None:
        if self.k < 1:
            raise PredictorError(f"k must be >= 1, got {self.k}")
        if not 0.0 < self.p < 1.0:
            raise PredictorError(f"rbo decay p must be in (0, 1), got {self.p}")
        if self.depth < 1:
            raise PredictorError(f"rbo depth must be >= 1, got {self.depth}")
        if self.rbo_mode not in ("truncated", "extrapolated"):
            raise PredictorError(f"unknown rbo mode {self.rbo_mode!r}")


def _top_scores(ranked: RankedList, k: int) -> list[float]:
    if not ranked.entries:
        raise PredictorError(f"qid {ranked.qid}: empty result list carries no signal")
    if k < 1:
        raise PredictorError(f"k must be >= 1, got {k}")
    return ranked.scores()[: min(k, len(ranked.entries))]


def _check_corpus_score(s_c: float) -> None:
    if abs(s_c) <= EPS_CORPUS_SCORE:
        raise PredictorError(
            f"corpus score {s_c} too close to zero for normalization (eps={EPS_CORPUS_SCORE})"
        )


def wig(
    ranked: RankedList,
    s_c: float,
    k: int,
    regularized: bool = True,
    n_query_terms: int | None = None,
) -> float:
    """Mean of the top-k scores, minus the corpus score when regularized.

    ``n_query_terms`` optionally enables the classic sqrt(|q|) normalization;
    the default follows the plain mean-difference form.
    """
    top = _top_scores(ranked, k)
    value = sum(top) / len(top)
    if regularized:
        value -= s_c
    if n_query_terms is not None:
        if n_query_terms < 1:
            raise PredictorError(f"n_query_terms must be >= 1, got {n_query_terms}")
        value /= math.sqrt(n_query_terms)
    return value


def nqc(ranked: RankedList, s_c: float, k: int, normalized: bool = True) -> float:
    """Population standard deviation of the top-k scores, over s_c when normalized."""
    top = _top_scores(ranked, k)
    mean = sum(top) / len(top)
    std = math.sqrt(sum((s - mean) ** 2 for s in top) / len(top))
    if not normalized:
        return std
    _check_corpus_score(s_c)
    return std / s_c


def smv(ranked: RankedList, s_c: float, k: int, normalized: bool = True) -> float:
    """Score magnitude-and-variance: mean of s_i * |ln(s_i / mu)| over the top-k."""
    top = _top_scores(ranked, k)
    for (doc_id, score) in ranked.entries[: len(top)]:
        if score <= 0.0:
            raise PredictorError(
                f"qid {ranked.qid}: non-positive score {score} for doc {doc_id!r} in top-{k}"
            )
    mu = sum(top) / len(top)
    value = sum(s * abs(math.log(s / mu)) for s in top) / len(top)
    if not normalized:
        return value
    _check_corpus_score(s_c)
    return value / s_c


def rbo(
    a: RankedList | list[str],
    b: RankedList | list[str],
    p: float,
    depth: int,
    mode: str = "extrapolated",
) -> float:
    """Rank-biased overlap of two rankings.

    truncated:     (1-p) * sum_{d=1..depth} p^(d-1) * A_d
    extrapolated:  truncated value + A_depth * p^depth

    A_d is the overlap of the two depth-d prefixes divided by d; a prefix past
    a list's end is the whole list. With identical lists of length >= depth the
    truncated form gives 1 - p^depth and the extrapolated form gives 1.
    """
    if not 0.0 < p < 1.0:
        raise PredictorError(f"rbo decay p must be in (0, 1), got {p}")
    if depth < 1:
        raise PredictorError(f"rbo depth must be >= 1, got {depth}")
    if mode not in ("truncated", "extrapolated"):
        raise PredictorError(f"unknown rbo mode {mode!r}")
    ids_a = a.doc_ids() if isinstance(a, RankedList) else list(a)
    ids_b = b.doc_ids() if isinstance(b, RankedList) else list(b)

    seen_a: set[str] = set()
    seen_b: set[str] = set()
    overlap = 0
    total = 0.0
    weight = 1.0  # p^(d-1)
    agreement = 0.0
    for d in range(1, depth + 1):
        if d <= len(ids_a):
            item = ids_a[d - 1]
            if item in seen_b:
                overlap += 1
            seen_a.add(item)
        if d <= len(ids_b):
            item = ids_b[d - 1]
            if item in seen_a:
                overlap += 1
            seen_b.add(item)
        agreement = overlap / d
        total += weight * agreement
        weight *= p
    value = (1.0 - p) * total
    if mode == "extrapolated":
        value += agreement * weight  # weight is now p^depth
    return value


def ref_predict(original: RankedList, reference: RankedList, params: PostParams) -> float:
    """Similarity of the retrieved list to an externally reranked reference list."""
    if original.qid != reference.qid:
        raise PredictorError(
            f"qid mismatch between original ({original.qid}) and reference ({reference.qid})"
        )
    return rbo(original, reference, params.p, params.depth, params.rbo_mode)
