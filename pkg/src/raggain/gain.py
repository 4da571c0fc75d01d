"""Retrieval-gain labels from answer-quality scores, plus the exact-match metric.

The gain of augmenting generation with retrieved context is the log-ratio of
answer quality with retrieval over quality without it. Qualities live in
[0, 1] and are clamped from below by ``eps`` so a zero-quality answer keeps
the ratio finite.
"""

from __future__ import annotations

import math
import re
import string
from dataclasses import dataclass

from .errors import PredictorError

DEFAULT_EPS = 1e-6

_PUNCT_TABLE = str.maketrans("", "", string.punctuation)
_WS_RE = re.compile(r"\s+")
_ARTICLES = ("a", "an", "the")


@dataclass(frozen=True)
class QualityScore:
    qid: str
    metric: str
    mode: str
    value: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.value <= 1.0:
            raise PredictorError(
                f"qid {self.qid}: quality {self.value} outside [0, 1] for {self.metric}/{self.mode}"
            )


@dataclass(frozen=True)
class GainLabel:
    qid: str
    metric: str
    value: float


def normalize_answer(text: str) -> str:
    """Lowercase, remove punctuation, collapse whitespace, drop a leading article."""
    text = text.lower().translate(_PUNCT_TABLE)
    tokens = _WS_RE.split(text.strip())
    if tokens and tokens[0] in _ARTICLES:
        tokens = tokens[1:]
    return " ".join(tokens)


def q_em(generated: str, references: list[str]) -> int:
    """1 if any normalized reference equals or is contained in the normalized answer.

    References that normalize to the empty string are skipped rather than
    trivially matching everything.
    """
    if not references:
        raise PredictorError("exact match needs at least one reference answer")
    answer = normalize_answer(generated)
    for ref in references:
        ref_norm = normalize_answer(ref)
        if ref_norm and ref_norm in answer:
            return 1
    return 0


def gain(q_rag: float, q_norag: float, eps: float = DEFAULT_EPS) -> float:
    """ln(max(q_rag, eps) / max(q_norag, eps)) for qualities in [0, 1]."""
    if not 0.0 <= q_rag <= 1.0 or not 0.0 <= q_norag <= 1.0:
        raise PredictorError(f"qualities must lie in [0, 1], got ({q_rag}, {q_norag})")
    if eps <= 0.0:
        raise PredictorError(f"eps must be positive, got {eps}")
    return math.log(max(q_rag, eps) / max(q_norag, eps))


@dataclass
class GainHistogram:
    bin_edges: list[float]
    counts: list[int]
    count: int
    mean: float
    fraction_negative: float
    fraction_zero: float
    fraction_positive: float

    def to_text(self) -> str:
        lines = [
            f"count\t{self.count}",
            f"mean\t{self.mean:.9g}",
            f"fraction_negative\t{self.fraction_negative:.9g}",
            f"fraction_zero\t{self.fraction_zero:.9g}",
            f"fraction_positive\t{self.fraction_positive:.9g}",
            "bin_lo\tbin_hi\tcount",
        ]
        for i, c in enumerate(self.counts):
            lines.append(f"{self.bin_edges[i]:.9g}\t{self.bin_edges[i + 1]:.9g}\t{c}")
        return "\n".join(lines) + "\n"


def gain_distribution(values: list[float], bins: int) -> GainHistogram:
    """Equal-width histogram over [min, max] with sign-fraction summary.

    A degenerate collection (all values equal) lands in the first bin. The
    three sign fractions always sum to one.
    """
    if bins < 1:
        raise PredictorError(f"bins must be >= 1, got {bins}")
    if not values:
        raise PredictorError("cannot build a histogram from an empty gain collection")
    lo = min(values)
    hi = max(values)
    counts = [0] * bins
    if hi == lo:
        counts[0] = len(values)
    else:
        width = (hi - lo) / bins
        for v in values:
            idx = int((v - lo) / width)
            if idx >= bins:  # v == hi after rounding
                idx = bins - 1
            counts[idx] += 1
    n = len(values)
    edges = [lo + (hi - lo) * i / bins for i in range(bins + 1)]
    negative = sum(1 for v in values if v < 0.0)
    zero = sum(1 for v in values if v == 0.0)
    return GainHistogram(
        bin_edges=edges,
        counts=counts,
        count=n,
        mean=sum(values) / n,
        fraction_negative=negative / n,
        fraction_zero=zero / n,
        fraction_positive=(n - negative - zero) / n,
    )
