"""Pre-retrieval predictors from query-term corpus statistics.

Three per-term statistic families (idf, scq, var) crossed with three
aggregates (mean, max, min) give the nine predictors. Query terms are a
multiset: duplicates affect the mean but never max or min. Terms missing
from the index contribute a statistic of 0.
"""

from __future__ import annotations

from ..errors import PredictorError
from ..index import Index, term_stats

FAMILIES = ("idf", "scq", "var")
AGGREGATES = ("mean", "max", "min")

#: The nine (aggregate, family) predictor names, e.g. "mean_idf".
PRE_PREDICTORS = tuple(f"{agg}_{fam}" for fam in FAMILIES for agg in AGGREGATES)


def pre_predict(query: list[str], index: Index, family: str, aggregate: str) -> float:
    if family not in FAMILIES:
        raise PredictorError(f"unknown family {family!r}; expected one of {FAMILIES}")
    if aggregate not in AGGREGATES:
        raise PredictorError(f"unknown aggregate {aggregate!r}; expected one of {AGGREGATES}")
    if not query:
        raise PredictorError("query is empty after tokenization")
    values = [getattr(term_stats(index, term), family) for term in query]
    if aggregate == "mean":
        return sum(values) / len(values)
    if aggregate == "max":
        return max(values)
    return min(values)


def parse_pre_name(name: str) -> tuple[str, str]:
    """Split a predictor name like "mean_idf" into (family, aggregate)."""
    try:
        aggregate, family = name.split("_", 1)
    except ValueError:
        raise PredictorError(f"not a pre-retrieval predictor name: {name!r}") from None
    if name not in PRE_PREDICTORS:
        raise PredictorError(f"not a pre-retrieval predictor name: {name!r}")
    return family, aggregate
