from .pre import PRE_PREDICTORS, pre_predict
from .post import PostParams, RankedList, nqc, rbo, ref_predict, smv, wig
from .generation import (
    POOL_STRATEGIES,
    GenerationRecord,
    adapt_external_scores,
    pool_entropy,
    uncertainty_gap,
)

__all__ = [
    "PRE_PREDICTORS",
    "pre_predict",
    "PostParams",
    "RankedList",
    "wig",
    "nqc",
    "smv",
    "rbo",
    "ref_predict",
    "POOL_STRATEGIES",
    "GenerationRecord",
    "pool_entropy",
    "uncertainty_gap",
    "adapt_external_scores",
]
