"""Toolkit for labeling QA runs with retrieval gain and evaluating gain predictors.

The lexical side (index, BM25 search, term statistics) feeds pre- and
post-retrieval predictors; generation logs feed the post-generation
uncertainty predictor and the exact-match quality metric; the evaluation
layer correlates every predictor with the actual gain and annotates
significance with Williams' test.
"""

from .errors import (
    ConfigError,
    CorpusError,
    EvaluationError,
    GenerationLogError,
    PredictorError,
    RagGainError,
    RunFileError,
    ScoreTableError,
)
from .evaluation import CorrelationReport, evaluate, pearson, williams_test
from .gain import GainHistogram, gain, gain_distribution, normalize_answer, q_em
from .index import (
    Index,
    Passage,
    TermStats,
    bm25_search,
    build_index,
    corpus_score,
    term_stats,
    tokenize,
)
from .pipeline import ExperimentConfig, run_experiment, split_questions, tune
from .predictors import (
    GenerationRecord,
    PostParams,
    RankedList,
    adapt_external_scores,
    nqc,
    pool_entropy,
    pre_predict,
    rbo,
    ref_predict,
    smv,
    uncertainty_gap,
    wig,
)

__version__ = "0.1.0"

__all__ = [
    "RagGainError",
    "CorpusError",
    "RunFileError",
    "ScoreTableError",
    "GenerationLogError",
    "PredictorError",
    "EvaluationError",
    "ConfigError",
    "Index",
    "Passage",
    "TermStats",
    "tokenize",
    "build_index",
    "bm25_search",
    "corpus_score",
    "term_stats",
    "pre_predict",
    "RankedList",
    "PostParams",
    "wig",
    "nqc",
    "smv",
    "rbo",
    "ref_predict",
    "GenerationRecord",
    "pool_entropy",
    "uncertainty_gap",
    "adapt_external_scores",
    "q_em",
    "gain",
    "gain_distribution",
    "GainHistogram",
    "normalize_answer",
    "pearson",
    "williams_test",
    "evaluate",
    "CorrelationReport",
    "ExperimentConfig",
    "run_experiment",
    "split_questions",
    "tune",
]
