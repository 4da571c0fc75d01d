"""Exception hierarchy shared across the toolkit."""


class RagGainError(Exception):
    """Base class for all toolkit errors."""


class CorpusError(RagGainError):
    """Invalid corpus input (duplicate ids, empty passages, bad JSONL)."""


class RunFileError(RagGainError):
    """Malformed or inconsistent retrieval run file."""


class ScoreTableError(RagGainError):
    """Malformed score table, or qid coverage mismatch."""


class GenerationLogError(RagGainError):
    """Malformed generation log record."""


class PredictorError(RagGainError):
    """Predictor precondition violated (empty query, bad score list, ...)."""


class EvaluationError(RagGainError):
    """Correlation or significance computation is undefined for the input."""


class ConfigError(RagGainError):
    """Invalid experiment configuration."""
