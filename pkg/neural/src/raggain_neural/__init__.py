"""Neural signal producers for retrieval-gain evaluation.

Everything here is exported through the gain toolkit's file formats: JSONL
generation logs with token entropies, quality score tables, reranked
reference runs, entailment predictor columns, and supervised gain-regressor
artifacts with their prediction tables.
"""

from .entail import entailment_predict
from .errors import ContextLengthError, InputError, ModelLoadError, NeuralError
from .genlog import GenerationSettings, generate_log, greedy_generate_with_entropy, token_entropy
from .prompts import NORAG_TEMPLATE, PromptInstance, build_prompt, render_prompt
from .quality import quality_scores
from .rerank import rerank_lists
from .supervised import (
    SupervisedExample,
    TrainSettings,
    build_examples,
    encode_example,
    predict_supervised,
    train_supervised,
)

__version__ = "0.1.0"

__all__ = [
    "NeuralError",
    "ModelLoadError",
    "InputError",
    "ContextLengthError",
    "NORAG_TEMPLATE",
    "PromptInstance",
    "render_prompt",
    "build_prompt",
    "GenerationSettings",
    "token_entropy",
    "greedy_generate_with_entropy",
    "generate_log",
    "quality_scores",
    "rerank_lists",
    "entailment_predict",
    "SupervisedExample",
    "TrainSettings",
    "build_examples",
    "encode_example",
    "train_supervised",
    "predict_supervised",
]
