"""Checkpoint loading and shared encoder utilities.

Default checkpoint names are configuration, not hard requirements: every
entry point accepts a local path or hub name, and a load failure aborts with
the checkpoint name rather than falling back silently.
"""

from __future__ import annotations

import torch
from transformers import (
    AutoModel,
    AutoModelForCausalLM,
    AutoModelForSequenceClassification,
    AutoTokenizer,
)

from .errors import ModelLoadError

# Default checkpoints; override per call or via CLI flags.
DEFAULT_EMBEDDER = "intfloat/e5-large-v2"
DEFAULT_CROSS_ENCODER = "sentence-transformers/stsb-roberta-large"
DEFAULT_NLI = "MoritzLaurer/DeBERTa-v3-large-mnli-fever-anli-ling-wanli"
DEFAULT_RERANKER = "BAAI/bge-reranker-v2-m3"
DEFAULT_LONG_NLI = "MoritzLaurer/ModernBERT-large-zeroshot-v2.0"
DEFAULT_BACKBONE = "MoritzLaurer/ModernBERT-large-zeroshot-v2.0"
DEFAULT_LLMS = ("tiiuae/Falcon3-10B-Instruct", "meta-llama/Llama-3.1-8B-Instruct")


def _load(loader, name: str):
    try:
        return loader(name)
    except Exception as exc:
        raise ModelLoadError(f"cannot load checkpoint {name!r}: {exc}") from exc


def load_tokenizer(name: str):
    return _load(AutoTokenizer.from_pretrained, name)


def load_encoder(name: str):
    model = _load(AutoModel.from_pretrained, name)
    model.eval()
    return model


def load_classifier(name: str):
    model = _load(AutoModelForSequenceClassification.from_pretrained, name)
    model.eval()
    return model


def load_causal_lm(name: str):
    model = _load(AutoModelForCausalLM.from_pretrained, name)
    model.eval()
    return model


def context_limit(model, tokenizer) -> int:
    """Usable input length in tokens, preferring the model's position table."""
    limit = getattr(model.config, "max_position_embeddings", None)
    if limit is None or limit <= 0:
        limit = tokenizer.model_max_length
    # Some tokenizers carry a huge sentinel instead of a real limit.
    return min(int(limit), 1_000_000)


@torch.no_grad()
def mean_pooled_embeddings(model, tokenizer, texts: list[str], max_length: int | None = None) -> torch.Tensor:
    """Attention-masked mean pooling over the last hidden states."""
    max_length = max_length or context_limit(model, tokenizer)
    enc = tokenizer(texts, padding=True, truncation=True, max_length=max_length,
                    return_tensors="pt")
    hidden = model(**enc).last_hidden_state
    mask = enc["attention_mask"].unsqueeze(-1).to(hidden.dtype)
    return (hidden * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1)


@torch.no_grad()
def pair_logits(model, tokenizer, pairs: list[tuple[str, str]], max_length: int | None = None) -> torch.Tensor:
    """Raw sequence-classification logits for (text, text_pair) batches."""
    max_length = max_length or context_limit(model, tokenizer)
    enc = tokenizer(
        [a for a, _ in pairs],
        [b for _, b in pairs],
        padding=True,
        truncation=True,
        max_length=max_length,
        return_tensors="pt",
    )
    return model(**enc).logits


def entailment_index(model) -> int:
    """Index of the entailment label in a classifier's id2label map."""
    for idx, label in model.config.id2label.items():
        if "entail" in str(label).lower():
            return int(idx)
    raise ModelLoadError(
        f"no entailment label in id2label map: {model.config.id2label}"
    )
