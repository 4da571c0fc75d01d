"""Answer generation with per-token entropy logging.

Decoding is greedy (deterministic), and at every emitted token the natural-log
entropy of the full next-token distribution is recorded, so entropies lie in
[0, ln(vocabulary size)]. Records go to the generation-log JSONL consumed by
the gain toolkit; questions whose generation fails (or produces an empty
answer) are listed in an error sidecar file instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import torch

from .errors import InputError
from .formats import Question, append_jsonl
from .prompts import DEFAULT_TOP_PASSAGES, build_prompt

DEFAULT_MAX_NEW_TOKENS = 64


@dataclass
class GenerationSettings:
    max_new_tokens: int = DEFAULT_MAX_NEW_TOKENS
    top_passages: int = DEFAULT_TOP_PASSAGES


def token_entropy(logits: torch.Tensor) -> float:
    """Natural-log entropy of the distribution defined by a logit vector."""
    probs = torch.log_softmax(logits.float(), dim=-1).exp()
    # entr(0) = 0, so fully-masked vocabulary entries contribute nothing
    return float(torch.special.entr(probs).sum())


@torch.no_grad()
def greedy_generate_with_entropy(
    model, tokenizer, prompt: str, max_new_tokens: int = DEFAULT_MAX_NEW_TOKENS
) -> tuple[str, list[float]]:
    """Greedy decode; returns (answer text, one entropy per emitted token).

    The step that produces the end-of-sequence token terminates decoding and
    is not part of the answer, so its entropy is not recorded.
    """
    ids = tokenizer(prompt, return_tensors="pt").input_ids
    eos_id = tokenizer.eos_token_id
    past = None
    current = ids
    new_ids: list[int] = []
    entropies: list[float] = []
    for _ in range(max_new_tokens):
        out = model(input_ids=current, past_key_values=past, use_cache=True)
        past = out.past_key_values
        logits = out.logits[0, -1]
        next_id = int(torch.argmax(logits))
        if eos_id is not None and next_id == eos_id:
            break
        entropies.append(token_entropy(logits))
        new_ids.append(next_id)
        current = torch.tensor([[next_id]], dtype=ids.dtype)
    answer = tokenizer.decode(new_ids, skip_special_tokens=True).strip()
    return answer, entropies


def generate_log(
    model,
    tokenizer,
    questions: list[Question],
    passages_for: dict[str, list[str]] | None,
    modes: tuple[str, ...],
    out_path: str | Path,
    errors_path: str | Path,
    settings: GenerationSettings | None = None,
) -> tuple[int, int]:
    """Write generation records for every (question, mode); returns (ok, failed).

    ``passages_for`` maps qid to retrieval-ordered passage texts and is
    required when "rag" is among the modes.
    """
    settings = settings or GenerationSettings()
    if "rag" in modes and passages_for is None:
        raise InputError("rag generation needs retrieved passages per question")
    out_path = Path(out_path)
    errors_path = Path(errors_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("", encoding="utf-8")
    errors_path.write_text("", encoding="utf-8")
    ok = failed = 0
    for question in questions:
        for mode in modes:
            passages = None
            if mode == "rag":
                passages = passages_for.get(question.qid, [])[: settings.top_passages]
            try:
                prompt = build_prompt(question.qid, question.question, passages, mode)
                answer, entropies = greedy_generate_with_entropy(
                    model, tokenizer, prompt.text, settings.max_new_tokens
                )
                if not answer:
                    raise InputError("model produced an empty answer")
            except Exception as exc:
                append_jsonl(errors_path, {
                    "qid": question.qid, "mode": mode, "error": str(exc),
                })
                failed += 1
                continue
            append_jsonl(out_path, {
                "qid": question.qid,
                "mode": mode,
                "answer": answer,
                "token_entropies": entropies,
            })
            ok += 1
    return ok, failed
