"""Prompt templates for answer generation with and without retrieved passages.

The two templates are pinned byte-for-byte; rendering only substitutes the
question and, in retrieval mode, the numbered passages in retrieval order.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InputError

NORAG_TEMPLATE = (
    "You are an AI assistant that answers questions.\n"
    "Answer the question concisely:\n"
    "Question: {question}\n"
    "Answer:"
)

RAG_HEADER = (
    "You are an AI assistant that answers questions.\n"
    "Answer the question concisely based on the following passages:\n"
    "Question: {question}\n"
)

RAG_FOOTER = "Answer:"

DEFAULT_TOP_PASSAGES = 5


@dataclass(frozen=True)
class PromptInstance:
    qid: str
    mode: str
    text: str
    passages: tuple[str, ...] = ()


def render_prompt(question: str, passages: list[str] | None, mode: str) -> str:
    """Instantiate the template for one question.

    ``mode`` is "rag" or "norag"; rag requires at least one passage and
    numbers them from 1 in the given order.
    """
    if mode == "norag":
        return NORAG_TEMPLATE.format(question=question)
    if mode != "rag":
        raise InputError(f"unknown prompt mode {mode!r}")
    if not passages:
        raise InputError("rag prompt requires at least one passage")
    lines = [RAG_HEADER.format(question=question)]
    for i, passage in enumerate(passages, start=1):
        lines.append(f"Passage {i}: {passage}\n")
    lines.append(RAG_FOOTER)
    return "".join(lines)


def build_prompt(qid: str, question: str, passages: list[str] | None, mode: str) -> PromptInstance:
    text = render_prompt(question, passages, mode)
    return PromptInstance(qid=qid, mode=mode, text=text, passages=tuple(passages or ()))
