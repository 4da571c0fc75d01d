"""Readers and writers for the exchange formats shared with the gain toolkit.

This package talks to the evaluation toolkit only through files: JSONL
queries/corpora/generation logs, TREC run files, and qid/value TSV score
tables (9 significant digits). The writers here must stay conformant with
that toolkit's strict ingestion.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import InputError


@dataclass(frozen=True)
class Question:
    qid: str
    question: str
    answers: tuple[str, ...]


def read_queries(path: str | Path) -> list[Question]:
    records = []
    seen = set()
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from None
            try:
                qid, question = obj["qid"], obj["question"]
                answers = tuple(obj["answers"])
            except (KeyError, TypeError) as exc:
                raise InputError(f"{path}:{lineno}: malformed question record ({exc})") from None
            if qid in seen:
                raise InputError(f"{path}:{lineno}: duplicate qid {qid!r}")
            seen.add(qid)
            records.append(Question(qid=qid, question=question, answers=answers))
    return records


def read_corpus_texts(path: str | Path) -> dict[str, str]:
    texts: dict[str, str] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                doc_id, text = obj["doc_id"], obj["text"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise InputError(f"{path}:{lineno}: malformed passage record ({exc})") from None
            if doc_id in texts:
                raise InputError(f"{path}:{lineno}: duplicate doc_id {doc_id!r}")
            texts[doc_id] = text
    return texts


def read_run(path: str | Path) -> dict[str, list[tuple[str, float]]]:
    """TREC run -> qid -> [(doc_id, score)] in rank order."""
    lists: dict[str, list[tuple[str, float]]] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 6:
                raise InputError(f"{path}:{lineno}: expected 6 columns, got {len(parts)}")
            qid, _, doc_id, _, score, _ = parts
            lists.setdefault(qid, []).append((doc_id, float(score)))
    return lists


def write_run(path: str | Path, lists: dict[str, list[tuple[str, float]]], tag: str) -> None:
    lines = []
    for qid in sorted(lists):
        for rank, (doc_id, score) in enumerate(lists[qid], start=1):
            lines.append(f"{qid} Q0 {doc_id} {rank} {score:.6f} {tag}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_score_table(path: str | Path, column: dict[str, float], value_header: str = "value") -> None:
    for qid, value in column.items():
        if not math.isfinite(value):
            raise InputError(f"refusing to write non-finite value {value} for qid {qid!r}")
    lines = [f"qid\t{value_header}"]
    for qid in sorted(column):
        lines.append(f"{qid}\t{column[qid]:.9g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_score_table(path: str | Path) -> dict[str, float]:
    column: dict[str, float] = {}
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or len(lines[0].split("\t")) != 2:
        raise InputError(f"{path}: expected a qid<TAB>value header")
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        qid, raw = line.split("\t")
        if qid in column:
            raise InputError(f"{path}:{lineno}: duplicate qid {qid!r}")
        column[qid] = float(raw)
    return column


def read_generation_log(path: str | Path) -> dict[str, dict[str, dict]]:
    """Generation log -> qid -> mode -> record dict."""
    log: dict[str, dict[str, dict]] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                qid, mode = obj["qid"], obj["mode"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise InputError(f"{path}:{lineno}: malformed generation record ({exc})") from None
            if mode in log.get(qid, {}):
                raise InputError(f"{path}:{lineno}: duplicate record for {qid!r}/{mode!r}")
            log.setdefault(qid, {})[mode] = obj
    return log


def append_jsonl(path: str | Path, obj: dict) -> None:
    with open(path, "a", encoding="utf-8") as handle:
        handle.write(json.dumps(obj) + "\n")
