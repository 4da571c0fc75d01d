"""File formats: JSONL corpora/queries/generation logs, TREC runs, score tables.

Ingestion is strict: malformed input is rejected with a line-precise
diagnostic, never silently repaired. Writers sort by qid and use fixed float
formatting so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .errors import CorpusError, GenerationLogError, RunFileError, ScoreTableError
from .index import Passage
from .predictors.generation import GenerationRecord
from .predictors.post import RankedList

SCORE_DECIMALS = 6  # run-file score precision


@dataclass(frozen=True)
class QuestionRecord:
    qid: str
    question: str
    answers: tuple[str, ...]


def _jsonl_objects(path: str | Path, error: type[Exception]) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise error(f"{path}:{lineno}: invalid JSON: {exc.msg}") from None
            if not isinstance(obj, dict):
                raise error(f"{path}:{lineno}: expected a JSON object")
            yield lineno, obj


def _require(obj: dict, key: str, kind: type, path: str | Path, lineno: int, error: type[Exception]):
    if key not in obj:
        raise error(f"{path}:{lineno}: missing field {key!r}")
    value = obj[key]
    if not isinstance(value, kind):
        raise error(f"{path}:{lineno}: field {key!r} must be {kind.__name__}")
    return value


def read_corpus(path: str | Path) -> Iterator[Passage]:
    """Stream passages from a JSONL file with doc_id/text fields."""
    for lineno, obj in _jsonl_objects(path, CorpusError):
        doc_id = _require(obj, "doc_id", str, path, lineno, CorpusError)
        text = _require(obj, "text", str, path, lineno, CorpusError)
        yield Passage(doc_id=doc_id, text=text)


def read_queries(path: str | Path) -> list[QuestionRecord]:
    records: list[QuestionRecord] = []
    seen: set[str] = set()
    for lineno, obj in _jsonl_objects(path, CorpusError):
        qid = _require(obj, "qid", str, path, lineno, CorpusError)
        question = _require(obj, "question", str, path, lineno, CorpusError)
        answers = _require(obj, "answers", list, path, lineno, CorpusError)
        if qid in seen:
            raise CorpusError(f"{path}:{lineno}: duplicate qid {qid!r}")
        if not answers or not all(isinstance(a, str) for a in answers):
            raise CorpusError(f"{path}:{lineno}: 'answers' must be a non-empty list of strings")
        seen.add(qid)
        records.append(QuestionRecord(qid=qid, question=question, answers=tuple(answers)))
    return records


def read_generation_log(path: str | Path) -> dict[str, dict[str, GenerationRecord]]:
    """Load generation records grouped as qid -> mode -> record."""
    log: dict[str, dict[str, GenerationRecord]] = {}
    for lineno, obj in _jsonl_objects(path, GenerationLogError):
        qid = _require(obj, "qid", str, path, lineno, GenerationLogError)
        mode = _require(obj, "mode", str, path, lineno, GenerationLogError)
        answer = _require(obj, "answer", str, path, lineno, GenerationLogError)
        entropies = _require(obj, "token_entropies", list, path, lineno, GenerationLogError)
        if not all(isinstance(h, (int, float)) for h in entropies):
            raise GenerationLogError(f"{path}:{lineno}: token_entropies must be numbers")
        try:
            record = GenerationRecord(
                qid=qid, mode=mode, answer=answer, token_entropies=tuple(float(h) for h in entropies)
            )
        except GenerationLogError as exc:
            raise GenerationLogError(f"{path}:{lineno}: {exc}") from None
        if mode in log.get(qid, {}):
            raise GenerationLogError(f"{path}:{lineno}: duplicate record for qid {qid!r} mode {mode!r}")
        log.setdefault(qid, {})[mode] = record
    return log


def read_score_table(path: str | Path) -> dict[str, float]:
    """Read a qid/value TSV; duplicate qids and non-finite values are rejected."""
    column: dict[str, float] = {}
    with open(path, encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    if not lines:
        raise ScoreTableError(f"{path}: empty file, expected a header line")
    header = lines[0].split("\t")
    if len(header) != 2 or header[0] != "qid":
        raise ScoreTableError(f"{path}:1: expected header 'qid<TAB><name>', got {lines[0]!r}")
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ScoreTableError(f"{path}:{lineno}: expected 2 tab-separated columns")
        qid, raw = parts
        try:
            value = float(raw)
        except ValueError:
            raise ScoreTableError(f"{path}:{lineno}: not a number: {raw!r}") from None
        if not math.isfinite(value):
            raise ScoreTableError(f"{path}:{lineno}: non-finite value {raw!r} for qid {qid!r}")
        if qid in column:
            raise ScoreTableError(f"{path}:{lineno}: duplicate qid {qid!r}")
        column[qid] = value
    return column


def write_score_table(path: str | Path, column: dict[str, float], value_header: str = "value") -> None:
    lines = [f"qid\t{value_header}"]
    for qid in sorted(column):
        lines.append(f"{qid}\t{column[qid]:.9g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_run_file(path: str | Path) -> dict[str, RankedList]:
    """Parse a 6-column TREC run into per-qid ranked lists.

    Validates rank contiguity (1, 2, ... per qid in file order), non-increasing
    scores, finite scores, and distinct doc_ids per qid.
    """
    ranks: dict[str, int] = {}
    scores: dict[str, float] = {}
    entries: dict[str, list[tuple[str, float]]] = {}
    seen_docs: dict[str, set[str]] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 6:
                raise RunFileError(f"{path}:{lineno}: expected 6 columns, got {len(parts)}")
            qid, _q0, doc_id, rank_raw, score_raw, _tag = parts
            try:
                rank = int(rank_raw)
            except ValueError:
                raise RunFileError(f"{path}:{lineno}: rank is not an integer: {rank_raw!r}") from None
            try:
                score = float(score_raw)
            except ValueError:
                raise RunFileError(f"{path}:{lineno}: score is not a number: {score_raw!r}") from None
            if not math.isfinite(score):
                raise RunFileError(f"{path}:{lineno}: non-finite score {score_raw!r}")
            expected = ranks.get(qid, 0) + 1
            if rank != expected:
                raise RunFileError(
                    f"{path}:{lineno}: rank {rank} for qid {qid!r}, expected {expected}"
                )
            if qid in scores and score > scores[qid]:
                raise RunFileError(
                    f"{path}:{lineno}: score {score} exceeds previous {scores[qid]} for qid {qid!r}"
                )
            if doc_id in seen_docs.get(qid, set()):
                raise RunFileError(f"{path}:{lineno}: duplicate doc_id {doc_id!r} for qid {qid!r}")
            ranks[qid] = rank
            scores[qid] = score
            seen_docs.setdefault(qid, set()).add(doc_id)
            entries.setdefault(qid, []).append((doc_id, score))
    return {qid: RankedList(qid=qid, entries=items) for qid, items in entries.items()}


def write_run_file(path: str | Path, lists: dict[str, RankedList], tag: str = "raggain") -> None:
    lines = []
    for qid in sorted(lists):
        for rank, (doc_id, score) in enumerate(lists[qid].entries, start=1):
            lines.append(f"{qid} Q0 {doc_id} {rank} {score:.{SCORE_DECIMALS}f} {tag}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_external_scores(path: str | Path, expected_qids: set[str], name: str) -> dict[str, float]:
    """Read a score table and require exact qid coverage."""
    from .predictors.generation import adapt_external_scores

    column = read_score_table(path)
    try:
        return adapt_external_scores(column, expected_qids, name=name)
    except ScoreTableError as exc:
        raise ScoreTableError(f"{path}: {exc}") from None
