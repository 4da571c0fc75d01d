"""Lexical index over a passage corpus: BM25 search, term statistics, corpus score.

Scoring conventions (pinned here so every oracle can reproduce them):

    idf(t)        = ln(N / df(t))
    score(d, q)   = sum over query tokens t of
                    idf(t) * tf(t,d) * (k1 + 1) / (tf(t,d) + k1 * (1 - b + b * |d| / avgdl))
    corpus score  = same function applied to the whole collection treated as one
                    pseudo-document with length = total_tokens and tf(t) = cf(t)
    w(t,d)        = (1 + ln tf(t,d)) * idf(t)   (tf-idf weight used by the VAR statistic)

Query tokens are a multiset: a duplicated token contributes twice. Documents that
contain none of the query terms are never returned by search.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

from .errors import CorpusError, PredictorError

DEFAULT_K1 = 0.9
DEFAULT_B = 0.4

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str, stemmer: Callable[[str], str] | None = None) -> list[str]:
    """Lowercase, split on anything that is not ASCII alphanumeric.

    ``stemmer`` is an optional per-token hook; none is applied by default.
    """
    tokens = _TOKEN_RE.findall(text.lower())
    if stemmer is not None:
        tokens = [stemmer(tok) for tok in tokens]
    return tokens


@dataclass(frozen=True)
class Passage:
    doc_id: str
    text: str


@dataclass(frozen=True)
class TermStats:
    term: str
    df: int
    cf: int
    idf: float
    scq: float
    var: float


@dataclass
class Index:
    """Immutable after build; all search/stats operations are pure reads.

    postings map term -> list of (doc_id, tf) sorted by doc_id.
    """

    postings: dict[str, list[tuple[str, int]]] = field(default_factory=dict)
    doc_lengths: dict[str, int] = field(default_factory=dict)
    n_docs: int = 0
    total_tokens: int = 0
    collection_tf: dict[str, int] = field(default_factory=dict)

    @property
    def avgdl(self) -> float:
        return self.total_tokens / self.n_docs if self.n_docs else 0.0

    def to_json(self) -> str:
        payload = {
            "n_docs": self.n_docs,
            "total_tokens": self.total_tokens,
            "doc_lengths": self.doc_lengths,
            "collection_tf": self.collection_tf,
            "postings": {t: [[d, tf] for d, tf in plist] for t, plist in self.postings.items()},
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Index":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            postings={t: [(d, tf) for d, tf in plist] for t, plist in payload["postings"].items()},
            doc_lengths=payload["doc_lengths"],
            n_docs=payload["n_docs"],
            total_tokens=payload["total_tokens"],
            collection_tf=payload["collection_tf"],
        )


def build_index(corpus: Iterable[Passage], stemmer: Callable[[str], str] | None = None) -> Index:
    """Build an index from a passage stream.

    Rejects duplicate doc_ids and passages that are empty after tokenization;
    rebuilding on the same input yields a bit-identical index.
    """
    postings: dict[str, dict[str, int]] = {}
    doc_lengths: dict[str, int] = {}
    total_tokens = 0
    for passage in corpus:
        if passage.doc_id in doc_lengths:
            raise CorpusError(f"duplicate doc_id: {passage.doc_id!r}")
        tokens = tokenize(passage.text, stemmer)
        if not tokens:
            raise CorpusError(f"passage {passage.doc_id!r} is empty after tokenization")
        doc_lengths[passage.doc_id] = len(tokens)
        total_tokens += len(tokens)
        counts: dict[str, int] = {}
        for tok in tokens:
            counts[tok] = counts.get(tok, 0) + 1
        for tok, tf in counts.items():
            postings.setdefault(tok, {})[passage.doc_id] = tf

    sorted_postings = {
        term: sorted(docs.items()) for term, docs in sorted(postings.items())
    }
    collection_tf = {
        term: sum(tf for _, tf in plist) for term, plist in sorted_postings.items()
    }
    return Index(
        postings=sorted_postings,
        doc_lengths=dict(sorted(doc_lengths.items())),
        n_docs=len(doc_lengths),
        total_tokens=total_tokens,
        collection_tf=collection_tf,
    )


def idf(index: Index, term: str) -> float:
    """ln(N / df); 0.0 for unindexed terms."""
    plist = index.postings.get(term)
    if not plist:
        return 0.0
    return math.log(index.n_docs / len(plist))


def _bm25_term(tf: int, dl: float, avgdl: float, term_idf: float, k1: float, b: float) -> float:
    denom = tf + k1 * (1.0 - b + b * dl / avgdl)
    return term_idf * tf * (k1 + 1.0) / denom


def bm25_search(
    index: Index,
    query: list[str],
    k: int,
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
) -> list[tuple[str, float]]:
    """Top-k (doc_id, score) by BM25, descending; ties broken by doc_id.

    Only documents containing at least one query term are candidates, so fewer
    than k results are returned when fewer documents match.
    """
    if not query:
        raise PredictorError("empty query: retrieval would be unpredictable")
    if k < 1:
        raise PredictorError(f"k must be >= 1, got {k}")
    avgdl = index.avgdl
    scores: dict[str, float] = {}
    for term in query:
        plist = index.postings.get(term)
        if not plist:
            continue
        term_idf = math.log(index.n_docs / len(plist))
        for doc_id, tf in plist:
            contrib = _bm25_term(tf, index.doc_lengths[doc_id], avgdl, term_idf, k1, b)
            scores[doc_id] = scores.get(doc_id, 0.0) + contrib
    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:k]


def corpus_score(
    index: Index,
    query: list[str],
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
) -> float:
    """BM25 score of the whole corpus treated as one pseudo-document.

    The pseudo-document has length total_tokens and term frequency cf(t);
    query terms absent from the corpus contribute 0.
    """
    if not query:
        raise PredictorError("empty query: corpus score undefined")
    avgdl = index.avgdl
    score = 0.0
    for term in query:
        cf = index.collection_tf.get(term, 0)
        if cf == 0:
            continue
        term_idf = math.log(index.n_docs / len(index.postings[term]))
        score += _bm25_term(cf, float(index.total_tokens), avgdl, term_idf, k1, b)
    return score


def term_stats(index: Index, term: str) -> TermStats:
    """df, cf, idf, scq and tf-idf weight variance for one term.

    scq = (1 + ln cf) * ln(1 + N/df); var is the population variance of
    w(t,d) over the df documents containing the term. Unindexed terms get
    all-zero statistics.
    """
    plist = index.postings.get(term)
    if not plist:
        return TermStats(term=term, df=0, cf=0, idf=0.0, scq=0.0, var=0.0)
    df = len(plist)
    cf = index.collection_tf[term]
    term_idf = math.log(index.n_docs / df)
    scq = (1.0 + math.log(cf)) * math.log(1.0 + index.n_docs / df)
    weights = [(1.0 + math.log(tf)) * term_idf for _, tf in plist]
    mean_w = sum(weights) / df
    var = sum((w - mean_w) ** 2 for w in weights) / df
    return TermStats(term=term, df=df, cf=cf, idf=term_idf, scq=scq, var=var)
