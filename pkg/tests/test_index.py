"""Index, BM25 search, corpus score, and term statistics."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from raggain import (
    CorpusError,
    Passage,
    PredictorError,
    bm25_search,
    build_index,
    corpus_score,
    term_stats,
    tokenize,
)
from raggain.index import DEFAULT_B, DEFAULT_K1

from oracles import brute_force_bm25, brute_force_corpus_score


@pytest.fixture
def small_corpus():
    return [
        Passage("d1", "the quick brown fox jumps over the lazy dog"),
        Passage("d2", "a fox fled the hounds across the brown field"),
        Passage("d3", "quantum computing requires coherent qubits and cold hardware"),
    ]


@pytest.fixture
def small_index(small_corpus):
    return build_index(small_corpus)


class TestTokenize:
    def test_basic_normalization(self):
        assert tokenize("The Eiffel Tower!") == ["the", "eiffel", "tower"]

    def test_empty(self):
        assert tokenize("") == []

    def test_hyphen_is_separator(self):
        assert tokenize("a-b c") == ["a", "b", "c"]

    def test_stemmer_hook(self):
        assert tokenize("Dogs Cats", stemmer=lambda t: t.rstrip("s")) == ["dog", "cat"]

    @given(st.text())
    def test_deterministic_and_lowercase(self, text):
        first = tokenize(text)
        assert first == tokenize(text)
        assert all(tok == tok.lower() and tok for tok in first)


class TestBuildIndex:
    def test_counts(self):
        index = build_index([Passage("a", "one two three"), Passage("b", "four five six")])
        assert index.n_docs == 2
        assert index.total_tokens == 6

    def test_df_counts_documents(self, small_index):
        assert len(small_index.postings["fox"]) == 2
        assert len(small_index.postings["qubits"]) == 1

    def test_cf_vs_df(self):
        index = build_index([Passage("a", "red red blue"), Passage("b", "blue green red")])
        assert index.collection_tf["red"] == 3
        assert len(index.postings["red"]) == 2
        assert index.collection_tf["blue"] == 2

    def test_duplicate_doc_id_rejected(self):
        with pytest.raises(CorpusError, match="dup"):
            build_index([Passage("dup", "alpha"), Passage("dup", "beta")])

    def test_empty_passage_rejected(self):
        with pytest.raises(CorpusError, match="p9"):
            build_index([Passage("p9", "!!!")])

    def test_invariants(self, small_index):
        for term, plist in small_index.postings.items():
            assert len(plist) <= small_index.n_docs
            assert small_index.collection_tf[term] >= len(plist)
        assert sum(small_index.doc_lengths.values()) == small_index.total_tokens

    def test_rebuild_bit_identical(self, small_corpus):
        first = build_index(small_corpus)
        second = build_index(small_corpus)
        assert first.to_json() == second.to_json()

    def test_save_load_roundtrip(self, small_corpus, tmp_path):
        index = build_index(small_corpus)
        path = tmp_path / "index.json"
        index.save(path)
        from raggain import Index

        assert Index.load(path).to_json() == index.to_json()


class TestBm25Search:
    def test_dominance(self, small_index):
        hits = bm25_search(small_index, ["fox", "brown"], k=3)
        ids = [doc for doc, _ in hits]
        assert set(ids) == {"d1", "d2"}  # d3 has no query terms

    def test_matches_brute_force(self, small_index):
        query = ["fox", "brown", "qubits"]
        hits = bm25_search(small_index, query, k=3)
        oracle = brute_force_bm25(small_index, query)[:3]
        assert [doc for doc, _ in hits] == [doc for doc, _ in oracle]
        for (_, got), (_, want) in zip(hits, oracle):
            assert got == pytest.approx(want, abs=1e-9)

    def test_tie_broken_by_doc_id(self):
        index = build_index([Passage("b", "tied token"), Passage("a", "tied token")])
        hits = bm25_search(index, ["tied"], k=2)
        assert [doc for doc, _ in hits] == ["a", "b"]
        assert hits[0][1] == hits[1][1]

    def test_fewer_than_k(self, small_index):
        assert len(bm25_search(small_index, ["qubits"], k=10)) == 1

    def test_empty_query_rejected(self, small_index):
        with pytest.raises(PredictorError, match="empty query"):
            bm25_search(small_index, [], k=5)

    def test_k_validated(self, small_index):
        with pytest.raises(PredictorError):
            bm25_search(small_index, ["fox"], k=0)

    def test_duplicate_query_terms_double_count(self, small_index):
        single = dict(bm25_search(small_index, ["fox"], k=3))
        double = dict(bm25_search(small_index, ["fox", "fox"], k=3))
        for doc in single:
            assert double[doc] == pytest.approx(2 * single[doc], rel=1e-12)

    def test_monotone_in_tf(self):
        # More occurrences of the query term, same length, never scores lower.
        lower = build_index([Passage("x", "apple pear plum grape")])
        higher = build_index([Passage("x", "apple apple plum grape")])
        s_low = bm25_search(lower, ["apple"], k=1)[0][1]
        s_high = bm25_search(higher, ["apple"], k=1)[0][1]
        assert s_high >= s_low

    @settings(max_examples=30, deadline=None)
    @given(st.integers(min_value=1, max_value=9999))
    def test_random_corpora_match_oracle(self, seed):
        import random

        rng = random.Random(seed)
        vocab = [f"w{i}" for i in range(12)]
        n_docs = rng.randint(2, 15)
        passages = [
            Passage(f"doc{i:02d}", " ".join(rng.choices(vocab, k=rng.randint(3, 12))))
            for i in range(n_docs)
        ]
        index = build_index(passages)
        query = rng.choices(vocab, k=rng.randint(1, 4))
        k = rng.randint(1, n_docs)
        hits = bm25_search(index, query, k=k)
        oracle = brute_force_bm25(index, query)[:k]
        assert [doc for doc, _ in hits] == [doc for doc, _ in oracle]
        for (_, got), (_, want) in zip(hits, oracle):
            assert got == pytest.approx(want, abs=1e-9)


class TestCorpusScore:
    def test_single_doc_equals_doc_score(self):
        index = build_index([Passage("only", "solar panels convert light")])
        query = ["solar", "light"]
        doc_score = bm25_search(index, query, k=1)[0][1]
        assert corpus_score(index, query) == pytest.approx(doc_score, abs=1e-12)

    def test_absent_term_contributes_zero(self, small_index):
        with_term = corpus_score(small_index, ["fox"])
        with_extra = corpus_score(small_index, ["fox", "zzzz"])
        assert with_extra == with_term

    def test_matches_hand_formula(self, small_index):
        query = ["fox", "the"]
        assert corpus_score(small_index, query) == pytest.approx(
            brute_force_corpus_score(small_index, query), abs=1e-9
        )

    def test_empty_query_rejected(self, small_index):
        with pytest.raises(PredictorError):
            corpus_score(small_index, [])


class TestTermStats:
    def test_idf_hand_value(self):
        passages = [Passage(f"d{i}", "filler tokens here") for i in range(3)]
        passages.append(Passage("d3", "shared filler appears shared"))
        index = build_index(passages)
        # N=4; "filler" in all 4 docs; "shared" in 1
        assert term_stats(index, "shared").df == 1
        stats = term_stats(index, "filler")
        assert stats.df == 4
        assert stats.idf == pytest.approx(math.log(1.0), abs=1e-12)

    def test_idf_ln_n_over_df(self, small_index):
        stats = term_stats(small_index, "fox")
        assert stats.idf == pytest.approx(math.log(3 / 2), abs=1e-12)

    def test_scq_formula(self, small_index):
        stats = term_stats(small_index, "the")
        # "the" appears 4 times across 2 docs; N=3
        assert stats.cf == 4
        assert stats.df == 2
        assert stats.scq == pytest.approx((1 + math.log(4)) * math.log(1 + 3 / 2), abs=1e-12)

    def test_var_zero_for_df_one(self, small_index):
        assert term_stats(small_index, "qubits").var == 0.0

    def test_var_population(self):
        index = build_index([
            Passage("a", "term term other"),
            Passage("b", "term filler words"),
        ])
        stats = term_stats(index, "term")
        idf = math.log(2 / 2)
        weights = [(1 + math.log(2)) * idf, (1 + math.log(1)) * idf]
        mean = sum(weights) / 2
        expected = sum((w - mean) ** 2 for w in weights) / 2
        assert stats.var == pytest.approx(expected, abs=1e-12)

    def test_unindexed_term_all_zero(self, small_index):
        stats = term_stats(small_index, "nonexistent")
        assert (stats.df, stats.cf, stats.idf, stats.scq, stats.var) == (0, 0, 0.0, 0.0, 0.0)

    def test_idf_strictly_decreasing_in_df(self):
        # Same N, increasing df -> strictly smaller idf.
        n = 6
        passages = [Passage(f"d{i}", "base word") for i in range(n)]
        for i in range(2):
            passages[i] = Passage(f"d{i}", "base word two")
        for i in range(4):
            passages[i] = Passage(f"d{i}", passages[i].text + " four")
        index = build_index(passages)
        idfs = [term_stats(index, t).idf for t in ("two", "four", "base")]
        dfs = [term_stats(index, t).df for t in ("two", "four", "base")]
        assert dfs == [2, 4, 6]
        assert idfs[0] > idfs[1] > idfs[2]
