"""Generation harness: entropies, determinism, sidecar handling."""

import json
import math

import pytest
import torch

from raggain_neural import (
    GenerationSettings,
    generate_log,
    greedy_generate_with_entropy,
    token_entropy,
)
from raggain_neural.formats import read_queries
from raggain_neural.models import load_causal_lm, load_tokenizer


def test_entropy_of_one_hot_distribution_is_zero():
    logits = torch.full((50,), -1e9)
    logits[7] = 1e9
    assert token_entropy(logits) == pytest.approx(0.0, abs=1e-9)


def test_entropy_of_uniform_distribution_is_log_vocab():
    logits = torch.zeros(128)
    assert token_entropy(logits) == pytest.approx(math.log(128), abs=1e-5)


def test_entropy_nonnegative_on_random_logits():
    rng = torch.Generator().manual_seed(3)
    for _ in range(50):
        logits = torch.randn(97, generator=rng) * 10
        assert token_entropy(logits) >= 0.0


@pytest.fixture(scope="module")
def lm(tiny_models):
    return load_causal_lm(tiny_models["causal"]), load_tokenizer(tiny_models["causal"])


class TestGreedyGeneration:
    def test_deterministic_across_reruns(self, lm):
        model, tokenizer = lm
        first = greedy_generate_with_entropy(model, tokenizer, "w1 w2 w3", max_new_tokens=8)
        second = greedy_generate_with_entropy(model, tokenizer, "w1 w2 w3", max_new_tokens=8)
        assert first == second

    def test_one_entropy_per_emitted_token(self, lm):
        model, tokenizer = lm
        answer, entropies = greedy_generate_with_entropy(
            model, tokenizer, "w5 w6", max_new_tokens=8
        )
        emitted = tokenizer(answer, add_special_tokens=False)["input_ids"] if answer else []
        assert len(entropies) == len(emitted)

    def test_entropies_bounded_by_log_vocab(self, lm):
        model, tokenizer = lm
        _, entropies = greedy_generate_with_entropy(model, tokenizer, "w9", max_new_tokens=8)
        bound = math.log(model.config.vocab_size)
        for h in entropies:
            assert 0.0 <= h <= bound + 1e-6


class TestGenerateLog:
    def test_log_and_sidecar(self, tiny_models, data_dir, tmp_path):
        model = load_causal_lm(tiny_models["causal"])
        tokenizer = load_tokenizer(tiny_models["causal"])
        questions = read_queries(data_dir / "queries.jsonl")[:4]
        out = tmp_path / "gen.jsonl"
        errors = tmp_path / "gen.errors.jsonl"
        ok, failed = generate_log(
            model, tokenizer, questions, None, ("norag",), out, errors,
            GenerationSettings(max_new_tokens=6),
        )
        assert ok + failed == 4
        records = [json.loads(line) for line in out.read_text().splitlines() if line]
        assert len(records) == ok
        for record in records:
            assert record["mode"] == "norag"
            assert record["answer"].strip()
            assert len(record["token_entropies"]) >= 1
        sidecar = [json.loads(line) for line in errors.read_text().splitlines() if line]
        assert len(sidecar) == failed
        for entry in sidecar:
            assert entry["qid"] and entry["error"]

    def test_rag_mode_requires_passages(self, tiny_models, data_dir, tmp_path):
        from raggain_neural.errors import InputError

        model = load_causal_lm(tiny_models["causal"])
        tokenizer = load_tokenizer(tiny_models["causal"])
        questions = read_queries(data_dir / "queries.jsonl")[:1]
        with pytest.raises(InputError, match="passages"):
            generate_log(model, tokenizer, questions, None, ("rag",),
                         tmp_path / "o.jsonl", tmp_path / "e.jsonl")

    def test_rerun_is_identical(self, tiny_models, data_dir, tmp_path):
        model = load_causal_lm(tiny_models["causal"])
        tokenizer = load_tokenizer(tiny_models["causal"])
        questions = read_queries(data_dir / "queries.jsonl")[:3]
        out1, out2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        generate_log(model, tokenizer, questions, None, ("norag",), out1,
                     tmp_path / "e1.jsonl", GenerationSettings(max_new_tokens=6))
        generate_log(model, tokenizer, questions, None, ("norag",), out2,
                     tmp_path / "e2.jsonl", GenerationSettings(max_new_tokens=6))
        assert out1.read_bytes() == out2.read_bytes()
