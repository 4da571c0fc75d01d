"""Offline fixtures: tiny randomly initialized models plus synthetic data files.

The models are built from configs (no downloads) and saved to a session tmp
dir so every code path loads checkpoints exactly as it would real ones.
"""

import json
import os
import random
from pathlib import Path

import pytest
import torch

os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")

VOCAB_WORDS = [f"w{i}" for i in range(60)] + [
    "landmark", "river", "city", "who", "built", "the", "answer", "question",
    # prompt-template words, so rendered prompts do not collapse to [UNK]
    "You", "are", "an", "AI", "assistant", "that", "answers", "questions",
    "Answer", "Question", "concisely", "based", "on", "following", "passages",
    "Passage", "1", "2", "3", "4", "5", ".", ":", "?", ",",
]
SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[EOS]"]


def _fast_tokenizer():
    from tokenizers import Tokenizer
    from tokenizers.models import WordLevel
    from tokenizers.pre_tokenizers import Whitespace
    from transformers import PreTrainedTokenizerFast

    vocab = {tok: i for i, tok in enumerate(SPECIALS + VOCAB_WORDS)}
    tok = Tokenizer(WordLevel(vocab, unk_token="[UNK]"))
    tok.pre_tokenizer = Whitespace()
    return PreTrainedTokenizerFast(
        tokenizer_object=tok,
        pad_token="[PAD]",
        unk_token="[UNK]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        eos_token="[EOS]",
    )


def _bert_config(**overrides):
    from transformers import BertConfig

    base = dict(
        vocab_size=len(SPECIALS) + len(VOCAB_WORDS),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=128,
    )
    base.update(overrides)
    return BertConfig(**base)


@pytest.fixture(scope="session")
def tiny_models(tmp_path_factory):
    from transformers import (
        BertForSequenceClassification,
        BertModel,
        GPT2Config,
        GPT2LMHeadModel,
    )

    root = tmp_path_factory.mktemp("tiny_models")
    tokenizer = _fast_tokenizer()
    torch.manual_seed(1234)

    paths = {}

    lm_dir = root / "causal"
    lm = GPT2LMHeadModel(GPT2Config(
        vocab_size=len(SPECIALS) + len(VOCAB_WORDS),
        n_embd=32, n_layer=2, n_head=2, n_positions=256,
        bos_token_id=4, eos_token_id=4,
    ))
    lm.save_pretrained(lm_dir)
    tokenizer.save_pretrained(lm_dir)
    paths["causal"] = str(lm_dir)

    enc_dir = root / "encoder"
    BertModel(_bert_config()).save_pretrained(enc_dir)
    tokenizer.save_pretrained(enc_dir)
    paths["encoder"] = str(enc_dir)

    reg_dir = root / "single_logit"
    BertForSequenceClassification(_bert_config(num_labels=1)).save_pretrained(reg_dir)
    tokenizer.save_pretrained(reg_dir)
    paths["single_logit"] = str(reg_dir)

    nli_dir = root / "nli"
    BertForSequenceClassification(_bert_config(
        num_labels=3,
        id2label={0: "entailment", 1: "neutral", 2: "contradiction"},
        label2id={"entailment": 0, "neutral": 1, "contradiction": 2},
    )).save_pretrained(nli_dir)
    tokenizer.save_pretrained(nli_dir)
    paths["nli"] = str(nli_dir)

    return paths


@pytest.fixture(scope="session")
def data_dir(tmp_path_factory):
    """Corpus, queries, run, generation log, and gain targets from the vocabulary."""
    rng = random.Random(7)
    root = tmp_path_factory.mktemp("data")

    doc_ids = [f"D{i:03d}" for i in range(30)]
    with open(root / "corpus.jsonl", "w", encoding="utf-8") as handle:
        for i, doc_id in enumerate(doc_ids):
            words = rng.choices(VOCAB_WORDS[:60], k=rng.randint(6, 12))
            # question terms w0..w11 appear with tf 2 in one doc and tf 1 in
            # another, so their tf-idf weight variance is never degenerate
            if i < 12:
                words += [f"w{i}", f"w{i}"]
            elif i < 24:
                words += [f"w{i - 12}"]
            rng.shuffle(words)
            handle.write(json.dumps({"doc_id": doc_id, "text": " ".join(words)}) + "\n")

    qids = [f"q{i:02d}" for i in range(12)]
    with open(root / "queries.jsonl", "w", encoding="utf-8") as handle:
        for i, qid in enumerate(qids):
            question = f"who built the w{i} landmark"
            handle.write(json.dumps(
                {"qid": qid, "question": question, "answers": [f"w{i} landmark", f"w{i}"]}
            ) + "\n")

    run_lines = []
    for qid in qids:
        docs = rng.sample(doc_ids, 6)
        score = rng.uniform(8.0, 12.0)
        for rank, doc_id in enumerate(docs, start=1):
            run_lines.append(f"{qid} Q0 {doc_id} {rank} {score:.6f} fixture")
            score -= rng.uniform(0.2, 1.2)  # stays positive across 6 ranks
    (root / "bm25.run").write_text("\n".join(run_lines) + "\n", encoding="utf-8")

    with open(root / "gen.jsonl", "w", encoding="utf-8") as handle:
        for i, qid in enumerate(qids):
            rag_answer = f"the w{i} landmark" if i % 3 else "city river"
            norag_answer = f"w{i} landmark" if i % 2 else "river city answer"
            for mode, answer in (("rag", rag_answer), ("norag", norag_answer)):
                entropies = [round(rng.uniform(0.1, 2.5), 6) for _ in range(rng.randint(2, 6))]
                handle.write(json.dumps({
                    "qid": qid, "mode": mode, "answer": answer,
                    "token_entropies": entropies,
                }) + "\n")

    gains = {qid: round(rng.uniform(-1.5, 1.5), 6) for qid in qids}
    lines = ["qid\tgain"] + [f"{qid}\t{gains[qid]:.9g}" for qid in sorted(gains)]
    (root / "gains.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    return root
