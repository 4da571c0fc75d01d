"""Deterministic 50-passage / 20-question synthetic fixture shared by tests.

Exact-match outcomes are constructed per question: q01-q06 lose quality with
retrieval (negative gain), q07-q10 are unchanged (zero gain), q11-q20 improve
(positive gain), so the em-gain column has a 0.30 negative fraction.
"""

import json
import math
import random
from dataclasses import dataclass
from pathlib import Path

import pytest

from raggain import Passage, RankedList, build_index, bm25_search, tokenize
from raggain import io as tio

FIXTURE_SEED = 13

TOPICS = [
    "volcano", "harbor", "glacier", "meadow", "comet", "reef", "canyon", "orchid",
    "falcon", "lagoon", "tundra", "geyser", "mangrove", "aurora", "dune", "fjord",
    "savanna", "delta", "atoll", "monsoon",
]

FILLER = [
    "records", "describe", "ancient", "travelers", "region", "climate", "stone",
    "water", "light", "season", "village", "coast", "story", "map", "survey",
    "winter", "summer", "trade", "route", "valley", "north", "south", "field",
    "river",
]


@dataclass
class Fixture:
    root: Path
    corpus: Path
    queries: Path
    run: Path
    reference_run: Path
    generation_log: Path
    e5_rag: Path
    e5_norag: Path
    config: Path
    qids: list[str]
    em_gain_sign: dict[str, int]  # -1 / 0 / +1 per question

    def config_text(self) -> str:
        return self.config.read_text(encoding="utf-8")


def _answer_texts(kind: str, topic: str) -> tuple[str, str]:
    """(rag answer, norag answer) controlling exact-match per gain sign."""
    correct = f"It is the {topic} landmark."
    wrong = "No clear answer comes to mind."
    if kind == "negative":
        return wrong, correct
    if kind == "zero":
        return correct, correct
    return correct, wrong


def build_fixture(root: Path) -> Fixture:
    rng = random.Random(FIXTURE_SEED)
    root.mkdir(parents=True, exist_ok=True)

    passages = []
    for i in range(50):
        topic = TOPICS[i % 20]
        words = [topic] + rng.choices(FILLER, k=rng.randint(8, 14))
        rng.shuffle(words)
        passages.append(Passage(f"D{i:03d}", " ".join(words)))
    corpus_path = root / "corpus.jsonl"
    with open(corpus_path, "w", encoding="utf-8") as handle:
        for p in passages:
            handle.write(json.dumps({"doc_id": p.doc_id, "text": p.text}) + "\n")

    qids = [f"q{i:02d}" for i in range(1, 21)]
    kinds = {q: ("negative" if i < 6 else "zero" if i < 10 else "positive")
             for i, q in enumerate(qids)}
    queries_path = root / "queries.jsonl"
    questions = {}
    with open(queries_path, "w", encoding="utf-8") as handle:
        for i, qid in enumerate(qids):
            topic = TOPICS[i]
            extra = rng.sample(FILLER, k=2)
            # keyword questions: every term is indexed, so no pre-retrieval
            # statistic collapses to a constant column
            question = f"{topic} {extra[0]} {extra[1]}"
            questions[qid] = question
            handle.write(json.dumps(
                {"qid": qid, "question": question, "answers": [f"the {topic} landmark", topic.upper()]}
            ) + "\n")

    index = build_index(passages)
    run_lists = {}
    for qid in qids:
        hits = bm25_search(index, tokenize(questions[qid]), k=20)
        run_lists[qid] = RankedList(qid=qid, entries=hits)
    run_path = root / "original.run"
    tio.write_run_file(run_path, run_lists, tag="fixture")

    reference_lists = {}
    for qid in qids:
        docs = run_lists[qid].doc_ids()
        permuted = list(docs)
        for j in range(0, len(permuted) - 1, 2):  # swap adjacent pairs
            permuted[j], permuted[j + 1] = permuted[j + 1], permuted[j]
        entries = [(doc, float(len(permuted) - r)) for r, doc in enumerate(permuted)]
        reference_lists[qid] = RankedList(qid=qid, entries=entries)
    reference_path = root / "reference.run"
    tio.write_run_file(reference_path, reference_lists, tag="reranked")

    log_path = root / "gen.jsonl"
    em_gain_sign = {}
    with open(log_path, "w", encoding="utf-8") as handle:
        for i, qid in enumerate(qids):
            kind = kinds[qid]
            em_gain_sign[qid] = {"negative": -1, "zero": 0, "positive": 1}[kind]
            rag_answer, norag_answer = _answer_texts(kind, TOPICS[i])
            if kind == "positive":
                norag_h = [rng.uniform(2.0, 4.0) for _ in range(rng.randint(3, 8))]
                rag_h = [rng.uniform(0.2, 1.0) for _ in range(rng.randint(3, 8))]
            elif kind == "negative":
                norag_h = [rng.uniform(0.2, 1.0) for _ in range(rng.randint(3, 8))]
                rag_h = [rng.uniform(2.0, 4.0) for _ in range(rng.randint(3, 8))]
            else:
                norag_h = [rng.uniform(0.8, 2.2) for _ in range(rng.randint(3, 8))]
                rag_h = [rng.uniform(0.8, 2.2) for _ in range(rng.randint(3, 8))]
            handle.write(json.dumps({
                "qid": qid, "mode": "rag", "answer": rag_answer,
                "token_entropies": [round(h, 6) for h in rag_h],
            }) + "\n")
            handle.write(json.dumps({
                "qid": qid, "mode": "norag", "answer": norag_answer,
                "token_entropies": [round(h, 6) for h in norag_h],
            }) + "\n")

    def clamp01(x):
        return min(1.0, max(0.0, x))

    e5_rag, e5_norag = {}, {}
    for qid in qids:
        sign = em_gain_sign[qid]
        em_rag = 1.0 if sign >= 0 else 0.0
        em_norag = 1.0 if sign <= 0 else 0.0
        e5_rag[qid] = clamp01(0.2 + 0.55 * em_rag + 0.25 * rng.random())
        e5_norag[qid] = clamp01(0.2 + 0.55 * em_norag + 0.25 * rng.random())
    e5_rag_path = root / "e5.rag.tsv"
    e5_norag_path = root / "e5.norag.tsv"
    tio.write_score_table(e5_rag_path, e5_rag)
    tio.write_score_table(e5_norag_path, e5_norag)

    config_path = root / "experiment.cfg"
    unsupervised = ("mean_idf,max_idf,min_idf,mean_scq,max_scq,min_scq,"
                    "mean_var,max_var,min_var,wig,u_wig,nqc,qc,smv,u_smv,ref")
    config_path.write_text(
        "# synthetic desk-scale experiment\n"
        f"corpus = {corpus_path}\n"
        f"queries = {queries_path}\n"
        f"run = {run_path}\n"
        f"reference_run = {reference_path}\n"
        f"generation_log = {log_path}\n"
        f"predictors = {unsupervised},uncertainty\n"
        "quality_metrics = em,e5\n"
        f"quality_file.e5.rag = {e5_rag_path}\n"
        f"quality_file.e5.norag = {e5_norag_path}\n"
        "rbo_p = 0.9\n"
        "rbo_depth = 20\n"
        "pool = max\n"
        f"baseline_group.unsupervised = {unsupervised}\n"
        "baseline_group.all = *\n"
        "seed = 13\n",
        encoding="utf-8",
    )

    return Fixture(
        root=root,
        corpus=corpus_path,
        queries=queries_path,
        run=run_path,
        reference_run=reference_path,
        generation_log=log_path,
        e5_rag=e5_rag_path,
        e5_norag=e5_norag_path,
        config=config_path,
        qids=qids,
        em_gain_sign=em_gain_sign,
    )


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory) -> Fixture:
    return build_fixture(tmp_path_factory.mktemp("fixture"))


@pytest.fixture(scope="session")
def em_gain_values(fixture_dir) -> dict[str, float]:
    magnitude = math.log(1.0 / 1e-6)
    return {q: sign * magnitude for q, sign in fixture_dir.em_gain_sign.items()}
