"""Supervised gain regressors on a cross-encoder backbone.

Two input variants share one architecture (pooled first-token representation
feeding a linear head, trained end-to-end with MSE):

    post:  [CLS] question [SEP] p1 [SEP] ... [SEP] p5 [SEP]
    gen:   [CLS] question [SEP] answer_norag [SEP] answer_rag [SEP] p1 [SEP] ... [SEP]

Defaults follow the training recipe: AdamW, lr 5e-5, batch size 16, two
epochs, maximum input length 8192; the checkpoint with the best validation
MSE is kept. Over-length inputs are truncated from the passage tail only
(never the question or the answers) and the count is reported.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import torch
from torch import nn

from .errors import InputError, ModelLoadError
from .formats import Question
from .models import load_encoder, load_tokenizer

VARIANTS = ("post", "gen")

DEFAULT_LR = 5e-5
DEFAULT_BATCH_SIZE = 16
DEFAULT_EPOCHS = 2
DEFAULT_MAX_LENGTH = 8192
DEFAULT_TOP_PASSAGES = 5


@dataclass(frozen=True)
class SupervisedExample:
    qid: str
    question: str
    passages: tuple[str, ...]
    answers: tuple[str, ...] = ()  # (norag, rag) for the gen variant
    target: float | None = None


@dataclass
class TrainSettings:
    lr: float = DEFAULT_LR
    batch_size: int = DEFAULT_BATCH_SIZE
    epochs: int = DEFAULT_EPOCHS
    max_length: int = DEFAULT_MAX_LENGTH
    max_steps: int | None = None
    seed: int = 0

    def config_hash(self, variant: str, backbone: str) -> str:
        payload = json.dumps(
            [variant, backbone, self.lr, self.batch_size, self.epochs, self.max_length],
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


def build_examples(
    variant: str,
    questions: list[Question],
    run: dict[str, list[tuple[str, float]]],
    corpus_texts: dict[str, str],
    generation_log: dict[str, dict[str, dict]] | None = None,
    targets: dict[str, float] | None = None,
    top_passages: int = DEFAULT_TOP_PASSAGES,
) -> list[SupervisedExample]:
    if variant not in VARIANTS:
        raise InputError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if variant == "gen" and generation_log is None:
        raise InputError("the gen variant needs the generation log for both answers")
    examples = []
    for question in questions:
        qid = question.qid
        if qid not in run or not run[qid]:
            raise InputError(f"qid {qid!r}: no retrieved passages in the run")
        entries = run[qid][:top_passages]
        missing = sorted(d for d, _ in entries if d not in corpus_texts)
        if missing:
            raise InputError(f"qid {qid}: passages missing from corpus: {missing}")
        passages = tuple(corpus_texts[d] for d, _ in entries)
        answers: tuple[str, ...] = ()
        if variant == "gen":
            modes = generation_log.get(qid, {})
            if "norag" not in modes or "rag" not in modes:
                raise InputError(f"qid {qid!r}: generation log lacks a rag or norag answer")
            answers = (modes["norag"]["answer"], modes["rag"]["answer"])
        target = None
        if targets is not None:
            if qid not in targets:
                raise InputError(f"qid {qid!r}: no gain target")
            target = targets[qid]
        examples.append(SupervisedExample(
            qid=qid, question=question.question, passages=passages,
            answers=answers, target=target,
        ))
    return examples


def _special_ids(tokenizer) -> tuple[int, int]:
    cls_id = tokenizer.cls_token_id
    sep_id = tokenizer.sep_token_id
    if cls_id is None:
        cls_id = tokenizer.bos_token_id
    if sep_id is None:
        sep_id = tokenizer.eos_token_id
    if cls_id is None or sep_id is None:
        raise ModelLoadError("tokenizer defines neither cls/sep nor bos/eos tokens")
    return cls_id, sep_id


def encode_example(tokenizer, example: SupervisedExample, max_length: int) -> tuple[list[int], bool]:
    """Token ids for one example; True when passage tokens were cut."""
    cls_id, sep_id = _special_ids(tokenizer)

    def piece(text: str) -> list[int]:
        return tokenizer(text, add_special_tokens=False)["input_ids"]

    ids = [cls_id] + piece(example.question) + [sep_id]
    for answer in example.answers:
        ids += piece(answer) + [sep_id]
    if len(ids) > max_length:
        raise InputError(
            f"qid {example.qid}: question and answers alone are {len(ids)} tokens "
            f"(limit {max_length}); passages cannot be truncated into a valid input"
        )
    passage_ids: list[int] = []
    for passage in example.passages:
        passage_ids += piece(passage) + [sep_id]
    budget = max_length - len(ids)
    truncated = len(passage_ids) > budget
    return ids + passage_ids[:budget], truncated


class GainRegressor(nn.Module):
    """Encoder with a linear head on the pooled first-token representation."""

    def __init__(self, encoder):
        super().__init__()
        self.encoder = encoder
        self.head = nn.Linear(encoder.config.hidden_size, 1)

    def forward(self, input_ids, attention_mask):
        hidden = self.encoder(input_ids=input_ids, attention_mask=attention_mask)
        pooled = hidden.last_hidden_state[:, 0]
        return self.head(pooled).squeeze(-1)


def _batches(encoded, targets, batch_size, pad_id):
    for start in range(0, len(encoded), batch_size):
        chunk = encoded[start:start + batch_size]
        width = max(len(ids) for ids in chunk)
        input_ids = torch.full((len(chunk), width), pad_id, dtype=torch.long)
        mask = torch.zeros((len(chunk), width), dtype=torch.long)
        for row, ids in enumerate(chunk):
            input_ids[row, : len(ids)] = torch.tensor(ids, dtype=torch.long)
            mask[row, : len(ids)] = 1
        batch_targets = None
        if targets is not None:
            batch_targets = torch.tensor(targets[start:start + batch_size], dtype=torch.float32)
        yield input_ids, mask, batch_targets


@torch.no_grad()
def _mse(model, encoded, targets, batch_size, pad_id) -> float:
    model.eval()
    total = 0.0
    count = 0
    for input_ids, mask, batch_targets in _batches(encoded, targets, batch_size, pad_id):
        preds = model(input_ids, mask)
        total += float(((preds - batch_targets) ** 2).sum())
        count += len(batch_targets)
    return total / count


@dataclass
class TrainResult:
    artifact_dir: Path
    truncated_train: int
    truncated_val: int
    train_mse_per_epoch: list[float] = field(default_factory=list)
    val_mse_per_epoch: list[float] = field(default_factory=list)
    best_epoch: int = 0
    steps: int = 0
    validation_scores: dict[str, float] = field(default_factory=dict)


def train_supervised(
    variant: str,
    backbone: str,
    train_examples: list[SupervisedExample],
    val_examples: list[SupervisedExample],
    artifact_dir: str | Path,
    settings: TrainSettings | None = None,
) -> TrainResult:
    if variant not in VARIANTS:
        raise InputError(f"unknown variant {variant!r}")
    settings = settings or TrainSettings()
    for name, examples in (("train", train_examples), ("validation", val_examples)):
        if not examples:
            raise InputError(f"{name} example set is empty")
        missing = [e.qid for e in examples if e.target is None]
        if missing:
            raise InputError(f"{name} examples lack gain targets: {missing}")

    torch.manual_seed(settings.seed)
    tokenizer = load_tokenizer(backbone)
    encoder = load_encoder(backbone)
    model = GainRegressor(encoder)
    pad_id = tokenizer.pad_token_id if tokenizer.pad_token_id is not None else 0

    def encode_all(examples):
        encoded, truncated = [], 0
        for example in examples:
            ids, cut = encode_example(tokenizer, example, settings.max_length)
            encoded.append(ids)
            truncated += int(cut)
        return encoded, truncated

    train_encoded, truncated_train = encode_all(train_examples)
    val_encoded, truncated_val = encode_all(val_examples)
    train_targets = [e.target for e in train_examples]
    val_targets = [e.target for e in val_examples]

    optimizer = torch.optim.AdamW(model.parameters(), lr=settings.lr)
    loss_fn = nn.MSELoss()
    result = TrainResult(
        artifact_dir=Path(artifact_dir),
        truncated_train=truncated_train,
        truncated_val=truncated_val,
    )
    best_val = float("inf")
    best_state = None
    done = False
    for epoch in range(settings.epochs):
        model.train()
        epoch_loss = 0.0
        seen = 0
        for input_ids, mask, batch_targets in _batches(
            train_encoded, train_targets, settings.batch_size, pad_id
        ):
            optimizer.zero_grad()
            preds = model(input_ids, mask)
            loss = loss_fn(preds, batch_targets)
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.detach()) * len(batch_targets)
            seen += len(batch_targets)
            result.steps += 1
            if settings.max_steps is not None and result.steps >= settings.max_steps:
                done = True
                break
        result.train_mse_per_epoch.append(epoch_loss / seen)
        val_mse = _mse(model, val_encoded, val_targets, settings.batch_size, pad_id)
        result.val_mse_per_epoch.append(val_mse)
        if val_mse < best_val:
            best_val = val_mse
            best_state = {k: v.detach().clone() for k, v in model.state_dict().items()}
            result.best_epoch = epoch
        if done:
            break
    if best_state is not None:
        model.load_state_dict(best_state)

    artifact = Path(artifact_dir)
    artifact.mkdir(parents=True, exist_ok=True)
    model.encoder.save_pretrained(artifact / "encoder")
    tokenizer.save_pretrained(artifact / "encoder")
    torch.save(model.head.state_dict(), artifact / "head.pt")
    meta = {
        "variant": variant,
        "backbone": backbone,
        "max_length": settings.max_length,
        "lr": settings.lr,
        "batch_size": settings.batch_size,
        "epochs": settings.epochs,
        "best_epoch": result.best_epoch,
        "train_mse_per_epoch": result.train_mse_per_epoch,
        "val_mse_per_epoch": result.val_mse_per_epoch,
        "truncated_train": truncated_train,
        "truncated_val": truncated_val,
        "config_hash": settings.config_hash(variant, backbone),
    }
    (artifact / "meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")

    model.eval()
    result.validation_scores = _predict_encoded(
        model, val_encoded, [e.qid for e in val_examples], settings.batch_size, pad_id
    )
    return result


@torch.no_grad()
def _predict_encoded(model, encoded, qids, batch_size, pad_id) -> dict[str, float]:
    model.eval()
    values: list[float] = []
    for input_ids, mask, _ in _batches(encoded, None, batch_size, pad_id):
        values.extend(float(v) for v in model(input_ids, mask))
    return dict(zip(qids, values))


def load_artifact(artifact_dir: str | Path) -> tuple[GainRegressor, object, dict]:
    artifact = Path(artifact_dir)
    meta_path = artifact / "meta.json"
    if not meta_path.exists():
        raise ModelLoadError(f"no meta.json under {artifact}")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    tokenizer = load_tokenizer(str(artifact / "encoder"))
    encoder = load_encoder(str(artifact / "encoder"))
    model = GainRegressor(encoder)
    model.head.load_state_dict(torch.load(artifact / "head.pt", weights_only=True))
    model.eval()
    return model, tokenizer, meta


def predict_supervised(
    artifact_dir: str | Path,
    examples: list[SupervisedExample],
    batch_size: int = DEFAULT_BATCH_SIZE,
) -> dict[str, float]:
    """Score examples with a trained artifact; variant mismatch is an error."""
    model, tokenizer, meta = load_artifact(artifact_dir)
    expects_answers = meta["variant"] == "gen"
    for example in examples:
        has_answers = bool(example.answers)
        if has_answers != expects_answers:
            raise InputError(
                f"artifact variant {meta['variant']!r} does not match example {example.qid!r} "
                f"({'with' if has_answers else 'without'} generated answers)"
            )
    pad_id = tokenizer.pad_token_id if tokenizer.pad_token_id is not None else 0
    encoded = [encode_example(tokenizer, e, meta["max_length"])[0] for e in examples]
    return _predict_encoded(model, encoded, [e.qid for e in examples], batch_size, pad_id)
