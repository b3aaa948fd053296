"""
Training loop: the decoder reads the gold answer shifted right.

Each epoch shuffles the training pairs with a seed derived from the run seed,
takes one Adam step per batch, then scores greedy decodes on the dev set. The
returned checkpoint is the epoch with the best dev accuracy (earliest on ties).
"""
import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np
from tqdm import tqdm

from engines.orthography import OrthographySpec, digit_indices, token_inventory
from library.sampling import derive_seed, shuffled_indices
from library.taskgen import split_examples
from microformer.checkpoint import Checkpoint
from microformer.config import ModelConfig, TrainConfig
from microformer.data import EncodedPair, batches, encode_pair
from microformer.decode import predict
from microformer.errors import TrainingDiverged
from microformer.model import Seq2SeqTransformer
from microformer.optim import Adam
from microformer.vocab import build_vocabulary

logger = logging.getLogger(__name__)

DEFAULT_MAX_VOCABULARY = 256


class QAPair(Protocol):
    question: str
    answer: str


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    dev_accuracy: float | None


def holdout_split(items: Sequence, train_cfg: TrainConfig) -> tuple[list, list]:
    return split_examples(items, derive_seed(train_cfg.seed, "holdout"), train_cfg.split_ratio)


def encode_all(items: Sequence[QAPair], spec: OrthographySpec, model: Seq2SeqTransformer) -> list[EncodedPair]:
    return [encode_pair(e.question, e.answer, spec, model.vocab, model.config, model.dtype) for e in items]


def evaluate_loss(model: Seq2SeqTransformer, pairs: Sequence[EncodedPair], batch_size: int = 32) -> float:
    """Mean per-batch loss over pairs in their given order, without touching gradients."""
    d = model.config.model_width
    losses = [model.loss(b) for b in batches(pairs, range(len(pairs)), batch_size, model.vocab, d, model.dtype)]
    return float(np.mean(losses))


def dev_accuracy(model: Seq2SeqTransformer, items: Sequence[QAPair], spec: OrthographySpec, batch_size: int) -> float:
    """Exact-match accuracy; questions with tokens outside the vocabulary count as wrong."""
    known = [e for e in items if all(t in model.vocab for t in e.question.split())]
    if not known:
        return 0.0
    results = predict(model, [e.question for e in known], spec, batch_size)
    hits = sum(r.tokens.tokens == tuple(e.answer.split()) for r, e in zip(results, known))
    return hits / len(items)


def write_training_log(history: Sequence[EpochStats], path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["epoch", "train_loss", "dev_accuracy"])
        for row in history:
            writer.writerow([row.epoch, f"{row.train_loss:.6f}", "" if row.dev_accuracy is None else f"{row.dev_accuracy:.6f}"])


def build_model(
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    items: Sequence[QAPair],
    max_vocabulary: int = DEFAULT_MAX_VOCABULARY,
    spec: OrthographySpec | None = None,
) -> Seq2SeqTransformer:
    """Fresh model; the vocabulary comes from `items` unless the config already has one.

    With an orthography the vocabulary also holds every token it can emit for
    answers one digit longer than the longest answer in `items`.
    """
    if not model_cfg.vocabulary:
        texts = [t for e in items for t in (e.question, e.answer)]
        if spec is not None:
            longest = max((digit_indices(e.answer.split(), spec)[1] for e in items), default=0)
            texts.append(" ".join(sorted(token_inventory(spec, longest + 1))))
        vocab = build_vocabulary(texts, max_vocabulary)
        model_cfg = model_cfg.model_copy(update={"vocabulary": vocab.tokens})
    return Seq2SeqTransformer(model_cfg, train_cfg.precision.dtype, train_cfg.seed)


def train(
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    dataset: Sequence[QAPair],
    spec: OrthographySpec,
    dev: Sequence[QAPair] | None = None,
    log_path: Path | None = None,
    max_vocabulary: int = DEFAULT_MAX_VOCABULARY,
    dataset_digest: str | None = None,
    progress: bool = True,
) -> Checkpoint:
    """Train on `dataset` and return the best-dev checkpoint.

    Without a dev set (dev=None) the held-out share of the split ratio selects
    the checkpoint; an empty dev list trains on everything and keeps the last
    epoch. The vocabulary never sees dev tokens. Raises TrainingDiverged on a non-finite loss and
    VocabularyError when the data needs more than max_vocabulary tokens.
    """
    if dev is None:
        train_items, dev_items = holdout_split(dataset, train_cfg)
    else:
        train_items, dev_items = list(dataset), list(dev)
    if not train_items:
        raise ValueError("no training examples")
    if train_cfg.dev_limit is not None:
        dev_items = dev_items[: train_cfg.dev_limit]

    model = build_model(model_cfg, train_cfg, train_items, max_vocabulary, spec)
    pairs = encode_all(train_items, spec, model)
    optimizer = Adam(model.params, train_cfg.learning_rate, clip_norm=train_cfg.clip_norm)
    d = model.config.model_width
    logger.info(
        f"Training on {len(pairs)} examples ({len(dev_items)} dev), vocabulary {len(model.vocab)}, "
        f"{model.store.size()} parameters, {train_cfg.epochs} epochs"
    )

    history: list[EpochStats] = []
    best: Checkpoint | None = None
    n_batches = math.ceil(len(pairs) / train_cfg.batch_size)
    for epoch in range(1, train_cfg.epochs + 1):
        order = shuffled_indices(len(pairs), derive_seed(train_cfg.seed, f"epoch/{epoch}"))
        losses = []
        bar = tqdm(
            batches(pairs, order, train_cfg.batch_size, model.vocab, d, model.dtype),
            total=n_batches,
            desc=f"epoch {epoch}",
            leave=False,
            disable=not progress,
        )
        for step, batch in enumerate(bar, 1):
            loss = model.loss_and_grad(batch)
            if not math.isfinite(loss):
                raise TrainingDiverged(epoch, step, loss)
            optimizer.step(model.grads)
            losses.append(loss)
            bar.set_postfix(loss=f"{loss:.4f}")
        train_loss = float(np.mean(losses))
        accuracy = dev_accuracy(model, dev_items, spec, train_cfg.batch_size * 4) if dev_items else None
        history.append(EpochStats(epoch, train_loss, accuracy))
        logger.info(f"epoch {epoch}: train loss {train_loss:.4f}, dev accuracy {accuracy if accuracy is None else f'{accuracy:.4f}'}")

        if best is None or accuracy is None or accuracy > best.dev_accuracy:
            best = Checkpoint.capture(
                model,
                train_cfg,
                optimizer,
                orthography=spec,
                epoch=epoch,
                dev_accuracy=accuracy,
                train_loss=train_loss,
                dataset_digest=dataset_digest,
            )

    if log_path is not None:
        write_training_log(history, log_path)
    logger.info(f"Best epoch {best.epoch} (dev accuracy {best.dev_accuracy})")
    return best
