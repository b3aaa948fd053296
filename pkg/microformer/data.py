from dataclasses import dataclass
from typing import Sequence

import numpy as np

from engines.orthography import OrthographySpec
from microformer.config import ModelConfig
from microformer.errors import ModelConfigError
from microformer.positions import source_positions, target_positions
from microformer.vocab import Vocabulary


@dataclass(frozen=True)
class EncodedPair:
    source_ids: list[int]
    # Answer ids without BOS/EOS
    target_ids: list[int]
    source_pos: np.ndarray
    # One row per decoder input token: BOS then the answer
    target_pos: np.ndarray


@dataclass(frozen=True)
class Batch:
    source_ids: np.ndarray
    source_pos: np.ndarray
    decoder_ids: np.ndarray
    decoder_pos: np.ndarray
    targets: np.ndarray

    @property
    def size(self) -> int:
        return self.source_ids.shape[0]


def encode_pair(
    question: str,
    answer: str,
    spec: OrthographySpec,
    vocab: Vocabulary,
    config: ModelConfig,
    dtype=np.float32,
) -> EncodedPair:
    source = question.split()
    target = answer.split()
    if len(source) > config.max_sequence_length or len(target) + 1 > config.max_sequence_length:
        raise ModelConfigError(
            f"sequence of {max(len(source), len(target) + 1)} tokens exceeds max_sequence_length {config.max_sequence_length}"
        )
    return EncodedPair(
        source_ids=vocab.ids(source),
        target_ids=vocab.ids(target),
        source_pos=source_positions(source, spec, config, dtype),
        target_pos=target_positions(target, spec, config, dtype, training=True),
    )


def collate(pairs: Sequence[EncodedPair], vocab: Vocabulary, d: int, dtype=np.float32) -> Batch:
    """Right-pad a list of pairs; decoder input is BOS + answer, targets are answer + EOS."""
    b = len(pairs)
    s = max(len(p.source_ids) for p in pairs)
    t = max(len(p.target_ids) for p in pairs) + 1
    source_ids = np.full((b, s), vocab.pad_id, dtype=np.int64)
    source_pos = np.zeros((b, s, d), dtype=dtype)
    decoder_ids = np.full((b, t), vocab.pad_id, dtype=np.int64)
    decoder_pos = np.zeros((b, t, d), dtype=dtype)
    targets = np.full((b, t), vocab.pad_id, dtype=np.int64)
    for row, pair in enumerate(pairs):
        n_src, n_tgt = len(pair.source_ids), len(pair.target_ids)
        source_ids[row, :n_src] = pair.source_ids
        source_pos[row, :n_src] = pair.source_pos
        decoder_ids[row, : n_tgt + 1] = [vocab.bos_id] + pair.target_ids
        decoder_pos[row, : n_tgt + 1] = pair.target_pos
        targets[row, : n_tgt + 1] = pair.target_ids + [vocab.eos_id]
    return Batch(source_ids, source_pos, decoder_ids, decoder_pos, targets)


def batches(pairs: Sequence[EncodedPair], order: Sequence[int], size: int, vocab: Vocabulary, d: int, dtype=np.float32):
    for start in range(0, len(order), size):
        yield collate([pairs[i] for i in order[start:start + size]], vocab, d, dtype)
