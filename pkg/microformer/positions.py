"""
Position signals added to token embeddings.

SINUSOIDAL is the usual sine/cosine table over sequence positions.
POS_MASKED marks digit tokens only: the digit with big-endian index i in an
n-digit number gets a vector of ones on [u, v), where
u = (d // n) * (n - i) and v = (d // n) * (n - i + 1), and zeros elsewhere.
The most significant digit (i = n) owns the first slice. Every other token gets
the zero vector.
"""
from typing import Sequence

import numpy as np
from pydantic import BaseModel

from engines.orthography import OrthographySpec, digit_indices
from library.taskgen import question_spans
from microformer.config import ModelConfig, PositionMode, TargetPositionMode
from microformer.errors import ModelConfigError


class PositionEmbeddingSpec(BaseModel):
    n: int
    i: int
    d: int
    u: int
    v: int

    @classmethod
    def of(cls, i: int, n: int, d: int) -> "PositionEmbeddingSpec":
        if not 1 <= i <= n:
            raise ModelConfigError(f"digit index {i} outside [1, {n}]")
        width = d // n
        if width == 0:
            raise ModelConfigError(f"a {n}-digit number does not fit model width {d}")
        return cls(n=n, i=i, d=d, u=width * (n - i), v=width * (n - i + 1))


def positionwise_masked_embedding(i: int, n: int, d: int, dtype=np.float32) -> np.ndarray:
    spec = PositionEmbeddingSpec.of(i, n, d)
    vector = np.zeros(d, dtype=dtype)
    vector[spec.u:spec.v] = 1
    return vector


def sinusoidal_table(length: int, d: int, dtype=np.float32) -> np.ndarray:
    """Rows are positions 0..length-1: sin on even columns, cos on odd ones."""
    positions = np.arange(length, dtype=np.float64)[:, None]
    pairs = np.arange(0, d, 2, dtype=np.float64)
    angles = positions / np.power(10000.0, pairs / d)
    table = np.zeros((length, d), dtype=np.float64)
    table[:, 0::2] = np.sin(angles)
    table[:, 1::2] = np.cos(angles[:, : d // 2])
    return table.astype(dtype)


def sinusoidal_encoding(position: int, d: int, dtype=np.float32) -> np.ndarray:
    if position < 0:
        raise ValueError(f"position must be >= 0, got {position}")
    return sinusoidal_table(position + 1, d, dtype)[position]


def _masked_rows(indices: Sequence[tuple[int, int] | None], d: int, dtype) -> np.ndarray:
    out = np.zeros((len(indices), d), dtype=dtype)
    for row, entry in enumerate(indices):
        if entry is not None:
            i, n = entry
            spec = PositionEmbeddingSpec.of(i, n, d)
            out[row, spec.u:spec.v] = 1
    return out


def _number_indices(tokens: Sequence[str], spec: OrthographySpec) -> list[tuple[int, int] | None]:
    indices, n = digit_indices(tokens, spec)
    return [(i, n) if i is not None else None for i in indices]


def question_digit_indices(tokens: Sequence[str], spec: OrthographySpec) -> list[tuple[int, int] | None]:
    """(i, n) for each digit token of both operands; None for template tokens."""
    out: list[tuple[int, int] | None] = [None] * len(tokens)
    for span in question_spans(tokens):
        out[span.start:span.stop] = _number_indices(tokens[span.start:span.stop], spec)
    return out


def source_positions(tokens: Sequence[str], spec: OrthographySpec, config: ModelConfig, dtype=np.float32) -> np.ndarray:
    d = config.model_width
    if config.position_mode == PositionMode.SINUSOIDAL:
        return sinusoidal_table(len(tokens), d, dtype)
    return _masked_rows(question_digit_indices(tokens, spec), d, dtype)


def target_positions(
    answer_tokens: Sequence[str],
    spec: OrthographySpec,
    config: ModelConfig,
    dtype=np.float32,
    training: bool = True,
) -> np.ndarray:
    """Rows for the decoder input BOS, a_1, ..., a_m.

    Digit-position vectors reach the decoder only while training in WITH_TGT
    mode; at inference, and in NO_TGT mode, every row is zero. The sinusoidal
    baseline encodes sequence positions on the decoder side as well.
    """
    d = config.model_width
    length = len(answer_tokens) + 1
    if config.position_mode == PositionMode.SINUSOIDAL:
        return sinusoidal_table(length, d, dtype)
    if not training or config.target_position_mode == TargetPositionMode.NO_TGT:
        return np.zeros((length, d), dtype=dtype)
    return _masked_rows([None] + _number_indices(answer_tokens, spec), d, dtype)


def inference_target_positions(length: int, config: ModelConfig, dtype=np.float32) -> np.ndarray:
    """Decoder rows for greedy decoding: no digit-position information."""
    d = config.model_width
    if config.position_mode == PositionMode.SINUSOIDAL:
        return sinusoidal_table(length, d, dtype)
    rows = np.zeros((length, d), dtype=dtype)
    assert not rows.any()
    return rows
