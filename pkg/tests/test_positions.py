import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest

from engines.orthography import OrthographySpec, Scheme
from microformer.config import ModelConfig, PositionMode, TargetPositionMode
from microformer.errors import ModelConfigError
from microformer.positions import (
    PositionEmbeddingSpec,
    inference_target_positions,
    positionwise_masked_embedding,
    question_digit_indices,
    sinusoidal_encoding,
    sinusoidal_table,
    source_positions,
    target_positions,
)

CHARACTER = OrthographySpec(scheme=Scheme.CHARACTER)
TEN_E = OrthographySpec(scheme=Scheme.TEN_E_BASED)


def small_config(**overrides) -> ModelConfig:
    fields = dict(model_width=12, heads=2, feedforward_width=16, layers_encoder=1, layers_decoder=1)
    fields.update(overrides)
    return ModelConfig(**fields)


def test_most_significant_digit_owns_first_slice():
    spec = PositionEmbeddingSpec.of(i=3, n=3, d=6)
    assert (spec.u, spec.v) == (0, 2)
    assert positionwise_masked_embedding(3, 3, 6).tolist() == [1, 1, 0, 0, 0, 0]


def test_least_significant_digit_owns_last_slice():
    spec = PositionEmbeddingSpec.of(i=1, n=3, d=6)
    assert (spec.u, spec.v) == (4, 6)


def test_single_digit_fills_the_vector():
    assert positionwise_masked_embedding(1, 1, 6).tolist() == [1] * 6


def test_number_too_long_for_width():
    with pytest.raises(ModelConfigError):
        PositionEmbeddingSpec.of(i=1, n=7, d=6)


def test_index_out_of_range():
    with pytest.raises(ModelConfigError):
        PositionEmbeddingSpec.of(i=0, n=3, d=6)
    with pytest.raises(ModelConfigError):
        PositionEmbeddingSpec.of(i=4, n=3, d=6)


@pytest.mark.parametrize("n,d", [(1, 8), (3, 8), (5, 128), (60, 128), (7, 7)])
def test_slices_are_adjacent_and_disjoint(n, d):
    vectors = [positionwise_masked_embedding(i, n, d) for i in range(n, 0, -1)]
    total = np.sum(vectors, axis=0)
    assert total.max() == 1
    assert total.sum() == (d // n) * n
    assert total[: (d // n) * n].all()
    for a, b in zip(range(n, 1, -1), range(n - 1, 0, -1)):
        assert PositionEmbeddingSpec.of(a, n, d).v == PositionEmbeddingSpec.of(b, n, d).u


def test_sinusoidal_position_zero():
    row = sinusoidal_encoding(0, 8)
    assert row.tolist() == [0, 1, 0, 1, 0, 1, 0, 1]


def test_sinusoidal_rows_bounded_and_distinct():
    table = sinusoidal_table(50, 16)
    assert table.shape == (50, 16)
    assert np.abs(table).max() <= 1
    assert len({tuple(np.round(row, 6)) for row in table}) == 50


def test_sinusoidal_negative_position():
    with pytest.raises(ValueError):
        sinusoidal_encoding(-1, 8)


def test_question_digit_indices():
    tokens = "What is 5 plus 3 2 ?".split()
    assert question_digit_indices(tokens, CHARACTER) == [None, None, (1, 1), None, (2, 2), (1, 2), None]


def test_source_positions_mark_digits_only():
    tokens = "What is 4 10e1 2 10e0 plus 7 10e0 ?".split()
    rows = source_positions(tokens, TEN_E, small_config())
    assert rows.shape == (len(tokens), 12)
    assert not rows[0].any()
    assert rows[2].tolist() == positionwise_masked_embedding(2, 2, 12).tolist()
    assert not rows[3].any()
    assert rows[4].tolist() == positionwise_masked_embedding(1, 2, 12).tolist()
    assert rows[7].tolist() == [1] * 12


def test_source_positions_sinusoidal():
    tokens = "What is 5 plus 3 ?".split()
    rows = source_positions(tokens, CHARACTER, small_config(position_mode=PositionMode.SINUSOIDAL))
    assert np.allclose(rows, sinusoidal_table(6, 12))


def test_target_positions_with_tgt_while_training():
    config = small_config(target_position_mode=TargetPositionMode.WITH_TGT)
    rows = target_positions(["3", "7"], CHARACTER, config)
    assert rows.shape == (3, 12)
    assert not rows[0].any()
    assert rows[1].tolist() == positionwise_masked_embedding(2, 2, 12).tolist()


def test_target_positions_zero_without_tgt_or_at_inference():
    answer = ["3", "10e1", "7", "10e0"]
    assert not target_positions(answer, TEN_E, small_config(target_position_mode=TargetPositionMode.NO_TGT)).any()
    with_tgt = small_config(target_position_mode=TargetPositionMode.WITH_TGT)
    assert not target_positions(answer, TEN_E, with_tgt, training=False).any()
    assert not inference_target_positions(9, with_tgt).any()


def test_dtype_follows_request():
    assert positionwise_masked_embedding(1, 2, 4, np.float64).dtype == np.float64
    assert sinusoidal_table(3, 4).dtype == np.float32
