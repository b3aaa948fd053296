import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import pytest

from engines.orthography import Order, Scheme
from library.presets import PRESETS, SMOKE_MODEL, epochs_for_dataset_size, get_preset
from library.taskgen import SamplingMethod, iter_examples


def test_interpolation_preset():
    preset = get_preset("interpolation-60")
    assert preset.orthography.scheme == Scheme.TEN_E_BASED
    assert preset.split("train").method == SamplingMethod.BALANCED
    assert preset.split("dev").method == SamplingMethod.BALANCED
    assert preset.split("test").method == SamplingMethod.RANDOM
    assert {p.max_digits for p in preset.splits} == {60}


def test_extrapolation_digit_ranges_are_disjoint():
    preset = get_preset("extrapolation-50-60")
    train = preset.sampling_config("train", seed=0, count=200)
    test = preset.sampling_config("test", seed=0, count=200)
    train_lengths = {ex.max_operand_digits for ex in iter_examples(train, preset.orthography)}
    test_lengths = {ex.max_operand_digits for ex in iter_examples(test, preset.orthography)}
    assert max(train_lengths) <= 50
    assert min(test_lengths) > 50
    assert max(test_lengths) <= 60


@pytest.mark.parametrize("base,digits", [(2, 50), (3, 32), (10, 15), (19, 12)])
def test_bases_presets(base, digits):
    preset = get_preset(f"bases-{base}")
    assert preset.orthography.base == base
    assert preset.orthography.order == Order.INVERSE
    assert preset.split("train").max_digits == digits
    assert preset.split("train").count == 1_000
    assert preset.sampling_config("train", seed=0).base == base


def test_position_embedding_smoke_preset():
    preset = get_preset("posembed-smoke")
    assert preset.orthography.scheme == Scheme.CHARACTER
    assert preset.sampling_config("all", seed=0).total == 8100
    assert preset.holdout_ratio == (9, 1)
    assert preset.epochs == 55
    assert preset.model == SMOKE_MODEL
    assert preset.model.layers_encoder == 1
    assert preset.model.model_width == 64


def test_smoke_alias_draws_the_same_data():
    alias = get_preset("figure2-smoke")
    target = get_preset("posembed-smoke")
    assert alias.name == "figure2-smoke"
    assert alias.seed_name == "posembed-smoke"
    assert alias.sampling_config("all", seed=3) == target.sampling_config("all", seed=3)
    assert alias.model == target.model
    assert alias.holdout_ratio == target.holdout_ratio
    assert alias.epochs == target.epochs


def test_mismatch_grid():
    for train_key in ("bal", "rand"):
        for test_key in ("bal", "rand"):
            assert f"mismatch-{train_key}x{test_key}" in PRESETS
    preset = get_preset("mismatch-randxbal")
    assert preset.split("train").method == SamplingMethod.RANDOM
    assert preset.split("test").method == SamplingMethod.BALANCED


def test_split_seeds_differ_but_are_reproducible():
    preset = get_preset("interpolation-60")
    assert preset.sampling_config("train", 1).seed != preset.sampling_config("test", 1).seed
    assert preset.sampling_config("train", 1).seed == preset.sampling_config("train", 1).seed


@pytest.mark.parametrize("size,epochs", [(10**3, 200), (10**4, 100), (10**5, 20), (10**6, 10), (10**7, 1), (500, 200), (50_000, 100)])
def test_epochs_for_dataset_size(size, epochs):
    assert epochs_for_dataset_size(size) == epochs


def test_datasize_presets_use_epoch_table():
    assert get_preset("datasize-1e3").epochs == 200
    assert get_preset("datasize-1e7").epochs == 1


def test_unknown_preset():
    with pytest.raises(KeyError):
        get_preset("no-such-preset")


def test_unknown_split():
    with pytest.raises(KeyError):
        get_preset("interpolation-60").split("validation")
