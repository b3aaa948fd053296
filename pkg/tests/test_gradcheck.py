import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from microformer.gradcheck import THRESHOLD, gradient_check, relative_error, tiny_setup


def test_backward_matches_finite_differences():
    report = gradient_check(seed=0)
    assert report.passed
    assert report.max_relative_error < THRESHOLD
    assert report.checked >= 200


def test_every_parameter_group_is_checked():
    report = gradient_check(samples=60, seed=1)
    assert set(report.per_group) == {"embedding", "attention", "feedforward", "layernorm", "head"}


def test_smaller_step_is_more_accurate():
    config, batch = tiny_setup(seed=2)
    coarse = gradient_check(config, batch, samples=120, step=1e-3, seed=2)
    fine = gradient_check(config, batch, samples=120, step=1e-5, seed=2)
    assert fine.mean_relative_error < coarse.mean_relative_error


def test_relative_error_floor():
    assert relative_error(0.0, 0.0) == 0.0
    assert relative_error(1e-9, 0.0) < 1e-3
    assert relative_error(1.0, 0.5) == 0.5
