import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import csv
import json
import random
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from engines.bignum import BigNumber
from engines.orthography import Order, OrthographySpec, Scheme, encode
from library.evaluator import (
    ErrorKind,
    EvaluationError,
    analyze_position_skips,
    confidence_interval,
    evaluate,
    exact_match,
    render_table,
    report_to_json,
    write_per_length_csv,
)

FIXTURES = Path(__file__).parent / "fixtures"

TEN_E = OrthographySpec(scheme=Scheme.TEN_E_BASED)

# A 61-digit answer whose 10e37..10e28 block was skipped
SKIPPING_ANSWER = (
    "1 10e60 0 10e59 1 10e58 2 10e57 3 10e56 0 10e55 2 10e54 7 10e53 0 10e52 1 10e51 0 10e50 "
    "3 10e49 9 10e48 0 10e47 5 10e46 3 10e45 1 10e44 5 10e43 3 10e42 6 10e41 3 10e40 6 10e39 0 10e38 "
    "8 10e27 1 10e26 4 10e25 1 10e24 2 10e23 6 10e22 6 10e21 9 10e20 5 10e19 3 10e18 4 10e17 8 10e16 "
    "3 10e15 8 10e14 8 10e13 9 10e12 5 10e11 3 10e10 5 10e9 0 10e8 6 10e7 4 10e6 3 10e5 5 10e4 6 10e3 "
    "7 10e2 2 10e1 2 10e0"
)


def test_exact_match():
    assert exact_match("2 10e1 0 10e0", "2 10e1 0 10e0") == 1
    assert exact_match("2 10e1 1 10e0", "2 10e1 0 10e0") == 0
    assert exact_match("2 10e1  0 10e0 ", "2 10e1 0 10e0") == 1
    assert exact_match("", "0 10e0") == 0


def test_all_correct():
    golds = ["2 10e1 0 10e0", "5 10e0", "1 10e2 0 10e1 0 10e0"]
    report = evaluate(golds, golds, [(2, 2), (1, 1), (3, 2)], TEN_E)
    assert report.overall_accuracy == 1.0
    assert report.correct == 3
    assert all(count == 0 for count in report.error_taxonomy.values())
    assert report.per_length[3].accuracy == 1.0


def test_ten_examples_with_three_errors():
    golds = [encode(BigNumber.from_int(v), TEN_E).wire for v in (10, 25, 99, 100, 345, 7, 1000, 12, 64, 808)]
    preds = list(golds)
    preds[1] = "2 10e1 6 10e0"              # wrong digit
    preds[4] = "3 10e2 5 10e0"              # skipped 10e1
    preds[8] = "six four"                   # not a 10e sequence
    metadata = [(2, 2), (2, 2), (2, 2), (3, 3), (3, 3), (1, 1), (4, 4), (2, 2), (2, 2), (3, 3)]
    report = evaluate(preds, golds, metadata, TEN_E)
    assert report.n == 10
    assert report.overall_accuracy == pytest.approx(0.7)
    assert report.error_taxonomy[ErrorKind.WRONG_DIGITS] == 1
    assert report.error_taxonomy[ErrorKind.POSITION_SKIP] == 1
    assert report.error_taxonomy[ErrorKind.MALFORMED] == 1
    assert report.error_taxonomy[ErrorKind.LENGTH_MISMATCH] == 0
    assert report.per_length[2].count == 5
    assert report.per_length[2].correct == 3
    assert report.skip_summary.skipping_predictions == 1
    assert report.skip_summary.most_common_missing == [1]


def test_length_mismatch_without_orthography():
    report = evaluate(["1 2 3"], ["1 2"], [(2, 2)])
    assert report.error_taxonomy[ErrorKind.LENGTH_MISMATCH] == 1
    assert report.skip_summary is None


def test_empty_prediction_is_malformed():
    report = evaluate([""], ["0 10e0"], [(1, 1)], TEN_E)
    assert report.error_taxonomy[ErrorKind.MALFORMED] == 1


def test_metadata_as_dicts():
    report = evaluate(["5"], ["5"], [{"digits1": 1, "digits2": 4}])
    assert list(report.per_length) == [4]


def test_empty_input_rejected():
    with pytest.raises(EvaluationError):
        evaluate([], [], [])


def test_mismatched_lengths_rejected():
    with pytest.raises(EvaluationError):
        evaluate(["1"], ["1", "2"], [(1, 1), (1, 1)])


def test_permutation_invariance():
    golds = [encode(BigNumber.from_int(v), TEN_E).wire for v in range(20, 60)]
    preds = [g if i % 3 else "1 10e0" for i, g in enumerate(golds)]
    metadata = [(2, 2)] * len(golds)
    order = list(range(len(golds)))
    random.Random(0).shuffle(order)
    first = evaluate(preds, golds, metadata, TEN_E)
    second = evaluate([preds[i] for i in order], [golds[i] for i in order], metadata, TEN_E)
    assert first == second


# --- position skips ---

def test_skipped_block_detected():
    report = analyze_position_skips(SKIPPING_ANSWER)
    assert report.max_exponent_seen == 60
    assert report.missing_exponents == list(range(28, 38))
    assert report.duplicated_exponents == []
    assert not report.out_of_order
    assert not report.well_formed


def test_well_formed_ladder():
    report = analyze_position_skips("2 10e1 0 10e0")
    assert report.well_formed
    assert report.missing_exponents == []


def test_single_missing_position():
    report = analyze_position_skips("1 10e2 1 10e0")
    assert report.missing_exponents == [1]
    assert not report.well_formed


def test_duplicates_and_order():
    report = analyze_position_skips("1 10e1 2 10e1 3 10e0")
    assert report.duplicated_exponents == [1]
    assert report.out_of_order
    inverse = analyze_position_skips("2 10e0 3 10e1", Order.INVERSE)
    assert inverse.well_formed


def test_unparsed_tokens_counted():
    report = analyze_position_skips("- 5 10e1 x 3 10e0")
    assert report.unparsed_tokens == 1
    assert report.well_formed


@given(st.integers(min_value=-(10**60) + 1, max_value=10**60 - 1), st.sampled_from(list(Order)))
def test_encoded_numbers_are_well_formed(value, order):
    spec = OrthographySpec(scheme=Scheme.TEN_E_BASED, order=order)
    report = analyze_position_skips(encode(BigNumber.from_int(value), spec), order)
    assert report.well_formed
    assert report.unparsed_tokens == 0


@pytest.mark.parametrize("exponent", ["50000000", "9" * 5000])
def test_oversized_position_tokens_count_as_unparsed(exponent):
    report = analyze_position_skips(f"5 10e{exponent} 3 10e0")
    assert report.unparsed_tokens == 2
    assert report.max_exponent_seen == 0
    assert report.missing_exponents == []


def test_oversized_position_tokens_are_malformed_predictions():
    report = evaluate(["5 10e50000000 3 10e0"], ["5 10e1 3 10e0"], [(2, 2)], TEN_E)
    assert report.error_taxonomy[ErrorKind.MALFORMED] == 1


def test_largest_read_exponent_lists_every_gap():
    report = analyze_position_skips("5 10e9999 3 10e0")
    assert report.max_exponent_seen == 9999
    assert report.missing_exponents == list(range(1, 9999))


def test_ten_thousand_seeded_values_are_well_formed():
    rng = random.Random(20)
    for _ in range(10_000):
        value = rng.randrange(-(10**60) + 1, 10**60)
        report = analyze_position_skips(encode(BigNumber.from_int(value), TEN_E))
        assert report.well_formed, value


# --- confidence intervals ---

def test_ci_of_identical_runs():
    summary = confidence_interval([0.5, 0.5, 0.5])
    assert summary.mean == 0.5
    assert summary.half_width == 0.0


def test_ci_two_runs():
    summary = confidence_interval([0.9, 1.0])
    assert summary.mean == pytest.approx(0.95)
    assert summary.half_width == pytest.approx(0.098, abs=1e-3)
    assert summary.low < summary.mean < summary.high


def test_ci_matches_stored_fixture():
    fixture = json.loads((FIXTURES / "ci_five_runs.json").read_text())
    summary = confidence_interval(fixture["run_accuracies"])
    assert abs(summary.mean - fixture["mean"]) < 1e-12
    assert abs(summary.half_width - fixture["half_width"]) < 1e-12
    assert abs(summary.high - summary.low - 2 * fixture["half_width"]) < 1e-12


def test_ci_needs_two_runs():
    with pytest.raises(EvaluationError):
        confidence_interval([0.9])


def test_ci_rejects_out_of_range():
    with pytest.raises(EvaluationError):
        confidence_interval([0.5, 1.5])


# --- output ---

def test_render_table_and_json():
    golds = ["1 10e2 0 10e1 0 10e0", "5 10e0"]
    report = evaluate([SKIPPING_ANSWER, "5 10e0"], golds, [(3, 3), (1, 1)], TEN_E)
    table = render_table(report)
    assert "accuracy: 0.5000" in table
    assert "position_skip=1" in table
    data = json.loads(report_to_json(report))
    assert data["overall_accuracy"] == 0.5
    assert data["error_taxonomy"]["position_skip"] == 1


def test_per_length_csv(tmp_path):
    report = evaluate(["1", "2", "3"], ["1", "2", "4"], [(1, 1), (1, 1), (2, 1)])
    path = tmp_path / "per_length.csv"
    write_per_length_csv(report, path)
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    assert [row["digits"] for row in rows] == ["1", "2"]
    assert rows[0]["correct"] == "2"
    assert float(rows[1]["accuracy"]) == 0.0
