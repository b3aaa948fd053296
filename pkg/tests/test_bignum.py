import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import pytest
from hypothesis import given, settings, strategies as st

from engines.bignum import (
    BigNumber,
    RadixDigits,
    add,
    assert_canonical,
    compare,
    digit_count_for_equivalent,
    from_decimal_string,
    from_radix,
    negate,
    radix_digit_count,
    sub,
    to_radix,
)
from engines.errors import InvalidBaseError, InvalidDigitError, ParseError

SLOW = os.environ.get("ARITH_SLOW_TESTS") == "1"
slow = pytest.mark.skipif(not SLOW, reason="set ARITH_SLOW_TESTS=1 to run")

big = st.integers(min_value=-(10**60) + 1, max_value=10**60 - 1)


def n(value: int) -> BigNumber:
    return BigNumber.from_int(value)


def schoolbook_add(a: int, b: int) -> int:
    """Independent digit-by-digit reference for non-negative operands."""
    xs, ys = str(a)[::-1], str(b)[::-1]
    out, carry = [], 0
    for i in range(max(len(xs), len(ys))):
        s = carry + (int(xs[i]) if i < len(xs) else 0) + (int(ys[i]) if i < len(ys) else 0)
        out.append(s % 10)
        carry = s // 10
    if carry:
        out.append(carry)
    return int("".join(str(d) for d in reversed(out)))


def test_parse_832():
    x = from_decimal_string("832")
    assert x.sign == 1
    assert x.magnitude == (8, 3, 2)


def test_parse_negative_zero_is_zero():
    x = from_decimal_string("-0")
    assert x.sign == 1
    assert x.magnitude == (0,)


def test_parse_strips_leading_zeros():
    assert from_decimal_string("00200").magnitude == (2, 0, 0)


@pytest.mark.parametrize("text,position", [("", 0), ("-", 1), ("12a4", 2), ("+5", 0), ("1 2", 1)])
def test_parse_errors_report_position(text, position):
    with pytest.raises(ParseError) as e:
        from_decimal_string(text)
    assert e.value.position == position


def test_addition_example():
    assert add(n(52), n(148)) == n(200)


def test_subtraction_example():
    result = sub(n(20), n(185))
    assert result == n(-165)
    assert result.to_decimal_string() == "-165"


def test_x_minus_x_is_positive_zero():
    result = sub(n(12345), n(12345))
    assert result.sign == 1
    assert result.is_zero


def test_add_sub_against_schoolbook_on_all_small_pairs():
    for a in range(0, 1000, 7):
        for b in range(1000):
            total = add(n(a), n(b))
            assert total.to_int() == schoolbook_add(a, b)
            diff = sub(n(a), n(b))
            assert add(diff, n(b)) == n(a)
            assert_canonical(diff)


@given(big, big)
def test_addition_commutes_and_subtraction_antisymmetric(a, b):
    x, y = n(a), n(b)
    assert add(x, y) == add(y, x)
    assert sub(x, y) == negate(sub(y, x))
    assert add(x, y).to_int() == a + b
    assert sub(x, y).to_int() == a - b


@given(big)
def test_identity_and_negation(a):
    x = n(a)
    assert add(x, BigNumber.zero()) == x
    assert negate(negate(x)) == x
    assert_canonical(negate(x))


@given(big, big)
def test_compare_matches_int_order(a, b):
    assert compare(n(a), n(b)) == (a > b) - (a < b)
    assert (n(a) < n(b)) == (a < b)


def test_to_radix_binary():
    assert to_radix(n(10), 2).digits == (1, 0, 1, 0)


def test_to_radix_zero_base19():
    assert to_radix(BigNumber.zero(), 19).digits == (0,)


def test_to_radix_15_digits_in_base19_has_12_digits():
    value = n(10**15 - 1)
    digits = to_radix(value, 19)
    assert len(digits.digits) == 12
    recomputed = 0
    for d in digits.digits:
        recomputed = recomputed * 19 + d
    assert recomputed == 10**15 - 1


def test_to_radix_rejects_base_one():
    with pytest.raises(InvalidBaseError):
        to_radix(n(5), 1)


def test_from_radix_examples():
    assert from_radix(RadixDigits(2, (1, 1))) == n(3)
    assert from_radix(RadixDigits(3, (2, 2, 2))) == n(26)
    assert from_radix(RadixDigits(10, (8, 3, 2))) == n(832)


def test_radix_digit_out_of_range():
    with pytest.raises(InvalidDigitError):
        RadixDigits(2, (1, 2))


@settings(max_examples=300)
@given(big, st.sampled_from([2, 3, 10, 19]))
def test_radix_round_trip(a, base):
    x = n(a)
    digits = to_radix(x, base)
    assert_canonical(digits)
    assert from_radix(digits) == x
    assert radix_digit_count(x, base) == len(digits.digits)


@pytest.mark.parametrize("base,expected", [(10, 15), (2, 50), (3, 32), (19, 12)])
def test_digit_count_for_equivalent(base, expected):
    assert digit_count_for_equivalent(15, base) == expected


def test_digit_count_for_equivalent_invalid_base():
    with pytest.raises(InvalidBaseError):
        digit_count_for_equivalent(15, 1)


def test_no_negative_zero_construction():
    with pytest.raises(ValueError):
        BigNumber(-1, (0,))


@slow
def test_add_sub_against_schoolbook_on_every_pair_below_1000():
    for a in range(1000):
        for b in range(1000):
            assert add(n(a), n(b)).to_int() == schoolbook_add(a, b)
            assert add(sub(n(a), n(b)), n(b)) == n(a)
