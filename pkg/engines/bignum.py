"""
Exact signed integers stored as decimal digits, most significant first.

Everything that produces or checks an answer goes through this module:
generated answers are computed here, and evaluation decodes predictions back
into BigNumber values. Arithmetic is schoolbook digit-by-digit with explicit
carries and borrows; radix conversion uses short division on digit lists.
"""
import math
import re
from dataclasses import dataclass
from functools import total_ordering

from engines.errors import ArithmeticTaskError, InvalidBaseError, InvalidDigitError, ParseError

_DECIMAL_RE = re.compile(r"-?[0-9]+")

# Short division/multiplication works on chunks of base-b digits whose value stays below this
_CHUNK_LIMIT = 10**9


@total_ordering
@dataclass(frozen=True)
class BigNumber:
    """Signed integer: sign is +1 or -1, magnitude holds base-10 digits MSF."""
    sign: int
    magnitude: tuple[int, ...]

    def __post_init__(self):
        _check_digits(self.sign, self.magnitude, 10)

    @classmethod
    def zero(cls) -> "BigNumber":
        return cls(1, (0,))

    @classmethod
    def from_int(cls, value: int) -> "BigNumber":
        return from_decimal_string(str(value))

    def to_int(self) -> int:
        return int(self.to_decimal_string())

    def to_decimal_string(self) -> str:
        text = "".join(str(d) for d in self.magnitude)
        return text if self.sign > 0 else "-" + text

    @property
    def is_zero(self) -> bool:
        return self.magnitude == (0,)

    @property
    def is_negative(self) -> bool:
        return self.sign < 0

    def __str__(self) -> str:
        return self.to_decimal_string()

    def __add__(self, other: "BigNumber") -> "BigNumber":
        return add(self, other)

    def __sub__(self, other: "BigNumber") -> "BigNumber":
        return sub(self, other)

    def __neg__(self) -> "BigNumber":
        return negate(self)

    def __abs__(self) -> "BigNumber":
        return BigNumber(1, self.magnitude)

    def __lt__(self, other: "BigNumber") -> bool:
        return compare(self, other) < 0


@dataclass(frozen=True)
class RadixDigits:
    """A signed integer written in an arbitrary base, digit values MSF."""
    base: int
    digits: tuple[int, ...]
    sign: int = 1

    def __post_init__(self):
        if self.base < 2:
            raise InvalidBaseError(f"base must be >= 2, got {self.base}")
        _check_digits(self.sign, self.digits, self.base)


def _check_digits(sign: int, digits: tuple[int, ...], base: int) -> None:
    if sign not in (1, -1):
        raise ArithmeticTaskError(f"sign must be +1 or -1, got {sign}")
    if not digits:
        raise ArithmeticTaskError("digit sequence is empty")
    for d in digits:
        if not 0 <= d < base:
            raise InvalidDigitError(f"digit {d} out of range for base {base}")
    if len(digits) > 1 and digits[0] == 0:
        raise InvalidDigitError(f"leading zero in {digits}")
    if digits == (0,) and sign != 1:
        raise ArithmeticTaskError("zero must have sign +1")


def _make(sign: int, magnitude: list[int] | tuple[int, ...]) -> BigNumber:
    mag = tuple(magnitude)
    if mag == (0,):
        sign = 1
    return BigNumber(sign, mag)


def _strip(digits: list[int]) -> list[int]:
    """Drop leading zeros from an MSF digit list, keeping a single zero."""
    i = 0
    while i < len(digits) - 1 and digits[i] == 0:
        i += 1
    return digits[i:]


def assert_canonical(x: BigNumber | RadixDigits) -> None:
    """Assert the canonical-form invariants of a BigNumber or RadixDigits."""
    digits = x.magnitude if isinstance(x, BigNumber) else x.digits
    base = 10 if isinstance(x, BigNumber) else x.base
    assert x.sign in (1, -1), f"bad sign {x.sign}"
    assert len(digits) > 0, "empty magnitude"
    assert all(0 <= d < base for d in digits), f"digit out of range in {digits}"
    assert len(digits) == 1 or digits[0] != 0, f"leading zero in {digits}"
    assert digits != (0,) or x.sign == 1, "negative zero"


def from_decimal_string(s: str) -> BigNumber:
    """Parse an optional '-' followed by decimal digits; leading zeros are stripped."""
    if _DECIMAL_RE.fullmatch(s) is None:
        if not s:
            raise ParseError(s, 0, "empty string")
        if s == "-":
            raise ParseError(s, 1, "missing digits after '-'")
        for i, ch in enumerate(s):
            if not (ch.isascii() and ch.isdigit()) and not (ch == "-" and i == 0):
                raise ParseError(s, i, f"illegal character {ch!r}")
        raise ParseError(s, 0, "malformed number")
    sign = -1 if s.startswith("-") else 1
    digits = _strip([int(ch) for ch in s.lstrip("-")])
    return _make(sign, digits)


def negate(a: BigNumber) -> BigNumber:
    return _make(-a.sign, a.magnitude)


def digit_count(a: BigNumber) -> int:
    """Number of decimal digits in the magnitude (zero has one digit)."""
    return len(a.magnitude)


def _compare_magnitudes(a: tuple[int, ...], b: tuple[int, ...]) -> int:
    if len(a) != len(b):
        return -1 if len(a) < len(b) else 1
    for x, y in zip(a, b):
        if x != y:
            return -1 if x < y else 1
    return 0


def compare(a: BigNumber, b: BigNumber) -> int:
    """Return -1, 0 or 1 as a is less than, equal to or greater than b."""
    if a.sign != b.sign:
        return -1 if a.sign < b.sign else 1
    result = _compare_magnitudes(a.magnitude, b.magnitude)
    return result if a.sign > 0 else -result


def _add_magnitudes(a: tuple[int, ...], b: tuple[int, ...]) -> list[int]:
    out = []
    carry = 0
    i, j = len(a) - 1, len(b) - 1
    while i >= 0 or j >= 0 or carry:
        total = carry
        if i >= 0:
            total += a[i]
            i -= 1
        if j >= 0:
            total += b[j]
            j -= 1
        carry, digit = (1, total - 10) if total >= 10 else (0, total)
        out.append(digit)
    out.reverse()
    return out


def _sub_magnitudes(a: tuple[int, ...], b: tuple[int, ...]) -> list[int]:
    """a - b for magnitudes with a >= b."""
    out = []
    borrow = 0
    j = len(b) - 1
    for i in range(len(a) - 1, -1, -1):
        diff = a[i] - borrow - (b[j] if j >= 0 else 0)
        j -= 1
        if diff < 0:
            diff += 10
            borrow = 1
        else:
            borrow = 0
        out.append(diff)
    out.reverse()
    return _strip(out)


def add(a: BigNumber, b: BigNumber) -> BigNumber:
    if a.sign == b.sign:
        return _make(a.sign, _add_magnitudes(a.magnitude, b.magnitude))
    order = _compare_magnitudes(a.magnitude, b.magnitude)
    if order == 0:
        return BigNumber.zero()
    if order > 0:
        return _make(a.sign, _sub_magnitudes(a.magnitude, b.magnitude))
    return _make(b.sign, _sub_magnitudes(b.magnitude, a.magnitude))


def sub(a: BigNumber, b: BigNumber) -> BigNumber:
    return add(a, negate(b))


def _chunk_size(base: int) -> int:
    """Largest k with base**k below the chunk limit."""
    k = 1
    while base ** (k + 1) < _CHUNK_LIMIT:
        k += 1
    return k


def _divmod_small(digits: list[int], divisor: int, base: int) -> tuple[list[int], int]:
    """Short division of an MSF digit list in `base` by a small integer."""
    quotient = []
    remainder = 0
    for d in digits:
        remainder = remainder * base + d
        quotient.append(remainder // divisor)
        remainder %= divisor
    return _strip(quotient), remainder


def _mul_small_add(digits: list[int], factor: int, addend: int, base: int) -> list[int]:
    """digits * factor + addend, on an MSF digit list in `base`."""
    out = []
    carry = addend
    for d in reversed(digits):
        carry += d * factor
        out.append(carry % base)
        carry //= base
    while carry:
        out.append(carry % base)
        carry //= base
    out.reverse()
    return _strip(out)


def to_radix(a: BigNumber, base: int) -> RadixDigits:
    if base < 2:
        raise InvalidBaseError(f"base must be >= 2, got {base}")
    if base == 10 or a.is_zero:
        return RadixDigits(base, a.magnitude, a.sign)
    k = _chunk_size(base)
    divisor = base**k
    digits = list(a.magnitude)
    out = []
    while digits != [0]:
        digits, remainder = _divmod_small(digits, divisor, 10)
        for _ in range(k):
            out.append(remainder % base)
            remainder //= base
    out.reverse()
    return RadixDigits(base, tuple(_strip(out)), a.sign)


def from_radix(d: RadixDigits) -> BigNumber:
    for digit in d.digits:
        if not 0 <= digit < d.base:
            raise InvalidDigitError(f"digit {digit} out of range for base {d.base}")
    if d.base == 10:
        return _make(d.sign, d.digits)
    k = _chunk_size(d.base)
    value = [0]
    head = len(d.digits) % k or k
    start = 0
    for end in range(head, len(d.digits) + 1, k):
        chunk = 0
        for digit in d.digits[start:end]:
            chunk = chunk * d.base + digit
        value = _mul_small_add(value, d.base ** (end - start), chunk, 10)
        start = end
    return _make(d.sign, value)


def radix_digit_count(a: BigNumber, base: int) -> int:
    return len(to_radix(a, base).digits)


def digit_count_for_equivalent(decimal_digits: int, base: int) -> int:
    """Base-b digit budget covering numbers of `decimal_digits` decimal digits.

    Equals ceil(decimal_digits * ln(10) / ln(base)): the smallest k with
    base**k >= 10**decimal_digits. The float estimate is corrected with exact
    integer powers.
    """
    if base < 2:
        raise InvalidBaseError(f"base must be >= 2, got {base}")
    if decimal_digits < 1:
        raise ArithmeticTaskError(f"decimal_digits must be >= 1, got {decimal_digits}")
    target = 10**decimal_digits
    k = max(1, math.ceil(decimal_digits * math.log(10) / math.log(base)))
    while base**k < target:
        k += 1
    while k > 1 and base ** (k - 1) >= target:
        k -= 1
    return k
