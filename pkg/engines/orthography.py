"""
Surface forms of numbers: the seven orthographies, in regular or inverse order.

    DECIMAL          832
    CHARACTER        8 3 2
    FIXED_CHARACTER  0 8 3 2          (max_digits = 4)
    UNDERSCORE       8_3_2
    WORDS            eight hundred thirty-two
    TEN_BASED        8 100 3 10 2
    TEN_E_BASED      8 10e2 3 10e1 2 10e0

Negative numbers get a leading "-" token ("minus" for WORDS) in both orders.
Inverse order emits digit groups least significant first. Decoding is strict:
a sequence is accepted only if encoding its value reproduces it exactly.
"""
import re
from enum import Enum
from typing import Sequence

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from engines.bignum import BigNumber, RadixDigits, from_radix, to_radix
from engines.errors import MalformedReason, MalformedSequence, OrthographyError
from engines.tokens import TokenSequence
from engines.words import HUNDRED, MAX_WORDS_DIGITS, MINUS, ONES, SCALES, TENS, number_to_words, words_to_number

SIGN_TOKEN = "-"
POSITION_PREFIX = "10e"
_POSITION_RE = re.compile(r"10e(0|[1-9][0-9]*)")
MAX_LISTED_GAPS = 10


class Scheme(str, Enum):
    DECIMAL = "decimal"
    CHARACTER = "char"
    FIXED_CHARACTER = "fixedchar"
    UNDERSCORE = "underscore"
    WORDS = "words"
    TEN_BASED = "10based"
    TEN_E_BASED = "10ebased"


class Order(str, Enum):
    REGULAR = "regular"
    INVERSE = "inverse"


SCHEME_ALIASES = {
    "character": Scheme.CHARACTER,
    "fixed": Scheme.FIXED_CHARACTER,
    "10": Scheme.TEN_BASED,
    "10e": Scheme.TEN_E_BASED,
}

# Schemes that write one token per base-b digit plus optional place tokens
MULTI_BASE_SCHEMES = {Scheme.CHARACTER, Scheme.TEN_BASED, Scheme.TEN_E_BASED}

# The whole number is one token; the sign is written inside it ("-165")
SINGLE_TOKEN_SCHEMES = {Scheme.DECIMAL, Scheme.UNDERSCORE}


def parse_scheme(name: str) -> Scheme:
    key = name.strip().lower()
    if key in SCHEME_ALIASES:
        return SCHEME_ALIASES[key]
    try:
        return Scheme(key)
    except ValueError:
        choices = ", ".join(s.value for s in Scheme)
        raise OrthographyError(f"unknown scheme {name!r} (choose from {choices})") from None


class OrthographySpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    scheme: Scheme
    order: Order = Order.REGULAR
    base: int = Field(10, ge=2)
    max_digits: int | None = Field(None, ge=1)

    @field_validator("scheme", mode="before")
    @classmethod
    def _accept_aliases(cls, value):
        return parse_scheme(value) if isinstance(value, str) else value

    @model_validator(mode="after")
    def _check_combination(self):
        if self.scheme == Scheme.FIXED_CHARACTER and self.max_digits is None:
            raise OrthographyError("fixedchar requires max_digits")
        if self.scheme != Scheme.FIXED_CHARACTER and self.max_digits is not None:
            raise OrthographyError(f"max_digits only applies to fixedchar, not {self.scheme.value}")
        if self.base != 10 and self.scheme not in MULTI_BASE_SCHEMES:
            raise OrthographyError(f"base {self.base} is not supported by {self.scheme.value}")
        if self.scheme == Scheme.WORDS and self.order == Order.INVERSE:
            raise OrthographyError("words cannot be written in inverse order")
        return self

    @property
    def label(self) -> str:
        parts = [self.scheme.value, self.order.value]
        if self.base != 10:
            parts.append(f"base{self.base}")
        if self.max_digits is not None:
            parts.append(f"max{self.max_digits}")
        return "-".join(parts)


def position_token(exponent: int) -> str:
    if exponent < 0:
        raise ValueError(f"exponent must be >= 0, got {exponent}")
    return f"{POSITION_PREFIX}{exponent}"


def power_token(exponent: int) -> str:
    """Place token of TEN_BASED: b**exponent written as a base-b numeral."""
    return "1" + "0" * exponent


def token_inventory(spec: OrthographySpec, max_digits: int) -> set[str]:
    """Every token spec can emit for numbers of up to max_digits digits.

    DECIMAL and UNDERSCORE spell each number as one token, so they have no
    closed inventory and return an empty set.
    """
    if spec.scheme in SINGLE_TOKEN_SCHEMES:
        return set()
    if spec.scheme == Scheme.WORDS:
        tens = [t for t in TENS if t]
        words = set(ONES) | set(tens) | {f"{t}-{u}" for t in tens for u in ONES[1:10]}
        return words | {HUNDRED, MINUS} | {s for s in SCALES if s}
    tokens = {SIGN_TOKEN} | {str(d) for d in range(spec.base)}
    if spec.scheme == Scheme.TEN_E_BASED:
        tokens |= {position_token(e) for e in range(max_digits)}
    elif spec.scheme == Scheme.TEN_BASED:
        tokens |= {power_token(e) for e in range(1, max_digits)}
    return tokens


def _digit_groups(digits: tuple[int, ...], scheme: Scheme) -> list[list[str]]:
    k = len(digits)
    groups = []
    for idx, d in enumerate(digits):
        exponent = k - 1 - idx
        if scheme == Scheme.TEN_E_BASED:
            groups.append([str(d), position_token(exponent)])
        elif scheme == Scheme.TEN_BASED and exponent > 0:
            groups.append([str(d), power_token(exponent)])
        else:
            groups.append([str(d)])
    return groups


def encode(n: BigNumber, spec: OrthographySpec) -> TokenSequence:
    if spec.scheme == Scheme.WORDS:
        if len(n.magnitude) > MAX_WORDS_DIGITS:
            raise OrthographyError(f"words support magnitudes below 10^{MAX_WORDS_DIGITS}")
        return number_to_words(n)

    digits = to_radix(n, spec.base).digits
    inverse = spec.order == Order.INVERSE

    if spec.scheme in SINGLE_TOKEN_SCHEMES:
        chars = [str(d) for d in digits]
        if inverse:
            chars.reverse()
        joiner = "" if spec.scheme == Scheme.DECIMAL else "_"
        sign = SIGN_TOKEN if n.is_negative else ""
        return TokenSequence((sign + joiner.join(chars),))

    tokens = [SIGN_TOKEN] if n.is_negative else []

    if spec.scheme == Scheme.FIXED_CHARACTER:
        if len(digits) > spec.max_digits:
            raise OrthographyError(f"{len(digits)} digits exceed max_digits={spec.max_digits}")
        digits = (0,) * (spec.max_digits - len(digits)) + digits

    groups = _digit_groups(digits, spec.scheme)
    if inverse:
        groups.reverse()
    for group in groups:
        tokens.extend(group)
    return TokenSequence(tuple(tokens))


def _parse_digit(token: str, base: int) -> int:
    if not (token.isascii() and token.isdigit()) or (len(token) > 1 and token[0] == "0"):
        raise MalformedSequence(MalformedReason.UNKNOWN_TOKEN, token)
    value = int(token)
    if value >= base:
        raise MalformedSequence(MalformedReason.DIGIT_OUT_OF_RANGE, f"{token} in base {base}")
    return value


def _parse_exponent(token: str, positions: int) -> int:
    """Exponent of a 10e token in a number with `positions` position tokens."""
    match = _POSITION_RE.fullmatch(token)
    if match is None:
        raise MalformedSequence(MalformedReason.UNKNOWN_TOKEN, token)
    # an exponent with more digits than the position count cannot close the ladder
    if len(match.group(1)) > len(str(positions)):
        raise MalformedSequence(MalformedReason.POSITION_GAP, f"{token} in a {positions}-position number")
    return int(match.group(1))


def _missing_exponents(seen: set[int], top: int, limit: int) -> list[int]:
    """Up to `limit` exponents absent from `seen`, counting down from top."""
    missing = []
    e = top
    while e >= 0 and len(missing) < limit:
        if e not in seen:
            missing.append(e)
        e -= 1
    return missing


def check_exponent_ladder(exponents: Sequence[int], order: Order = Order.REGULAR) -> None:
    """Raise MalformedSequence unless exponents are max..0 (or 0..max in inverse order)."""
    seen = set()
    for e in exponents:
        if e in seen:
            raise MalformedSequence(MalformedReason.POSITION_DUPLICATE, position_token(e))
        seen.add(e)
    top = max(exponents)
    gap = top + 1 - len(seen)
    if gap:
        names = ", ".join(position_token(e) for e in _missing_exponents(seen, top, MAX_LISTED_GAPS))
        if gap > MAX_LISTED_GAPS:
            names += f" and {gap - MAX_LISTED_GAPS} more"
        raise MalformedSequence(MalformedReason.POSITION_GAP, f"{names} missing")
    expected = list(range(len(exponents) - 1, -1, -1))
    if order == Order.INVERSE:
        expected.reverse()
    if list(exponents) != expected:
        raise MalformedSequence(MalformedReason.POSITION_ORDER, " ".join(position_token(e) for e in exponents))


def _decode_digits(body: list[str], spec: OrthographySpec) -> list[int]:
    """Digits MSF from the unsigned part of a sequence."""
    inverse = spec.order == Order.INVERSE
    scheme = spec.scheme

    if scheme in SINGLE_TOKEN_SCHEMES:
        if len(body) != 1:
            raise MalformedSequence(MalformedReason.LENGTH, f"expected 1 token, got {len(body)}")
        parts = list(body[0]) if scheme == Scheme.DECIMAL else body[0].split("_")
        if any(len(p) != 1 for p in parts):
            raise MalformedSequence(MalformedReason.UNKNOWN_TOKEN, body[0])
        digits = [_parse_digit(p, 10) for p in parts]
    elif scheme in (Scheme.CHARACTER, Scheme.FIXED_CHARACTER):
        if scheme == Scheme.FIXED_CHARACTER and len(body) != spec.max_digits:
            raise MalformedSequence(MalformedReason.LENGTH, f"expected {spec.max_digits} digits, got {len(body)}")
        digits = [_parse_digit(tok, spec.base) for tok in body]
    elif scheme == Scheme.TEN_E_BASED:
        if len(body) % 2:
            raise MalformedSequence(MalformedReason.STRUCTURE, "digits and position tokens must alternate")
        digits = [_parse_digit(tok, spec.base) for tok in body[0::2]]
        check_exponent_ladder([_parse_exponent(tok, len(body) // 2) for tok in body[1::2]], spec.order)
        return list(reversed(digits)) if inverse else digits
    else:
        if len(body) % 2 == 0:
            raise MalformedSequence(MalformedReason.STRUCTURE, "expected an odd number of tokens")
        k = (len(body) + 1) // 2
        if inverse:
            digit_tokens = [body[0]] + body[1::2]
            power_tokens = body[2::2]
            expected = [power_token(e) for e in range(1, k)]
        else:
            digit_tokens = body[0::2]
            power_tokens = body[1::2]
            expected = [power_token(e) for e in range(k - 1, 0, -1)]
        digits = [_parse_digit(tok, spec.base) for tok in digit_tokens]
        for got, want in zip(power_tokens, expected):
            if got != want:
                reason = MalformedReason.POSITION_GAP if set(got[1:]) <= {"0"} and got[:1] == "1" else MalformedReason.UNKNOWN_TOKEN
                raise MalformedSequence(reason, f"expected {want}, got {got}")
        return list(reversed(digits)) if inverse else digits

    return list(reversed(digits)) if inverse else digits


def decode(t: TokenSequence, spec: OrthographySpec) -> BigNumber:
    tokens = list(t.tokens)
    if not tokens:
        raise MalformedSequence(MalformedReason.EMPTY)
    if spec.scheme == Scheme.WORDS:
        return words_to_number(t)

    if spec.scheme in SINGLE_TOKEN_SCHEMES:
        negative = len(tokens) == 1 and tokens[0].startswith(SIGN_TOKEN)
        body = [tokens[0][1:]] if negative else tokens
    else:
        negative = tokens[0] == SIGN_TOKEN
        body = tokens[1:] if negative else tokens
    if not body or body == [""]:
        raise MalformedSequence(MalformedReason.EMPTY, "sign without digits")

    digits = _decode_digits(body, spec)
    if spec.scheme == Scheme.FIXED_CHARACTER:
        while len(digits) > 1 and digits[0] == 0:
            digits.pop(0)
    if len(digits) > 1 and digits[0] == 0:
        raise MalformedSequence(MalformedReason.NON_CANONICAL, "leading zero")
    if negative and digits == [0]:
        raise MalformedSequence(MalformedReason.NON_CANONICAL, "negative zero")

    value = from_radix(RadixDigits(spec.base, tuple(digits), -1 if negative else 1))
    if encode(value, spec).tokens != t.tokens:
        raise MalformedSequence(MalformedReason.NON_CANONICAL, t.wire)
    return value


def digit_indices(tokens: Sequence[str], spec: OrthographySpec) -> tuple[list[int | None], int]:
    """Big-endian digit index i for each token of one encoded number, plus digit count n.

    The most significant digit gets i = n, the least significant i = 1, in
    either order. Sign and place tokens get None; schemes without per-digit
    tokens (decimal, underscore, words) report n = 0.
    """
    indices: list[int | None] = [None] * len(tokens)
    start = 1 if tokens and tokens[0] == SIGN_TOKEN else 0
    offsets = range(len(tokens) - start)
    if spec.scheme in (Scheme.CHARACTER, Scheme.FIXED_CHARACTER):
        digit_offsets = list(offsets)
    elif spec.scheme == Scheme.TEN_E_BASED:
        digit_offsets = [j for j in offsets if j % 2 == 0]
    elif spec.scheme == Scheme.TEN_BASED:
        if spec.order == Order.INVERSE:
            digit_offsets = [j for j in offsets if j == 0 or j % 2 == 1]
        else:
            digit_offsets = [j for j in offsets if j % 2 == 0]
    else:
        return indices, 0
    n = len(digit_offsets)
    for rank, j in enumerate(digit_offsets):
        indices[start + j] = rank + 1 if spec.order == Order.INVERSE else n - rank
    return indices, n
