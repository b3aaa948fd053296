"""
English short-scale cardinals: "eight hundred thirty-two", "minus one hundred sixty-five".

The dialect is num2words' English output with "and" and commas removed:
tens and units are hyphenated, hundreds are always spelled "one hundred",
scale words run from thousand up to vigintillion (10^63).
"""
from engines.bignum import BigNumber, from_decimal_string
from engines.errors import MalformedReason, MalformedSequence, OrthographyError
from engines.tokens import TokenSequence

ONES = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine",
    "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen",
    "seventeen", "eighteen", "nineteen",
]

TENS = ["", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"]

# Index k names 10^(3k); spellings follow num2words (note "septdecillion")
SCALES = [
    "", "thousand", "million", "billion", "trillion", "quadrillion", "quintillion",
    "sextillion", "septillion", "octillion", "nonillion", "decillion", "undecillion",
    "duodecillion", "tredecillion", "quattuordecillion", "quindecillion", "sexdecillion",
    "septdecillion", "octodecillion", "novemdecillion", "vigintillion",
]

MINUS = "minus"
HUNDRED = "hundred"
MAX_WORDS_DIGITS = 64

_ONES_MAP = {w: i for i, w in enumerate(ONES)}
_TENS_MAP = {w: i for i, w in enumerate(TENS) if w}
_SCALE_MAP = {w: i for i, w in enumerate(SCALES) if w}


def _group_words(value: int) -> list[str]:
    """Words for 1..999."""
    words = []
    hundreds, rest = divmod(value, 100)
    if hundreds:
        words += [ONES[hundreds], HUNDRED]
    if rest >= 20:
        tens, units = divmod(rest, 10)
        words.append(f"{TENS[tens]}-{ONES[units]}" if units else TENS[tens])
    elif rest:
        words.append(ONES[rest])
    return words


def number_to_words(n: BigNumber) -> TokenSequence:
    if len(n.magnitude) > MAX_WORDS_DIGITS:
        raise OrthographyError(f"words support magnitudes below 10^{MAX_WORDS_DIGITS}, got {len(n.magnitude)} digits")
    if n.is_zero:
        return TokenSequence.of(ONES[0])
    digits = "".join(str(d) for d in n.magnitude)
    digits = digits.zfill(-(-len(digits) // 3) * 3)
    groups = [int(digits[i:i + 3]) for i in range(0, len(digits), 3)]
    words = [MINUS] if n.is_negative else []
    for position, value in enumerate(groups):
        if not value:
            continue
        words += _group_words(value)
        scale = SCALES[len(groups) - 1 - position]
        if scale:
            words.append(scale)
    return TokenSequence(tuple(words))


def _units_value(token: str) -> int | None:
    """Value of a sub-hundred token ("seven", "forty", "forty-two"), or None."""
    if token in _ONES_MAP and token != ONES[0]:
        return _ONES_MAP[token]
    if token in _TENS_MAP:
        return _TENS_MAP[token] * 10
    if "-" in token:
        tens, _, units = token.partition("-")
        if tens in _TENS_MAP and units in _ONES_MAP and 0 < _ONES_MAP[units] < 10:
            return _TENS_MAP[tens] * 10 + _ONES_MAP[units]
    return None


def _is_known(token: str) -> bool:
    return (
        token in _ONES_MAP
        or token in _SCALE_MAP
        or token in (HUNDRED, MINUS)
        or _units_value(token) is not None
    )


def words_to_number(t: TokenSequence) -> BigNumber:
    """Strict inverse of number_to_words: anything outside its image is rejected."""
    tokens = list(t.tokens)
    if not tokens:
        raise MalformedSequence(MalformedReason.EMPTY)
    for token in tokens:
        if not _is_known(token):
            raise MalformedSequence(MalformedReason.UNKNOWN_TOKEN, token)

    negative = tokens[0] == MINUS
    body = tokens[1:] if negative else tokens
    if not body:
        raise MalformedSequence(MalformedReason.ILL_FORMED_SCALE, "sign without a number")

    groups: dict[int, int] = {}
    if body == [ONES[0]]:
        value = from_decimal_string("0")
    else:
        pos = 0
        last_scale = len(SCALES)
        while pos < len(body):
            group = 0
            token = body[pos]
            if token in _ONES_MAP and 0 < _ONES_MAP[token] < 10 and pos + 1 < len(body) and body[pos + 1] == HUNDRED:
                group = _ONES_MAP[token] * 100
                pos += 2
            if pos < len(body):
                units = _units_value(body[pos])
                if units is not None:
                    group += units
                    pos += 1
            if not group:
                raise MalformedSequence(MalformedReason.ILL_FORMED_SCALE, f"unexpected {body[pos]!r}")
            scale = 0
            if pos < len(body):
                if body[pos] not in _SCALE_MAP:
                    raise MalformedSequence(MalformedReason.ILL_FORMED_SCALE, f"unexpected {body[pos]!r}")
                scale = _SCALE_MAP[body[pos]]
                pos += 1
            if scale >= last_scale:
                raise MalformedSequence(MalformedReason.ILL_FORMED_SCALE, f"scale {SCALES[scale] or 'units'} out of order")
            groups[scale] = group
            last_scale = scale
        top = max(groups)
        digits = "".join(f"{groups.get(k, 0):03d}" for k in range(top, -1, -1))
        value = from_decimal_string(("-" if negative else "") + digits)

    if number_to_words(value).tokens != t.tokens:
        raise MalformedSequence(MalformedReason.ILL_FORMED_SCALE, f"not a canonical cardinal: {t.wire!r}")
    return value
