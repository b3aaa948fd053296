"""Error types shared by the number engines."""
from enum import Enum


class ArithmeticTaskError(ValueError):
    """Base class for every error raised by the engines."""


class ParseError(ArithmeticTaskError):
    """A decimal string could not be parsed."""

    def __init__(self, text: str, position: int, message: str):
        self.text = text
        self.position = position
        super().__init__(f"{message} at position {position} in {text!r}")


class InvalidBaseError(ArithmeticTaskError):
    pass


class InvalidDigitError(ArithmeticTaskError):
    pass


class OrthographyError(ArithmeticTaskError):
    """Invalid orthography combination, or a number the orthography cannot hold."""


class MalformedReason(str, Enum):
    EMPTY = "empty input"
    UNKNOWN_TOKEN = "unknown token"
    POSITION_GAP = "position-token gap"
    POSITION_DUPLICATE = "position-token duplicate"
    POSITION_ORDER = "position tokens out of order"
    DIGIT_OUT_OF_RANGE = "digit out of range for base"
    NON_CANONICAL = "non-canonical digits"
    LENGTH = "wrong length"
    STRUCTURE = "ill-formed structure"
    ILL_FORMED_SCALE = "ill-formed scale"


class MalformedSequence(ArithmeticTaskError):
    """A token sequence is not in the image of the encoder it was decoded with."""

    def __init__(self, reason: MalformedReason, detail: str = ""):
        self.reason = reason
        self.detail = detail
        message = reason.value if not detail else f"{reason.value}: {detail}"
        super().__init__(message)
