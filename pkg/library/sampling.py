"""
Seeded operand sampling.

Example i of a dataset seeded with s draws only from its own stream,
PCG64(SeedSequence(entropy=s, spawn_key=(i,))), so any example can be
regenerated alone and output does not depend on how generation is split up.
Integers come from the generator's raw 64-bit words with rejection, which keeps
the streams identical across numpy versions and platforms.
"""
import hashlib

import numpy as np

from engines.bignum import BigNumber, RadixDigits, from_radix

RNG_NAME = "numpy.PCG64+SeedSequence(entropy=seed, spawn_key=(index,)), raw-word rejection"

_WORD = 1 << 64


def derive_seed(seed: int, label: str) -> int:
    """Independent 64-bit seed for a named part of a run (e.g. a dataset split)."""
    digest = hashlib.sha256(f"{seed}:{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


class ExampleStream:
    """The random stream of one (seed, index) pair."""

    def __init__(self, seed: int, index: int):
        self.seed = seed
        self.index = index
        self._bits = np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))

    def below(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        if n == 1:
            return 0
        limit = _WORD - (_WORD % n)
        while True:
            raw = int(self._bits.random_raw())
            if raw < limit:
                return raw % n

    def below_many(self, n: int, count: int) -> list[int]:
        """`count` uniform integers in [0, n), consuming raw words in order."""
        if n == 1:
            return [0] * count
        limit = _WORD - (_WORD % n)
        out = []
        for raw in self._bits.random_raw(count).tolist():
            while raw >= limit:
                raw = int(self._bits.random_raw())
            out.append(raw % n)
        return out


def draw_exact_digits(stream: ExampleStream, d: int, base: int = 10) -> BigNumber:
    """Uniform over [base**(d-1), base**d - 1]: a non-zero leading digit, then free digits."""
    digits = [1 + stream.below(base - 1)] + stream.below_many(base, d - 1)
    return from_radix(RadixDigits(base, tuple(digits)))


def draw_up_to_digits(stream: ExampleStream, d: int, base: int = 10) -> BigNumber:
    """Uniform over [0, base**d - 1]."""
    digits = stream.below_many(base, d)
    while len(digits) > 1 and digits[0] == 0:
        digits.pop(0)
    return from_radix(RadixDigits(base, tuple(digits)))


def sample_balanced(D: int, stream: ExampleStream, base: int = 10, min_digits: int = 2) -> tuple[BigNumber, BigNumber]:
    """Draw d uniformly from [min_digits, D], then both operands uniformly among d-digit numbers."""
    if D < min_digits:
        raise ValueError(f"max digits {D} is below min digits {min_digits}")
    d = min_digits + stream.below(D - min_digits + 1)
    return draw_exact_digits(stream, d, base), draw_exact_digits(stream, d, base)


def sample_random(D: int, stream: ExampleStream, base: int = 10) -> tuple[BigNumber, BigNumber]:
    """Both operands uniformly over [0, base**D - 1]."""
    return draw_up_to_digits(stream, D, base), draw_up_to_digits(stream, D, base)


def shuffled_indices(n: int, seed: int) -> list[int]:
    """Fisher-Yates permutation of range(n) from the stream of (seed, 0)."""
    stream = ExampleStream(seed, 0)
    order = list(range(n))
    for i in range(n - 1, 0, -1):
        j = stream.below(i + 1)
        order[i], order[j] = order[j], order[i]
    return order
