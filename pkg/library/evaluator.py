"""
Exact-match scoring of predictions against gold answers.

A prediction scores 1 only when its whitespace-split tokens equal the gold
tokens. Wrong predictions are sorted into one bucket each, checked in this
order: MALFORMED (does not decode), POSITION_SKIP (a 10e-based ladder with
missing, repeated or reordered exponents), LENGTH_MISMATCH, WRONG_DIGITS.
"""
import csv
import math
from collections import Counter
from collections.abc import Mapping
from enum import Enum
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from pydantic import BaseModel

from engines.errors import MalformedSequence
from engines.orthography import SIGN_TOKEN, Order, OrthographySpec, Scheme, decode
from engines.tokens import TokenSequence

# Position tokens beyond 10e9999 are not read as positions
MAX_EXPONENT_DIGITS = 4

Z_95 = 1.96


class EvaluationError(ValueError):
    pass


class ErrorKind(str, Enum):
    WRONG_DIGITS = "wrong_digits"
    MALFORMED = "malformed"
    POSITION_SKIP = "position_skip"
    LENGTH_MISMATCH = "length_mismatch"


class LengthBucket(BaseModel):
    count: int
    correct: int
    accuracy: float


class SkipSummary(BaseModel):
    skipping_predictions: int
    most_common_missing: list[int] = []
    most_common_count: int = 0


class EvalReport(BaseModel):
    n: int
    correct: int
    overall_accuracy: float
    per_length: dict[int, LengthBucket]
    error_taxonomy: dict[ErrorKind, int]
    skip_summary: SkipSummary | None = None


class SkipReport(BaseModel):
    max_exponent_seen: int | None
    missing_exponents: list[int]
    duplicated_exponents: list[int]
    out_of_order: bool
    well_formed: bool
    unparsed_tokens: int = 0


class CISummary(BaseModel):
    mean: float
    half_width: float
    run_accuracies: list[float]

    @property
    def low(self) -> float:
        return self.mean - self.half_width

    @property
    def high(self) -> float:
        return self.mean + self.half_width


def _tokens(text: str | TokenSequence) -> tuple[str, ...]:
    return text.tokens if isinstance(text, TokenSequence) else tuple(text.split())


def exact_match(prediction: str, gold: str) -> int:
    return int(_tokens(prediction) == _tokens(gold))


def _exponent(token: str) -> int | None:
    digits = token[3:]
    if token.startswith("10e") and digits.isascii() and digits.isdigit() and len(digits) <= MAX_EXPONENT_DIGITS:
        if digits == "0" or not digits.startswith("0"):
            return int(digits)
    return None


def _is_digit_token(token: str) -> bool:
    return token.isascii() and token.isdigit()


def analyze_position_skips(t: str | TokenSequence, order: Order = Order.REGULAR) -> SkipReport:
    """Read a 10e-based sequence as (digit, position) pairs and check its exponent ladder.

    Tokens that do not fit the digit/position alternation are counted in
    unparsed_tokens and skipped. Position tokens with more than
    MAX_EXPONENT_DIGITS exponent digits count as unparsed, so the missing list
    stays bounded. The ladder is well formed when the exponents
    run from the largest one seen down to 0 (up from 0 in inverse order) with
    no repeats.
    """
    tokens = _tokens(t)
    i = 1 if tokens and tokens[0] == SIGN_TOKEN else 0
    exponents = []
    unparsed = 0
    while i < len(tokens):
        exponent = _exponent(tokens[i + 1]) if i + 1 < len(tokens) else None
        if _is_digit_token(tokens[i]) and exponent is not None:
            exponents.append(exponent)
            i += 2
        else:
            unparsed += 1
            i += 1

    if not exponents:
        return SkipReport(
            max_exponent_seen=None,
            missing_exponents=[],
            duplicated_exponents=[],
            out_of_order=False,
            well_formed=False,
            unparsed_tokens=unparsed,
        )
    counts = Counter(exponents)
    top = max(exponents)
    missing = sorted(set(range(top + 1)) - set(exponents))
    duplicated = sorted(e for e, c in counts.items() if c > 1)
    step = -1 if order == Order.REGULAR else 1
    out_of_order = any((b - a) * step <= 0 for a, b in zip(exponents, exponents[1:]))
    ladder = list(range(top, -1, -1)) if order == Order.REGULAR else list(range(top + 1))
    return SkipReport(
        max_exponent_seen=top,
        missing_exponents=missing,
        duplicated_exponents=duplicated,
        out_of_order=out_of_order,
        well_formed=exponents == ladder,
        unparsed_tokens=unparsed,
    )


def classify_error(prediction: tuple[str, ...], gold: tuple[str, ...], spec: OrthographySpec | None) -> ErrorKind:
    """Bucket for a prediction already known to differ from its gold answer."""
    if not prediction:
        return ErrorKind.MALFORMED
    if spec is not None:
        if spec.scheme == Scheme.TEN_E_BASED:
            skips = analyze_position_skips(TokenSequence(prediction), spec.order)
            if skips.unparsed_tokens or skips.max_exponent_seen is None:
                return ErrorKind.MALFORMED
            if not skips.well_formed:
                return ErrorKind.POSITION_SKIP
        try:
            decode(TokenSequence(prediction), spec)
        except MalformedSequence:
            return ErrorKind.MALFORMED
    if len(prediction) != len(gold):
        return ErrorKind.LENGTH_MISMATCH
    return ErrorKind.WRONG_DIGITS


def _max_digits(meta: Any) -> int:
    if isinstance(meta, Mapping):
        return max(meta["digits1"], meta["digits2"])
    if isinstance(meta, (tuple, list)):
        return max(meta)
    return max(meta.digits1, meta.digits2)


def evaluate(
    predictions: Sequence[str],
    golds: Sequence[str],
    metadata: Sequence[Any],
    spec: OrthographySpec | None = None,
) -> EvalReport:
    """Score predictions; metadata items carry digits1/digits2 (records, dicts or pairs).

    Without an orthography the taxonomy falls back to token-level checks only.
    """
    if not predictions:
        raise EvaluationError("no predictions to evaluate")
    if len(predictions) != len(golds) or len(golds) != len(metadata):
        raise EvaluationError(
            f"stream lengths differ: {len(predictions)} predictions, {len(golds)} golds, {len(metadata)} metadata"
        )

    counts: Counter = Counter()
    hits: Counter = Counter()
    taxonomy = {kind: 0 for kind in ErrorKind}
    missing_blocks: Counter = Counter()
    for prediction, gold, meta in zip(predictions, golds, metadata):
        length = _max_digits(meta)
        counts[length] += 1
        pred_tokens, gold_tokens = _tokens(prediction), _tokens(gold)
        if pred_tokens == gold_tokens:
            hits[length] += 1
            continue
        kind = classify_error(pred_tokens, gold_tokens, spec)
        taxonomy[kind] += 1
        if kind == ErrorKind.POSITION_SKIP:
            report = analyze_position_skips(TokenSequence(pred_tokens), spec.order)
            missing_blocks[tuple(report.missing_exponents)] += 1

    per_length = {
        length: LengthBucket(count=counts[length], correct=hits[length], accuracy=hits[length] / counts[length])
        for length in sorted(counts)
    }
    correct = sum(hits.values())
    skip_summary = None
    if spec is not None and spec.scheme == Scheme.TEN_E_BASED:
        block, seen = missing_blocks.most_common(1)[0] if missing_blocks else ((), 0)
        skip_summary = SkipSummary(
            skipping_predictions=taxonomy[ErrorKind.POSITION_SKIP],
            most_common_missing=list(block),
            most_common_count=seen,
        )
    return EvalReport(
        n=len(predictions),
        correct=correct,
        overall_accuracy=correct / len(predictions),
        per_length=per_length,
        error_taxonomy=taxonomy,
        skip_summary=skip_summary,
    )


def confidence_interval(run_accuracies: Sequence[float]) -> CISummary:
    """Mean and 95% normal-approximation half-width 1.96 * s / sqrt(n)."""
    if len(run_accuracies) < 2:
        raise EvaluationError(f"need at least 2 runs, got {len(run_accuracies)}")
    values = np.asarray(run_accuracies, dtype=np.float64)
    if np.any(values < 0) or np.any(values > 1):
        raise EvaluationError("run accuracies must lie in [0, 1]")
    s = float(np.std(values, ddof=1))
    return CISummary(
        mean=float(values.mean()),
        half_width=Z_95 * s / math.sqrt(len(values)),
        run_accuracies=[float(v) for v in values],
    )


def render_table(report: EvalReport) -> str:
    lines = [
        f"examples: {report.n}  correct: {report.correct}  accuracy: {report.overall_accuracy:.4f}",
        "",
        f"{'digits':>6}  {'count':>7}  {'correct':>7}  {'accuracy':>8}",
    ]
    for length, bucket in report.per_length.items():
        lines.append(f"{length:>6}  {bucket.count:>7}  {bucket.correct:>7}  {bucket.accuracy:>8.4f}")
    lines.append("")
    lines.append("errors: " + ", ".join(f"{kind.value}={count}" for kind, count in report.error_taxonomy.items()))
    if report.skip_summary and report.skip_summary.skipping_predictions:
        block = report.skip_summary.most_common_missing
        lines.append(
            f"position skips: {report.skip_summary.skipping_predictions} "
            f"(most common missing block 10e{block[-1]}..10e{block[0]}, {report.skip_summary.most_common_count}x)"
            if block
            else f"position skips: {report.skip_summary.skipping_predictions}"
        )
    return "\n".join(lines)


def report_to_json(report: EvalReport) -> str:
    return report.model_dump_json(indent=2)


def write_per_length_csv(report: EvalReport, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["digits", "count", "correct", "accuracy"])
        for length, bucket in report.per_length.items():
            writer.writerow([length, bucket.count, bucket.correct, f"{bucket.accuracy:.6f}"])
