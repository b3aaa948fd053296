"""
Dataset generation: "What is <n1> plus <n2> ?" questions with encoded answers.

Datasets are written as JSONL (one record per line, fields question, answer,
n1, n2, op, digits1, digits2) with a sibling "<stem>.manifest.json" that echoes
the sampling config and orthography and records a sha256 digest of the file.
"""
import hashlib
import json
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterator, Sequence

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from engines.bignum import BigNumber, add, radix_digit_count, sub
from engines.orthography import OrthographySpec, encode
from library.sampling import RNG_NAME, ExampleStream, sample_balanced, sample_random, shuffled_indices

logger = logging.getLogger(__name__)

QUESTION_PREFIX = ("What", "is")
QUESTION_MARK = "?"
FORMAT_VERSION = 1

# Upper bound on the number of pairs an exhaustive config may enumerate
MAX_EXHAUSTIVE_PAIRS = 10_000_000


class SamplingMethod(str, Enum):
    BALANCED = "balanced"
    RANDOM = "random"
    EXHAUSTIVE = "exhaustive"


class Operation(str, Enum):
    PLUS = "plus"
    MINUS = "minus"
    MIXED = "mixed"


class DatasetFormatError(ValueError):
    """A dataset or prediction file does not follow the JSONL schema."""


class SamplingConfig(BaseModel):
    method: SamplingMethod = SamplingMethod.BALANCED
    max_digits: int = Field(ge=2)
    min_digits: int = Field(2, ge=1)
    base: int = Field(10, ge=2)
    count: int = Field(1, ge=1)
    seed: int = Field(0, ge=0, lt=2**64)
    operation: Operation = Operation.PLUS
    # Keep only examples whose longer operand has more digits than this
    require_digits_above: int | None = Field(None, ge=0)

    @model_validator(mode="after")
    def _check_ranges(self):
        if self.min_digits > self.max_digits:
            raise ValueError(f"min_digits {self.min_digits} exceeds max_digits {self.max_digits}")
        if self.require_digits_above is not None and self.require_digits_above >= self.max_digits:
            raise ValueError("require_digits_above must be below max_digits")
        if self.method == SamplingMethod.EXHAUSTIVE:
            numbers = self.base**self.max_digits - self.base ** (self.max_digits - 1)
            if numbers * numbers > MAX_EXHAUSTIVE_PAIRS:
                raise ValueError(f"exhaustive sampling of {self.max_digits}-digit pairs is too large")
        return self

    @property
    def total(self) -> int:
        """Number of examples the config produces."""
        if self.method == SamplingMethod.EXHAUSTIVE:
            numbers = self.base**self.max_digits - self.base ** (self.max_digits - 1)
            return numbers * numbers
        return self.count


@dataclass(frozen=True)
class Example:
    question: str
    answer: str
    n1: BigNumber
    n2: BigNumber
    operation: Operation
    digits1: int
    digits2: int
    spec: OrthographySpec
    seed_lineage: tuple[int, int]

    @property
    def max_operand_digits(self) -> int:
        return max(self.digits1, self.digits2)

    def to_record(self) -> dict:
        return {
            "question": self.question,
            "answer": self.answer,
            "n1": self.n1.to_decimal_string(),
            "n2": self.n2.to_decimal_string(),
            "op": self.operation.value,
            "digits1": self.digits1,
            "digits2": self.digits2,
        }


class ExampleRecord(BaseModel):
    """One JSONL line as read back from disk."""
    model_config = ConfigDict(extra="ignore")

    question: str
    answer: str
    n1: str
    n2: str
    op: Operation
    digits1: int
    digits2: int

    @property
    def max_operand_digits(self) -> int:
        return max(self.digits1, self.digits2)


class DatasetManifest(BaseModel):
    format_version: int = FORMAT_VERSION
    split: str
    preset: str | None = None
    config: SamplingConfig
    orthography: OrthographySpec
    count: int
    digest: str
    generator: str = RNG_NAME


@dataclass
class LoadedDataset:
    records: list[ExampleRecord]
    manifest: DatasetManifest | None


def apply_operation(n1: BigNumber, n2: BigNumber, op: Operation) -> BigNumber:
    if op == Operation.PLUS:
        return add(n1, n2)
    if op == Operation.MINUS:
        return sub(n1, n2)
    raise ValueError(f"{op.value} is not a single operation")


def render_example(
    n1: BigNumber,
    n2: BigNumber,
    op: Operation,
    spec: OrthographySpec,
    seed_lineage: tuple[int, int] = (0, 0),
) -> Example:
    answer = encode(apply_operation(n1, n2, op), spec)
    question = " ".join([*QUESTION_PREFIX, encode(n1, spec).wire, op.value, encode(n2, spec).wire, QUESTION_MARK])
    return Example(
        question=question,
        answer=answer.wire,
        n1=n1,
        n2=n2,
        operation=op,
        digits1=radix_digit_count(n1, spec.base),
        digits2=radix_digit_count(n2, spec.base),
        spec=spec,
        seed_lineage=seed_lineage,
    )


def question_spans(tokens: Sequence[str]) -> tuple[range, range]:
    """Token index ranges of the two operands in a question."""
    if len(tokens) < 6 or tuple(tokens[:2]) != QUESTION_PREFIX or tokens[-1] != QUESTION_MARK:
        raise DatasetFormatError(f"not a question: {' '.join(tokens)!r}")
    ops = {Operation.PLUS.value, Operation.MINUS.value}
    # Start after the first operand token so a leading "minus" sign is never taken for the operator
    for k in range(3, len(tokens) - 2):
        if tokens[k] in ops:
            return range(2, k), range(k + 1, len(tokens) - 1)
    raise DatasetFormatError(f"no operator in question: {' '.join(tokens)!r}")


def _pick_operation(cfg: SamplingConfig, stream: ExampleStream) -> Operation:
    if cfg.operation != Operation.MIXED:
        return cfg.operation
    return (Operation.PLUS, Operation.MINUS)[stream.below(2)]


def _exhaustive_examples(cfg: SamplingConfig, spec: OrthographySpec) -> Iterator[Example]:
    lo, hi = cfg.base ** (cfg.max_digits - 1), cfg.base**cfg.max_digits
    numbers = [BigNumber.from_int(v) for v in range(lo, hi)]
    index = 0
    for n1 in numbers:
        for n2 in numbers:
            op = _pick_operation(cfg, ExampleStream(cfg.seed, index))
            yield render_example(n1, n2, op, spec, (cfg.seed, index))
            index += 1


def iter_examples(cfg: SamplingConfig, spec: OrthographySpec) -> Iterator[Example]:
    """Examples in index order; rejected draws still consume their index."""
    if spec.base != cfg.base:
        raise ValueError(f"sampling base {cfg.base} differs from orthography base {spec.base}")
    if cfg.method == SamplingMethod.EXHAUSTIVE:
        yield from _exhaustive_examples(cfg, spec)
        return
    produced = 0
    index = 0
    while produced < cfg.count:
        stream = ExampleStream(cfg.seed, index)
        op = _pick_operation(cfg, stream)
        if cfg.method == SamplingMethod.BALANCED:
            n1, n2 = sample_balanced(cfg.max_digits, stream, cfg.base, cfg.min_digits)
        else:
            n1, n2 = sample_random(cfg.max_digits, stream, cfg.base)
        example = render_example(n1, n2, op, spec, (cfg.seed, index))
        index += 1
        if cfg.require_digits_above is not None and example.max_operand_digits <= cfg.require_digits_above:
            continue
        produced += 1
        yield example


def records_to_jsonl(examples: Sequence[Example]) -> bytes:
    lines = [json.dumps(ex.to_record(), ensure_ascii=False) + "\n" for ex in examples]
    return "".join(lines).encode("utf-8")


def dataset_digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def generate_dataset(
    cfg: SamplingConfig,
    spec: OrthographySpec,
    split: str,
    preset: str | None = None,
) -> tuple[list[Example], DatasetManifest]:
    examples = list(iter_examples(cfg, spec))
    manifest = DatasetManifest(
        split=split,
        preset=preset,
        config=cfg,
        orthography=spec,
        count=len(examples),
        digest=dataset_digest(records_to_jsonl(examples)),
    )
    logger.info(f"Generated {len(examples)} {split} examples ({cfg.method.value}, D={cfg.max_digits}, {spec.label})")
    return examples, manifest


def manifest_path(path: Path) -> Path:
    return path.with_name(path.stem + ".manifest.json")


def write_dataset(examples: Sequence[Example], manifest: DatasetManifest, path: Path) -> Path:
    """Write the JSONL file and its manifest; returns the manifest path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = records_to_jsonl(examples)
    if dataset_digest(data) != manifest.digest:
        raise ValueError("manifest digest does not match the examples")
    path.write_bytes(data)
    target = manifest_path(path)
    target.write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return target


def _parse_jsonl(text: str, source: str) -> list[dict]:
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            rows.append(json.loads(line))
        except json.JSONDecodeError as e:
            raise DatasetFormatError(f"{source}:{lineno}: invalid JSON ({e.msg})") from e
    return rows


def parse_records(text: str, source: str = "<records>") -> list[ExampleRecord]:
    records = []
    for lineno, row in enumerate(_parse_jsonl(text, source), 1):
        try:
            records.append(ExampleRecord.model_validate(row))
        except ValidationError as e:
            raise DatasetFormatError(f"{source}:{lineno}: {e.errors()[0]['msg']}") from e
    return records


def read_dataset(path: Path) -> LoadedDataset:
    path = Path(path)
    records = parse_records(path.read_text(encoding="utf-8"), str(path))
    manifest = None
    if manifest_path(path).exists():
        try:
            manifest = DatasetManifest.model_validate_json(manifest_path(path).read_text(encoding="utf-8"))
        except ValidationError as e:
            raise DatasetFormatError(f"{manifest_path(path)}: {e.errors()[0]['msg']}") from e
    return LoadedDataset(records=records, manifest=manifest)


def parse_predictions(text: str, source: str = "<predictions>") -> list[str]:
    """Predictions as wire strings in example order.

    Accepts JSONL records {"index": i, "prediction": "..."} (any line order,
    each index exactly once) or plain text with one prediction per line.
    """
    if not text.lstrip().startswith("{"):
        return text.splitlines()
    by_index: dict[int, str] = {}
    for lineno, row in enumerate(_parse_jsonl(text, source), 1):
        if not isinstance(row, dict) or "index" not in row or "prediction" not in row:
            raise DatasetFormatError(f"{source}:{lineno}: expected fields index and prediction")
        index = row["index"]
        if not isinstance(index, int) or index < 0 or index in by_index:
            raise DatasetFormatError(f"{source}:{lineno}: bad or repeated index {index!r}")
        by_index[index] = str(row["prediction"])
    if sorted(by_index) != list(range(len(by_index))):
        raise DatasetFormatError(f"{source}: prediction indices are not contiguous from 0")
    return [by_index[i] for i in range(len(by_index))]


def read_predictions(path: Path) -> list[str]:
    path = Path(path)
    return parse_predictions(path.read_text(encoding="utf-8"), str(path))


def write_predictions(predictions: Sequence[str], path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for index, prediction in enumerate(predictions):
            f.write(json.dumps({"index": index, "prediction": prediction}, ensure_ascii=False) + "\n")


def split_examples(items: Sequence, seed: int, ratio: tuple[int, int] = (9, 1)) -> tuple[list, list]:
    """Deterministic shuffled split, e.g. 9:1 into train and test."""
    order = shuffled_indices(len(items), seed)
    cut = len(items) * ratio[0] // sum(ratio)
    return [items[i] for i in order[:cut]], [items[i] for i in order[cut:]]