"""
Named experiment setups. A preset fixes the orthography, the sampling of every
split and, where the setup trains a model, the number of epochs; only the seed
and output paths come from the caller.
"""
from pydantic import BaseModel, Field

from engines.bignum import digit_count_for_equivalent
from engines.orthography import Order, OrthographySpec, Scheme
from library.sampling import derive_seed
from library.taskgen import Operation, SamplingConfig, SamplingMethod
from microformer.config import ModelConfig

# Training epochs by training-set size
EPOCHS_BY_SIZE = {10**3: 200, 10**4: 100, 10**5: 20, 10**6: 10, 10**7: 1}

POSITION_EMBEDDING_DIGITS = range(3, 10)
# Other names accepted for a preset
PRESET_ALIASES = {"figure2-smoke": "posembed-smoke"}
BASES = (2, 3, 10, 19)
ORTHOGRAPHY_DIGITS = (2, 5, 10, 15, 20, 25, 30)

# Small enough that one 55-epoch two-digit run takes a few minutes on a CPU
SMOKE_MODEL = ModelConfig(
    layers_encoder=1,
    layers_decoder=1,
    model_width=64,
    heads=4,
    feedforward_width=256,
    max_sequence_length=64,
)


class SplitPlan(BaseModel):
    name: str
    method: SamplingMethod
    max_digits: int
    min_digits: int = 2
    count: int = Field(ge=1)
    require_digits_above: int | None = None


class Preset(BaseModel):
    name: str
    description: str
    orthography: OrthographySpec
    operation: Operation = Operation.PLUS
    splits: list[SplitPlan]
    epochs: int | None = None
    # Single-split presets are written as train and test files divided by this ratio
    holdout_ratio: tuple[int, int] | None = None
    # Model size for presets that train; command-line flags still override it
    model: ModelConfig | None = None

    @property
    def seed_name(self) -> str:
        """Name the seeds derive from; an alias draws the same data as its target."""
        return PRESET_ALIASES.get(self.name, self.name)

    def split(self, name: str) -> SplitPlan:
        for plan in self.splits:
            if plan.name == name:
                return plan
        names = ", ".join(p.name for p in self.splits)
        raise KeyError(f"preset {self.name} has no split {name!r} (has {names})")

    def sampling_config(self, split: str, seed: int, count: int | None = None) -> SamplingConfig:
        plan = self.split(split)
        return SamplingConfig(
            method=plan.method,
            max_digits=plan.max_digits,
            min_digits=plan.min_digits,
            base=self.orthography.base,
            count=count or plan.count,
            seed=derive_seed(seed, f"{self.seed_name}/{split}"),
            operation=self.operation,
            require_digits_above=plan.require_digits_above,
        )


def epochs_for_dataset_size(size: int) -> int:
    """Epochs for the largest tabulated size not above `size` (the smallest entry below 10^3)."""
    eligible = [s for s in EPOCHS_BY_SIZE if s <= size]
    return EPOCHS_BY_SIZE[max(eligible) if eligible else min(EPOCHS_BY_SIZE)]


def _standard_splits(
    train: SamplingMethod, test: SamplingMethod, digits: int, train_count: int, dev_count: int, test_count: int = 10_000
) -> list[SplitPlan]:
    return [
        SplitPlan(name="train", method=train, max_digits=digits, count=train_count),
        SplitPlan(name="dev", method=train, max_digits=digits, count=dev_count),
        SplitPlan(name="test", method=test, max_digits=digits, count=test_count),
    ]


def _build_presets() -> dict[str, Preset]:
    ten_e = OrthographySpec(scheme=Scheme.TEN_E_BASED)
    presets = [
        Preset(
            name="interpolation-60",
            description="Train and test on numbers of up to 60 digits",
            orthography=ten_e,
            splits=_standard_splits(SamplingMethod.BALANCED, SamplingMethod.RANDOM, 60, 100_000, 10_000),
        ),
        Preset(
            name="extrapolation-50-60",
            description="Train on up to 50 digits, test on 60-digit problems with an operand above 50 digits",
            orthography=ten_e,
            splits=[
                SplitPlan(name="train", method=SamplingMethod.BALANCED, max_digits=50, count=100_000),
                SplitPlan(name="dev", method=SamplingMethod.BALANCED, max_digits=50, count=10_000),
                SplitPlan(name="test", method=SamplingMethod.RANDOM, max_digits=60, count=10_000, require_digits_above=50),
            ],
        ),
        Preset(
            name="posembed-smoke",
            description="All pairs of 2-digit addends, split 9:1, for the position-embedding comparison",
            orthography=OrthographySpec(scheme=Scheme.CHARACTER),
            splits=[SplitPlan(name="all", method=SamplingMethod.EXHAUSTIVE, max_digits=2, count=8_100)],
            epochs=55,
            holdout_ratio=(9, 1),
            model=SMOKE_MODEL,
        ),
    ]
    for d in POSITION_EMBEDDING_DIGITS:
        presets.append(Preset(
            name=f"posembed-{d}",
            description=f"10,000 random {d}-digit additions, split 9:1",
            orthography=OrthographySpec(scheme=Scheme.CHARACTER),
            splits=[SplitPlan(name="all", method=SamplingMethod.BALANCED, max_digits=d, min_digits=d, count=10_000)],
            epochs=55,
            holdout_ratio=(9, 1),
        ))
    for base in BASES:
        digits = digit_count_for_equivalent(15, base)
        presets.append(Preset(
            name=f"bases-{base}",
            description=f"Base-{base} addition with {digits} digits (equivalent to 15 decimal digits)",
            orthography=OrthographySpec(scheme=Scheme.TEN_E_BASED, order=Order.INVERSE, base=base),
            splits=_standard_splits(SamplingMethod.BALANCED, SamplingMethod.RANDOM, digits, 1_000, 1_000),
            epochs=100,
        ))
    methods = {"bal": SamplingMethod.BALANCED, "rand": SamplingMethod.RANDOM}
    for train_key, train_method in methods.items():
        for test_key, test_method in methods.items():
            presets.append(Preset(
                name=f"mismatch-{train_key}x{test_key}",
                description=f"Train {train_method.value}, test {test_method.value}, up to 60 digits",
                orthography=ten_e,
                splits=_standard_splits(train_method, test_method, 60, 100_000, 10_000),
            ))
    for digits in ORTHOGRAPHY_DIGITS:
        presets.append(Preset(
            name=f"orthography-{digits}",
            description=f"1,000 training examples of up to {digits} digits; override --scheme to compare",
            orthography=ten_e,
            splits=_standard_splits(SamplingMethod.BALANCED, SamplingMethod.RANDOM, digits, 1_000, 1_000),
            epochs=100,
        ))
    for exponent in range(3, 8):
        size = 10**exponent
        presets.append(Preset(
            name=f"datasize-1e{exponent}",
            description=f"{size:,} training examples of up to 30 digits",
            orthography=ten_e,
            splits=_standard_splits(SamplingMethod.BALANCED, SamplingMethod.RANDOM, 30, size, 10_000),
            epochs=epochs_for_dataset_size(size),
        ))
    by_name = {p.name: p for p in presets}
    for alias, target in PRESET_ALIASES.items():
        by_name[alias] = by_name[target].model_copy(update={"name": alias, "description": f"Same as {target}"})
    return by_name


PRESETS = _build_presets()


def get_preset(name: str) -> Preset:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}")
    return PRESETS[name]
