"""
Finite-difference verification of the hand-written backward pass.

Parameters are sampled per tensor so every group (embedding, attention,
feedforward, layernorm, head) is covered. A sample whose +h or -h perturbation
flips any ReLU is skipped and redrawn, since the loss is not differentiable
across the kink.
"""
import logging
import math

import numpy as np
from pydantic import BaseModel

from engines.orthography import OrthographySpec, Scheme
from library.taskgen import SamplingConfig, SamplingMethod, iter_examples
from microformer.config import ModelConfig, PositionMode, TargetPositionMode
from microformer.data import Batch, collate, encode_pair
from microformer.model import Seq2SeqTransformer
from microformer.vocab import build_vocabulary

logger = logging.getLogger(__name__)

DEFAULT_SAMPLES = 240
DEFAULT_STEP = 1e-5
THRESHOLD = 1e-4
_FLOOR = 1e-5


class GradCheckReport(BaseModel):
    max_relative_error: float
    mean_relative_error: float
    per_group: dict[str, float]
    checked: int
    skipped_kinks: int
    step: float

    @property
    def passed(self) -> bool:
        return self.max_relative_error < THRESHOLD


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), _FLOOR)


def tiny_setup(seed: int = 0, examples: int = 4) -> tuple[ModelConfig, Batch]:
    """A 1+1 layer, width-16 model and a float64 batch of 10e-based additions."""
    spec = OrthographySpec(scheme=Scheme.TEN_E_BASED)
    sampling = SamplingConfig(method=SamplingMethod.BALANCED, max_digits=3, count=examples, seed=seed)
    data = list(iter_examples(sampling, spec))
    vocab = build_vocabulary([e.question for e in data] + [e.answer for e in data])
    config = ModelConfig(
        layers_encoder=1,
        layers_decoder=1,
        model_width=16,
        heads=2,
        feedforward_width=32,
        vocabulary=vocab.tokens,
        position_mode=PositionMode.POS_MASKED,
        target_position_mode=TargetPositionMode.WITH_TGT,
        max_sequence_length=64,
    )
    pairs = [encode_pair(e.question, e.answer, spec, vocab, config, np.float64) for e in data]
    return config, collate(pairs, vocab, config.model_width, np.float64)


def gradient_check(
    config: ModelConfig | None = None,
    batch: Batch | None = None,
    samples: int = DEFAULT_SAMPLES,
    step: float = DEFAULT_STEP,
    seed: int = 0,
) -> GradCheckReport:
    if config is None or batch is None:
        config, batch = tiny_setup(seed)
    model = Seq2SeqTransformer(config, np.float64, seed)
    model.loss_and_grad(batch)
    analytic = {name: g.copy() for name, g in model.grads.items()}
    baseline = model.activation_signature()

    rng = np.random.default_rng(seed)
    names = model.store.names()
    per_tensor = math.ceil(samples / len(names))
    errors: list[float] = []
    per_group: dict[str, float] = {}
    skipped = 0
    for name in names:
        param = model.params[name]
        taken = attempts = 0
        while taken < per_tensor and attempts < per_tensor * 10:
            attempts += 1
            idx = int(rng.integers(param.size))
            original = param.flat[idx]
            param.flat[idx] = original + step
            loss_plus = model.loss(batch)
            kink = model.activation_signature() != baseline
            param.flat[idx] = original - step
            loss_minus = model.loss(batch)
            kink = kink or model.activation_signature() != baseline
            param.flat[idx] = original
            if kink:
                skipped += 1
                continue
            numeric = (loss_plus - loss_minus) / (2 * step)
            err = relative_error(float(analytic[name].flat[idx]), numeric)
            errors.append(err)
            group = model.store.group(name)
            per_group[group] = max(per_group.get(group, 0.0), err)
            taken += 1

    report = GradCheckReport(
        max_relative_error=max(errors) if errors else 0.0,
        mean_relative_error=float(np.mean(errors)) if errors else 0.0,
        per_group=per_group,
        checked=len(errors),
        skipped_kinks=skipped,
        step=step,
    )
    logger.info(
        f"gradient check: {report.checked} samples, max relative error {report.max_relative_error:.2e}, "
        f"{report.skipped_kinks} kink samples skipped"
    )
    return report
