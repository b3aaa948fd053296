from enum import Enum

import numpy as np
from pydantic import BaseModel, Field, model_validator

from microformer.errors import ModelConfigError


class PositionMode(str, Enum):
    SINUSOIDAL = "sinusoidal"
    POS_MASKED = "pos_masked"


class TargetPositionMode(str, Enum):
    WITH_TGT = "with_tgt"
    NO_TGT = "no_tgt"


class Precision(str, Enum):
    F32 = "f32"
    F64 = "f64"

    @property
    def dtype(self) -> type:
        return np.float32 if self == Precision.F32 else np.float64


class ModelConfig(BaseModel):
    layers_encoder: int = Field(4, ge=1)
    layers_decoder: int = Field(4, ge=1)
    model_width: int = Field(128, ge=2)
    heads: int = Field(8, ge=1)
    feedforward_width: int = Field(512, ge=1)
    # Tokens in id order, reserved symbols first; filled in from the training split
    vocabulary: list[str] = []
    position_mode: PositionMode = PositionMode.POS_MASKED
    target_position_mode: TargetPositionMode = TargetPositionMode.NO_TGT
    max_sequence_length: int = Field(256, ge=2)

    @model_validator(mode="after")
    def _check_heads(self):
        if self.model_width % self.heads:
            raise ModelConfigError(f"model_width {self.model_width} is not divisible by heads {self.heads}")
        return self


class TrainConfig(BaseModel):
    epochs: int = Field(55, ge=1)
    learning_rate: float = Field(1e-5, ge=0)
    batch_size: int = Field(8, ge=1)
    split_ratio: tuple[int, int] = (9, 1)
    seed: int = Field(0, ge=0)
    precision: Precision = Precision.F32
    # Global gradient-norm clip; None disables clipping
    clip_norm: float | None = Field(1.0, gt=0)
    # Score at most this many dev examples per epoch
    dev_limit: int | None = Field(None, ge=1)
