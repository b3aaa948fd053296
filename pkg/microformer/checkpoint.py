"""
Checkpoint files.

A checkpoint is one uncompressed numpy .npz archive:
  __meta__        0-d unicode array holding a JSON object with format_version,
                  model_config, train_config, orthography, epoch, dev_accuracy,
                  train_loss, dataset_digest and adam_step
  param/<name>    one array per model parameter, in the model's precision
  adam_m/<name>   Adam first moments (absent when no optimizer state is saved)
  adam_v/<name>   Adam second moments
Archives are read with allow_pickle=False.
"""
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from engines.orthography import OrthographySpec
from microformer.config import ModelConfig, TrainConfig
from microformer.errors import ModelError
from microformer.model import Seq2SeqTransformer

CHECKPOINT_VERSION = 1
META_KEY = "__meta__"


@dataclass
class Checkpoint:
    model_config: ModelConfig
    train_config: TrainConfig
    params: dict[str, np.ndarray]
    orthography: OrthographySpec | None = None
    epoch: int = 0
    dev_accuracy: float | None = None
    train_loss: float | None = None
    dataset_digest: str | None = None
    adam_step: int = 0
    adam_m: dict[str, np.ndarray] = field(default_factory=dict)
    adam_v: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def capture(cls, model: Seq2SeqTransformer, train_config: TrainConfig, optimizer=None, **info) -> "Checkpoint":
        """Snapshot (copy) of the model's parameters and, if given, the optimizer moments."""
        state = optimizer.state_dict() if optimizer is not None else {"t": 0, "m": {}, "v": {}}
        return cls(
            model_config=model.config,
            train_config=train_config,
            params={k: v.copy() for k, v in model.params.items()},
            adam_step=state["t"],
            adam_m={k: v.copy() for k, v in state["m"].items()},
            adam_v={k: v.copy() for k, v in state["v"].items()},
            **info,
        )

    def build_model(self) -> Seq2SeqTransformer:
        model = Seq2SeqTransformer(self.model_config, self.train_config.precision.dtype, self.train_config.seed)
        missing = set(model.params) ^ set(self.params)
        if missing:
            raise ModelError(f"checkpoint parameters do not match the model config: {sorted(missing)[:5]}")
        for name, value in self.params.items():
            model.params[name][...] = value
        return model


def save_checkpoint(checkpoint: Checkpoint, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = {
        "format_version": CHECKPOINT_VERSION,
        "model_config": checkpoint.model_config.model_dump(mode="json"),
        "train_config": checkpoint.train_config.model_dump(mode="json"),
        "orthography": checkpoint.orthography.model_dump(mode="json") if checkpoint.orthography else None,
        "epoch": checkpoint.epoch,
        "dev_accuracy": checkpoint.dev_accuracy,
        "train_loss": checkpoint.train_loss,
        "dataset_digest": checkpoint.dataset_digest,
        "adam_step": checkpoint.adam_step,
    }
    arrays = {META_KEY: np.array(json.dumps(meta, sort_keys=True))}
    arrays.update({f"param/{k}": v for k, v in checkpoint.params.items()})
    arrays.update({f"adam_m/{k}": v for k, v in checkpoint.adam_m.items()})
    arrays.update({f"adam_v/{k}": v for k, v in checkpoint.adam_v.items()})
    # Writing through a handle keeps numpy from appending ".npz" to the name
    with open(path, "wb") as f:
        np.savez(f, **arrays)
    return path


def _section(archive, prefix: str) -> dict[str, np.ndarray]:
    return {key[len(prefix):]: archive[key] for key in archive.files if key.startswith(prefix)}


def load_checkpoint(path: Path) -> Checkpoint:
    path = Path(path)
    with np.load(path, allow_pickle=False) as archive:
        if META_KEY not in archive.files:
            raise ModelError(f"{path} is not a checkpoint (no metadata entry)")
        meta = json.loads(str(archive[META_KEY]))
        if meta.get("format_version") != CHECKPOINT_VERSION:
            raise ModelError(f"{path}: unsupported checkpoint format {meta.get('format_version')}")
        params = _section(archive, "param/")
        adam_m = _section(archive, "adam_m/")
        adam_v = _section(archive, "adam_v/")
    return Checkpoint(
        model_config=ModelConfig.model_validate(meta["model_config"]),
        train_config=TrainConfig.model_validate(meta["train_config"]),
        params=params,
        orthography=OrthographySpec.model_validate(meta["orthography"]) if meta["orthography"] else None,
        epoch=meta["epoch"],
        dev_accuracy=meta["dev_accuracy"],
        train_loss=meta["train_loss"],
        dataset_digest=meta["dataset_digest"],
        adam_step=meta["adam_step"],
        adam_m=adam_m,
        adam_v=adam_v,
    )
