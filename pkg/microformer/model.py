"""
Encoder-decoder transformer in numpy.

Token embeddings are shared by encoder and decoder, scaled by sqrt(d) and
summed with the position rows carried by the batch; the output head is a
separate linear layer. Loss is token-level cross-entropy averaged over
non-PAD targets.
"""
import numpy as np

from microformer.config import ModelConfig
from microformer.data import Batch
from microformer.errors import ModelConfigError
from microformer.layers import (
    DecoderLayer,
    EncoderLayer,
    Linear,
    ParameterStore,
    causal_mask,
    padding_mask,
)
from microformer.vocab import Vocabulary

EMBEDDING = "embed.tokens"


def cross_entropy(logits: np.ndarray, targets: np.ndarray, pad_id: int) -> tuple[float, np.ndarray]:
    """Mean negative log-likelihood over non-PAD targets, and its gradient w.r.t. logits."""
    keep = targets != pad_id
    count = max(int(keep.sum()), 1)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    log_p = shifted - log_z
    picked = np.take_along_axis(log_p, targets[..., None], axis=-1)[..., 0]
    loss = -float((picked * keep).sum()) / count
    grad = np.exp(log_p)
    np.put_along_axis(grad, targets[..., None], np.take_along_axis(grad, targets[..., None], axis=-1) - 1, axis=-1)
    grad *= keep[..., None] / count
    return loss, grad.astype(logits.dtype)


class Seq2SeqTransformer:
    def __init__(self, config: ModelConfig, dtype=np.float32, seed: int = 0):
        if not config.vocabulary:
            raise ModelConfigError("model config has an empty vocabulary")
        self.config = config
        self.dtype = dtype
        self.seed = seed
        self.vocab = Vocabulary(config.vocabulary)
        d = config.model_width
        rng = np.random.default_rng(seed)
        self.store = ParameterStore(dtype)
        self.store.add(EMBEDDING, rng.normal(0.0, d**-0.5, size=(len(self.vocab), d)))
        self.encoder = [
            EncoderLayer(self.store, f"encoder.{k}", d, config.heads, config.feedforward_width, rng)
            for k in range(config.layers_encoder)
        ]
        self.decoder = [
            DecoderLayer(self.store, f"decoder.{k}", d, config.heads, config.feedforward_width, rng)
            for k in range(config.layers_decoder)
        ]
        self.head = Linear(self.store, "head", d, len(self.vocab), rng)
        self._scale = dtype(np.sqrt(d))

    @property
    def params(self) -> dict[str, np.ndarray]:
        return self.store.params

    @property
    def grads(self) -> dict[str, np.ndarray]:
        return self.store.grads

    def _embed(self, ids: np.ndarray, pos: np.ndarray) -> np.ndarray:
        return self.store[EMBEDDING][ids] * self._scale + pos

    def _embed_backward(self, ids: np.ndarray, dx: np.ndarray) -> None:
        grad = np.zeros_like(self.store[EMBEDDING])
        np.add.at(grad, ids.reshape(-1), (dx * self._scale).reshape(-1, dx.shape[-1]))
        self.store.accumulate(EMBEDDING, grad)

    def encode(self, source_ids: np.ndarray, source_pos: np.ndarray) -> np.ndarray:
        self._source_ids = source_ids
        self._source_mask = padding_mask(source_ids, self.vocab.pad_id, self.dtype)
        x = self._embed(source_ids, source_pos)
        for layer in self.encoder:
            x = layer.forward(x, self._source_mask)
        return x

    def decode(self, decoder_ids: np.ndarray, decoder_pos: np.ndarray, memory: np.ndarray) -> np.ndarray:
        """Logits (B, T, V) for every decoder position; call after encode()."""
        self._decoder_ids = decoder_ids
        t = decoder_ids.shape[1]
        self_mask = causal_mask(t, self.dtype) + padding_mask(decoder_ids, self.vocab.pad_id, self.dtype)
        x = self._embed(decoder_ids, decoder_pos)
        for layer in self.decoder:
            x = layer.forward(x, memory, self_mask, self._source_mask)
        return self.head.forward(x)

    def forward(self, batch: Batch) -> np.ndarray:
        memory = self.encode(batch.source_ids, batch.source_pos)
        return self.decode(batch.decoder_ids, batch.decoder_pos, memory)

    def backward(self, dlogits: np.ndarray) -> None:
        dx = self.head.backward(dlogits)
        dmemory = None
        for layer in reversed(self.decoder):
            dx, dm = layer.backward(dx)
            dmemory = dm if dmemory is None else dmemory + dm
        self._embed_backward(self._decoder_ids, dx)
        dx = dmemory
        for layer in reversed(self.encoder):
            dx = layer.backward(dx)
        self._embed_backward(self._source_ids, dx)

    def loss(self, batch: Batch) -> float:
        loss, _ = cross_entropy(self.forward(batch), batch.targets, self.vocab.pad_id)
        return loss

    def loss_and_grad(self, batch: Batch) -> float:
        """Fresh gradients for one batch in self.grads; returns the loss."""
        self.store.zero_grad()
        loss, dlogits = cross_entropy(self.forward(batch), batch.targets, self.vocab.pad_id)
        self.backward(dlogits)
        return loss

    def activation_signature(self) -> bytes:
        """ReLU on/off pattern of the last forward pass."""
        masks = [layer.ffn.active for layer in (*self.encoder, *self.decoder)]
        return b"".join(np.packbits(m).tobytes() for m in masks)
