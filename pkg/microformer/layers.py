"""
Building blocks of the encoder-decoder, each with a hand-written backward pass.

Parameters live in one ParameterStore under dotted names such as
"encoder.0.attn.q.W"; every layer reads its tensors from the store and
accumulates gradients into store.grads, so the optimizer, the checkpoint and
the gradient check all see the same flat mapping.
Shapes: (B, T, D) activations, (B, h, T, d) per-head tensors.
"""
import numpy as np

MASK_FILL = -1e9
LN_EPS = 1e-5


class ParameterStore:
    def __init__(self, dtype=np.float32):
        self.dtype = dtype
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}

    def add(self, name: str, value: np.ndarray) -> str:
        if name in self.params:
            raise KeyError(f"parameter {name} registered twice")
        self.params[name] = np.asarray(value, dtype=self.dtype)
        self.grads[name] = np.zeros_like(self.params[name])
        return name

    def __getitem__(self, name: str) -> np.ndarray:
        return self.params[name]

    def accumulate(self, name: str, grad: np.ndarray) -> None:
        self.grads[name] += grad

    def zero_grad(self) -> None:
        for grad in self.grads.values():
            grad.fill(0)

    def names(self) -> list[str]:
        return list(self.params)

    def size(self) -> int:
        return sum(p.size for p in self.params.values())

    def group(self, name: str) -> str:
        """Coarse family of a parameter: embedding, attention, feedforward, layernorm or head."""
        if name.startswith("embed"):
            return "embedding"
        if name.startswith("head"):
            return "head"
        parts = name.split(".")
        if any(p.startswith("ln") for p in parts):
            return "layernorm"
        if "ffn" in parts:
            return "feedforward"
        return "attention"


def init_weight(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    return rng.normal(0.0, np.sqrt(1.0 / fan_in), size=(fan_in, fan_out))


def softmax(x: np.ndarray) -> np.ndarray:
    z = x - x.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def causal_mask(t: int, dtype=np.float32) -> np.ndarray:
    """Additive (1, 1, t, t) mask hiding future positions."""
    i = np.arange(t)
    return ((i[:, None] < i[None, :]) * MASK_FILL).astype(dtype)[None, None]


def padding_mask(ids: np.ndarray, pad_id: int, dtype=np.float32) -> np.ndarray:
    """Additive (B, 1, 1, T) mask hiding PAD keys."""
    return ((ids == pad_id) * MASK_FILL).astype(dtype)[:, None, None, :]


class Linear:
    def __init__(self, store: ParameterStore, name: str, fan_in: int, fan_out: int, rng: np.random.Generator):
        self.store = store
        self.w = store.add(f"{name}.W", init_weight(rng, fan_in, fan_out))
        self.b = store.add(f"{name}.b", np.zeros(fan_out))

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x = x
        return x @ self.store[self.w] + self.store[self.b]

    def backward(self, dy: np.ndarray) -> np.ndarray:
        x = self._x
        x2 = x.reshape(-1, x.shape[-1])
        dy2 = dy.reshape(-1, dy.shape[-1])
        self.store.accumulate(self.w, x2.T @ dy2)
        self.store.accumulate(self.b, dy2.sum(axis=0))
        return dy @ self.store[self.w].T


class LayerNorm:
    def __init__(self, store: ParameterStore, name: str, d: int):
        self.store = store
        self.gamma = store.add(f"{name}.gamma", np.ones(d))
        self.beta = store.add(f"{name}.beta", np.zeros(d))

    def forward(self, x: np.ndarray) -> np.ndarray:
        mu = x.mean(axis=-1, keepdims=True)
        var = ((x - mu) ** 2).mean(axis=-1, keepdims=True)
        sigma = np.sqrt(var + LN_EPS)
        xhat = (x - mu) / sigma
        self._cache = (xhat, sigma)
        return xhat * self.store[self.gamma] + self.store[self.beta]

    def backward(self, dy: np.ndarray) -> np.ndarray:
        xhat, sigma = self._cache
        axes = tuple(range(dy.ndim - 1))
        self.store.accumulate(self.gamma, (dy * xhat).sum(axis=axes))
        self.store.accumulate(self.beta, dy.sum(axis=axes))
        g = dy * self.store[self.gamma]
        m1 = g.mean(axis=-1, keepdims=True)
        m2 = (g * xhat).mean(axis=-1, keepdims=True)
        return (g - m1 - xhat * m2) / sigma


class MultiHeadAttention:
    """Self-attention when kv is None, cross-attention otherwise."""

    def __init__(self, store: ParameterStore, name: str, d: int, heads: int, rng: np.random.Generator):
        self.h = heads
        self.dk = d // heads
        self.q = Linear(store, f"{name}.q", d, d, rng)
        self.k = Linear(store, f"{name}.k", d, d, rng)
        self.v = Linear(store, f"{name}.v", d, d, rng)
        self.o = Linear(store, f"{name}.o", d, d, rng)

    def _split(self, x: np.ndarray) -> np.ndarray:
        b, t, _ = x.shape
        return x.reshape(b, t, self.h, self.dk).transpose(0, 2, 1, 3)

    @staticmethod
    def _merge(x: np.ndarray) -> np.ndarray:
        b, h, t, dk = x.shape
        return x.transpose(0, 2, 1, 3).reshape(b, t, h * dk)

    def forward(self, x: np.ndarray, mask: np.ndarray | None = None, kv: np.ndarray | None = None) -> np.ndarray:
        self._self = kv is None
        source = x if kv is None else kv
        q = self._split(self.q.forward(x))
        k = self._split(self.k.forward(source))
        v = self._split(self.v.forward(source))
        scale = 1.0 / np.sqrt(self.dk)
        scores = (q @ k.transpose(0, 1, 3, 2)) * scale
        if mask is not None:
            scores = scores + mask
        p = softmax(scores)
        self._cache = (q, k, v, p, scale)
        return self.o.forward(self._merge(p @ v))

    def backward(self, dy: np.ndarray) -> tuple[np.ndarray, np.ndarray | None]:
        """Returns (dx, dkv); dkv is None for self-attention, where it is folded into dx."""
        q, k, v, p, scale = self._cache
        do = self._split(self.o.backward(dy))
        dv = p.transpose(0, 1, 3, 2) @ do
        dp = do @ v.transpose(0, 1, 3, 2)
        ds = (dp - (dp * p).sum(axis=-1, keepdims=True)) * p
        dq = (ds @ k) * scale
        dk = (ds.transpose(0, 1, 3, 2) @ q) * scale
        dx = self.q.backward(self._merge(dq))
        dsource = self.k.backward(self._merge(dk)) + self.v.backward(self._merge(dv))
        if self._self:
            return dx + dsource, None
        return dx, dsource


class FeedForward:
    def __init__(self, store: ParameterStore, name: str, d: int, hidden: int, rng: np.random.Generator):
        self.up = Linear(store, f"{name}.up", d, hidden, rng)
        self.down = Linear(store, f"{name}.down", hidden, d, rng)
        self.active: np.ndarray | None = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        u = self.up.forward(x)
        self.active = u > 0
        return self.down.forward(u * self.active)

    def backward(self, dy: np.ndarray) -> np.ndarray:
        return self.up.backward(self.down.backward(dy) * self.active)


class EncoderLayer:
    """Post-LN block: LN(x + Attn(x)), then LN(h + FFN(h))."""

    def __init__(self, store: ParameterStore, name: str, d: int, heads: int, hidden: int, rng: np.random.Generator):
        self.attn = MultiHeadAttention(store, f"{name}.attn", d, heads, rng)
        self.ln1 = LayerNorm(store, f"{name}.ln1", d)
        self.ffn = FeedForward(store, f"{name}.ffn", d, hidden, rng)
        self.ln2 = LayerNorm(store, f"{name}.ln2", d)

    def forward(self, x: np.ndarray, mask: np.ndarray | None) -> np.ndarray:
        h = self.ln1.forward(x + self.attn.forward(x, mask))
        return self.ln2.forward(h + self.ffn.forward(h))

    def backward(self, dy: np.ndarray) -> np.ndarray:
        dz = self.ln2.backward(dy)
        dh = dz + self.ffn.backward(dz)
        dz = self.ln1.backward(dh)
        dx, _ = self.attn.backward(dz)
        return dz + dx


class DecoderLayer:
    """Post-LN block: masked self-attention, cross-attention over memory, FFN."""

    def __init__(self, store: ParameterStore, name: str, d: int, heads: int, hidden: int, rng: np.random.Generator):
        self.self_attn = MultiHeadAttention(store, f"{name}.self_attn", d, heads, rng)
        self.ln1 = LayerNorm(store, f"{name}.ln1", d)
        self.cross_attn = MultiHeadAttention(store, f"{name}.cross_attn", d, heads, rng)
        self.ln2 = LayerNorm(store, f"{name}.ln2", d)
        self.ffn = FeedForward(store, f"{name}.ffn", d, hidden, rng)
        self.ln3 = LayerNorm(store, f"{name}.ln3", d)

    def forward(self, x: np.ndarray, memory: np.ndarray, self_mask: np.ndarray, memory_mask: np.ndarray | None) -> np.ndarray:
        h1 = self.ln1.forward(x + self.self_attn.forward(x, self_mask))
        h2 = self.ln2.forward(h1 + self.cross_attn.forward(h1, memory_mask, kv=memory))
        return self.ln3.forward(h2 + self.ffn.forward(h2))

    def backward(self, dy: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        dz = self.ln3.backward(dy)
        dh2 = dz + self.ffn.backward(dz)
        dz = self.ln2.backward(dh2)
        dh1, dmemory = self.cross_attn.backward(dz)
        dz2 = self.ln1.backward(dz + dh1)
        dx, _ = self.self_attn.backward(dz2)
        return dz2 + dx, dmemory
