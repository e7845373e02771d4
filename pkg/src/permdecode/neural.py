"""Multi-head MLP decoder written directly in numpy.

Architecture: optional symbol embedding, flatten, three equal-width dense
ReLU layers, dropout, then ``n`` softmax heads of width ``n``. Head ``k``
classifies the symbol at coordinate ``k``; prediction is a per-head argmax
in a single forward pass. Everything runs in float64.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

BINARY_MATRIX = "binary_matrix"
SYMBOL_SEQUENCE = "symbol_sequence"
_KIND_TAGS = {BINARY_MATRIX: 0, SYMBOL_SEQUENCE: 1}

LOG_FLOOR = 1e-12
MAGIC = b"PMND"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class MlpSpec:
    """Decoder shape.

    ``width`` is ``c_max`` (columns of the channel matrix) for
    ``binary_matrix`` inputs and the embedding size for ``symbol_sequence``.
    """

    input_kind: str
    n: int
    width: int
    hidden: int
    dropout_rate: float = 0.1

    def __post_init__(self):
        if self.input_kind not in _KIND_TAGS:
            raise ValueError(f"unknown input kind {self.input_kind!r}")
        if min(self.n, self.width, self.hidden) < 1:
            raise ValueError("n, width and hidden must be positive")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must lie in [0, 1)")

    @classmethod
    def plc(cls, n: int, c_max: int, hidden: int, dropout_rate: float = 0.1) -> MlpSpec:
        return cls(BINARY_MATRIX, n, c_max, hidden, dropout_rate)

    @classmethod
    def rm(cls, n: int, hidden: int, embed_dim: int | None = None, dropout_rate: float = 0.1) -> MlpSpec:
        return cls(SYMBOL_SEQUENCE, n, embed_dim or n, hidden, dropout_rate)

    @property
    def embedded(self) -> bool:
        return self.input_kind == SYMBOL_SEQUENCE

    @property
    def flat_dim(self) -> int:
        return self.n * self.width

    def shapes(self) -> dict[str, tuple[int, ...]]:
        """Parameter shapes in storage order."""
        n, h = self.n, self.hidden
        out: dict[str, tuple[int, ...]] = {}
        if self.embedded:
            out["embedding"] = (n, self.width)
        fan_in = self.flat_dim
        for k in (1, 2, 3):
            out[f"dense{k}.W"] = (h, fan_in)
            out[f"dense{k}.b"] = (h,)
            fan_in = h
        out["heads.W"] = (n, n, h)
        out["heads.b"] = (n, n)
        return out


def param_count(spec: MlpSpec) -> int:
    n, h = spec.n, spec.hidden
    embedding = n * spec.width if spec.embedded else 0
    dense = (spec.flat_dim * h + h) + 2 * (h * h + h)
    heads = h * n * n + n * n
    return embedding + dense + heads


@dataclass
class ModelWeights:
    spec: MlpSpec
    params: dict[str, np.ndarray]

    def __post_init__(self):
        expected = self.spec.shapes()
        if list(self.params) != list(expected):
            raise ValueError(f"parameter names {list(self.params)} do not match {list(expected)}")
        for name, shape in expected.items():
            if self.params[name].shape != shape:
                raise ValueError(f"{name} has shape {self.params[name].shape}, expected {shape}")

    def __getitem__(self, name: str) -> np.ndarray:
        return self.params[name]

    def copy(self) -> ModelWeights:
        return ModelWeights(self.spec, {k: v.copy() for k, v in self.params.items()})

    def zeros_like(self) -> dict[str, np.ndarray]:
        return {k: np.zeros_like(v) for k, v in self.params.items()}

    def tally(self) -> int:
        return sum(v.size for v in self.params.values())


def init_weights(spec: MlpSpec, seed: int) -> ModelWeights:
    """Glorot-uniform dense and head weights, embedding in U(-0.05, 0.05), zero biases."""
    rng = np.random.default_rng(seed)
    params = {}
    for name, shape in spec.shapes().items():
        if name == "embedding":
            params[name] = rng.uniform(-0.05, 0.05, size=shape)
        elif name.endswith(".b"):
            params[name] = np.zeros(shape)
        else:
            fan_out, fan_in = shape[-2], shape[-1]
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            params[name] = rng.uniform(-limit, limit, size=shape)
    return ModelWeights(spec, params)


def zero_weights(spec: MlpSpec) -> ModelWeights:
    return ModelWeights(spec, {k: np.zeros(s) for k, s in spec.shapes().items()})


@dataclass
class _Cache:
    symbols: np.ndarray | None
    a0: np.ndarray
    pre: list[np.ndarray]
    acts: list[np.ndarray]
    mask: np.ndarray | None
    top: np.ndarray
    probs: np.ndarray


def _flatten_input(w: ModelWeights, x) -> tuple[np.ndarray, np.ndarray | None]:
    spec = w.spec
    x = np.asarray(x)
    if spec.embedded:
        if x.ndim == 1:
            x = x[None]
        if x.shape[1:] != (spec.n,):
            raise ValueError(f"expected symbol sequences of length {spec.n}, got shape {x.shape}")
        sym = x.astype(np.int64) - 1
        if sym.min() < 0 or sym.max() >= spec.n:
            raise ValueError("symbol out of range")
        return w["embedding"][sym].reshape(len(sym), -1), sym
    if x.ndim == 2:
        x = x[None]
    if x.shape[1:] != (spec.n, spec.width):
        raise ValueError(f"expected {spec.n}x{spec.width} matrices, got shape {x.shape}")
    return x.reshape(len(x), -1).astype(np.float64), None


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _forward(w: ModelWeights, x, train: bool, rng: np.random.Generator | None) -> _Cache:
    spec = w.spec
    a0, sym = _flatten_input(w, x)
    pre, acts = [], []
    a = a0
    for k in (1, 2, 3):
        z = a @ w[f"dense{k}.W"].T + w[f"dense{k}.b"]
        a = np.maximum(z, 0.0)
        pre.append(z)
        acts.append(a)
    mask = None
    if train and spec.dropout_rate > 0:
        if rng is None:
            raise ValueError("train mode needs a random generator for dropout")
        keep = 1.0 - spec.dropout_rate
        mask = (rng.random(a.shape) < keep) / keep
        a = a * mask
    n, h = spec.n, spec.hidden
    logits = a @ w["heads.W"].reshape(n * n, h).T + w["heads.b"].reshape(-1)
    probs = _softmax(logits.reshape(-1, n, n))
    return _Cache(sym, a0, pre, acts, mask, a, probs)


def forward(w: ModelWeights, x, *, train: bool = False, rng: np.random.Generator | None = None) -> np.ndarray:
    """Head probabilities, shape ``(B, n, n)``; ``[b, k]`` is head ``k``'s distribution.

    A single unbatched input gives ``B = 1``. In train mode inverted dropout
    is applied after the last hidden layer.
    """
    return _forward(w, x, train, rng).probs


def predict(w: ModelWeights, x) -> np.ndarray:
    """Per-head argmax as 1-indexed symbols, shape ``(B, n)``. Ties pick the lowest symbol."""
    return forward(w, x).argmax(axis=2) + 1


def _onehot_targets(targets, n: int) -> np.ndarray:
    t = np.asarray(targets, dtype=np.int64)
    if t.ndim == 1:
        t = t[None]
    if t.shape[1] != n or t.min() < 1 or t.max() > n:
        raise ValueError("targets must be length-n sequences over 1..n")
    return t - 1


def loss(heads: np.ndarray, target) -> float:
    """Summed cross-entropy over the ``n`` heads, averaged over the batch."""
    heads = np.asarray(heads)
    if heads.ndim == 2:
        heads = heads[None]
    b, n, _ = heads.shape
    t = _onehot_targets(target, n)
    picked = np.take_along_axis(heads, t[:, :, None], axis=2)[:, :, 0]
    return float(-np.log(np.maximum(picked, LOG_FLOOR)).sum() / b)


def loss_and_grad(
    w: ModelWeights, x, target, *, train: bool = False, rng: np.random.Generator | None = None
) -> tuple[float, dict[str, np.ndarray]]:
    """Loss and its exact gradient with respect to every parameter.

    Softmax and cross-entropy are differentiated together, so the logit
    gradient is ``probs - onehot``.
    """
    spec = w.spec
    n, h = spec.n, spec.hidden
    c = _forward(w, x, train, rng)
    b = c.probs.shape[0]
    t = _onehot_targets(target, n)
    if len(t) != b:
        raise ValueError("inputs and targets differ in batch size")
    value = loss(c.probs, t + 1)

    dz = c.probs.copy()
    dz[np.arange(b)[:, None], np.arange(n)[None, :], t] -= 1.0
    dz = dz.reshape(b, n * n) / b
    g: dict[str, np.ndarray] = {}
    head_w = w["heads.W"].reshape(n * n, h)
    g["heads.W"] = (dz.T @ c.top).reshape(n, n, h)
    g["heads.b"] = dz.sum(axis=0).reshape(n, n)
    da = dz @ head_w
    if c.mask is not None:
        da = da * c.mask
    for k in (3, 2, 1):
        dpre = da * (c.pre[k - 1] > 0)
        below = c.acts[k - 2] if k > 1 else c.a0
        g[f"dense{k}.W"] = dpre.T @ below
        g[f"dense{k}.b"] = dpre.sum(axis=0)
        da = dpre @ w[f"dense{k}.W"]
    if spec.embedded:
        emb = np.zeros_like(w["embedding"])
        np.add.at(emb, c.symbols, da.reshape(b, n, spec.width))
        g["embedding"] = emb
    return value, {name: g[name] for name in w.params}


def backward(w: ModelWeights, x, target, **kwargs) -> dict[str, np.ndarray]:
    return loss_and_grad(w, x, target, **kwargs)[1]


@dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    step: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def for_weights(cls, w: ModelWeights, lr: float = 1e-3, **kwargs) -> AdamState:
        return cls(w.zeros_like(), w.zeros_like(), lr=lr, **kwargs)


def adam_step(w: ModelWeights, grads: dict[str, np.ndarray], state: AdamState) -> tuple[ModelWeights, AdamState]:
    """One bias-corrected Adam update, applied in place."""
    if grads.keys() != w.params.keys():
        raise ValueError("gradient names do not match the weights")
    state.step += 1
    t = state.step
    c1 = 1.0 - state.beta1**t
    c2 = 1.0 - state.beta2**t
    for name, p in w.params.items():
        gr = grads[name]
        if gr.shape != p.shape:
            raise ValueError(f"gradient {name} has shape {gr.shape}, expected {p.shape}")
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * gr
        v *= state.beta2
        v += (1.0 - state.beta2) * gr * gr
        p -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.epsilon)
    return w, state


class ModelFormatError(ValueError):
    pass


class ModelVersionError(ModelFormatError):
    pass


class ModelChecksumError(ModelFormatError):
    pass


_HEADER = struct.Struct("<4sHBIIId")


def _ordered_arrays(w: ModelWeights):
    n = w.spec.n
    for name, arr in w.params.items():
        if name == "heads.W":
            for k in range(n):
                yield w["heads.W"][k]
                yield w["heads.b"][k]
        elif name != "heads.b":
            yield arr


def model_bytes(w: ModelWeights) -> bytes:
    s = w.spec
    head = _HEADER.pack(MAGIC, FORMAT_VERSION, _KIND_TAGS[s.input_kind], s.n, s.width, s.hidden, s.dropout_rate)
    body = b"".join(np.ascontiguousarray(a, dtype="<f8").tobytes() for a in _ordered_arrays(w))
    data = head + body
    return data + struct.pack("<I", zlib.crc32(data))


def model_from_bytes(data: bytes) -> ModelWeights:
    if len(data) < 6 or data[:4] != MAGIC:
        raise ModelVersionError("not a model file (bad magic)")
    version = struct.unpack_from("<H", data, 4)[0]
    if version != FORMAT_VERSION:
        raise ModelVersionError(f"unsupported model format version {version}")
    if len(data) < _HEADER.size + 4 or zlib.crc32(data[:-4]) != struct.unpack("<I", data[-4:])[0]:
        raise ModelChecksumError("model file is corrupt or truncated")
    _, _, tag, n, width, hidden, rate = _HEADER.unpack_from(data)
    kind = {v: k for k, v in _KIND_TAGS.items()}.get(tag)
    if kind is None:
        raise ModelFormatError(f"unknown input kind tag {tag}")
    spec = MlpSpec(kind, n, width, hidden, rate)
    values = np.frombuffer(data[_HEADER.size : -4], dtype="<f8")
    if values.size != param_count(spec):
        raise ModelFormatError("weight block size does not match the header")
    w = zero_weights(spec)
    pos = 0
    for arr in _ordered_arrays(w):
        arr[...] = values[pos : pos + arr.size].reshape(arr.shape)
        pos += arr.size
    return w


def save_model(w: ModelWeights, path: str | Path) -> None:
    """Write ``w`` atomically: a temporary sibling is renamed over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(model_bytes(w))
    tmp.replace(path)


def load_model(path: str | Path) -> tuple[MlpSpec, ModelWeights]:
    w = model_from_bytes(Path(path).read_bytes())
    return w.spec, w
