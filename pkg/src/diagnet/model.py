"""Feedforward classifier with hand-written backpropagation.

Hidden layers use ReLU and (in training) inverted dropout. The embedding
``h(x)`` is the last hidden layer's output, i.e. the input of the final
linear map that feeds the softmax. By default that last layer is linear so
embeddings can point in opposite directions; ``embedding_activation="relu"``
makes it a ReLU layer like the others.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

PARAMS_MAGIC = b"DGNP"
PARAMS_VERSION = 1


@dataclass(frozen=True)
class MlpSpec:
    input_dim: int
    hidden_dims: tuple = (64, 32)
    class_count: int = 2
    dropout_rate: float = 0.5
    weight_decay: float = 1e-4
    embedding_activation: str = "linear"

    def __post_init__(self):
        object.__setattr__(self, "hidden_dims", tuple(int(h) for h in self.hidden_dims))
        if self.input_dim < 1 or self.class_count < 2 or not self.hidden_dims:
            raise ValueError("need input_dim >= 1, class_count >= 2 and at least one hidden layer")
        if min(self.hidden_dims) < 1:
            raise ValueError("zero-width layer")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must lie in [0, 1)")
        if self.embedding_activation not in ("relu", "linear"):
            raise ValueError(f"unknown embedding activation {self.embedding_activation!r}")

    @property
    def embedding_dim(self) -> int:
        return self.hidden_dims[-1]

    @property
    def layer_dims(self) -> list[tuple[int, int]]:
        dims = [self.input_dim, *self.hidden_dims, self.class_count]
        return list(zip(dims[:-1], dims[1:]))


@dataclass
class Params:
    weights: list
    biases: list
    embedding_activation: str = "linear"

    def arrays(self) -> list[np.ndarray]:
        """Flat view order used everywhere: W0, b0, W1, b1, ..."""
        out = []
        for W, b in zip(self.weights, self.biases):
            out += [W, b]
        return out

    def copy(self) -> "Params":
        return Params([W.copy() for W in self.weights], [b.copy() for b in self.biases],
                      self.embedding_activation)

    def zeros_like(self) -> "Params":
        return Params([np.zeros_like(W) for W in self.weights], [np.zeros_like(b) for b in self.biases],
                      self.embedding_activation)

    def add_(self, other: "Params", scale: float = 1.0) -> "Params":
        for a, b in zip(self.arrays(), other.arrays()):
            a += scale * b
        return self

    def squared_norm(self) -> float:
        return float(sum(np.sum(a * a) for a in self.arrays()))

    def equals(self, other: "Params") -> bool:
        return all(a.shape == b.shape and a.tobytes() == b.tobytes()
                   for a, b in zip(self.arrays(), other.arrays()))


@dataclass
class ForwardTrace:
    inputs: np.ndarray
    pre: list
    post: list
    masks: list
    logits: np.ndarray
    probabilities: np.ndarray
    mode: str = "eval"

    @property
    def embedding(self) -> np.ndarray:
        return self.post[-1]


def init(spec: MlpSpec, seed: int = 0) -> Params:
    """Glorot-uniform weights, zero biases."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in spec.layer_dims:
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return Params(weights, biases, spec.embedding_activation)


def _relu_at(params: Params, layer: int) -> bool:
    return layer < len(params.weights) - 2 or params.embedding_activation == "relu"


def dropout_masks(spec: MlpSpec, n: int, rng) -> list[np.ndarray]:
    """Inverted-dropout masks (0 or ``1/(1-rate)``) for ``n`` rows of every hidden layer."""
    keep = 1.0 - spec.dropout_rate
    return [(rng.random((n, h)) < keep) / keep for h in spec.hidden_dims]


def softmax(logits) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def forward(params: Params, X, mode: str = "eval", seed: int | None = None, masks=None,
            spec: MlpSpec | None = None) -> ForwardTrace:
    """Run a batch of rows through the network.

    In ``train`` mode dropout is applied after every hidden layer, using
    ``masks`` if given or masks drawn from ``seed``. ``eval`` mode is
    deterministic and applies no scaling.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != params.weights[0].shape[0]:
        raise ValueError(f"input has {X.shape[1]} features, model expects {params.weights[0].shape[0]}")
    if not np.isfinite(X).all():
        raise ValueError("non-finite input")
    if mode not in ("train", "eval"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "train" and masks is None:
        if spec is None:
            raise ValueError("train mode needs either masks or the MlpSpec for dropout")
        masks = dropout_masks(spec, len(X), np.random.default_rng(seed))
    pre, post = [], []
    a = X
    hidden = len(params.weights) - 1
    for layer in range(hidden):
        z = a @ params.weights[layer] + params.biases[layer]
        a = np.maximum(z, 0.0) if _relu_at(params, layer) else z
        if mode == "train":
            a = a * masks[layer]
        pre.append(z)
        post.append(a)
    logits = a @ params.weights[-1] + params.biases[-1]
    return ForwardTrace(X, pre, post, list(masks) if mode == "train" else [],
                        logits, softmax(logits), mode)


def backward(params: Params, trace: ForwardTrace, grad_embedding=None, grad_logits=None,
             grad_probabilities=None, weight_decay: float = 0.0) -> Params:
    """Reverse-mode gradient of a loss given its upstream gradients.

    Upstream gradients are per row of ``trace``: w.r.t. the embedding, the
    logits, and/or the class probabilities (pushed through the softmax
    Jacobian). Contributions of all rows are summed, then
    ``2 * weight_decay * theta`` is added.
    """
    n = len(trace.inputs)
    C = params.weights[-1].shape[1]
    dz = np.zeros((n, C))
    if grad_logits is not None:
        dz = dz + grad_logits
    if grad_probabilities is not None:
        p = trace.probabilities
        g = np.asarray(grad_probabilities, dtype=np.float64)
        dz = dz + p * (g - (g * p).sum(axis=1, keepdims=True))
    grads = params.zeros_like()
    hidden = len(params.weights) - 1
    a_prev = trace.post[-1]
    grads.weights[-1] = a_prev.T @ dz
    grads.biases[-1] = dz.sum(axis=0)
    da = dz @ params.weights[-1].T
    if grad_embedding is not None:
        da = da + grad_embedding
    for layer in range(hidden - 1, -1, -1):
        if trace.mode == "train":
            da = da * trace.masks[layer]
        dz_l = da * (trace.pre[layer] > 0.0) if _relu_at(params, layer) else da
        a_prev = trace.post[layer - 1] if layer > 0 else trace.inputs
        grads.weights[layer] = a_prev.T @ dz_l
        grads.biases[layer] = dz_l.sum(axis=0)
        if layer > 0:
            da = dz_l @ params.weights[layer].T
    if weight_decay:
        grads.add_(params, 2.0 * weight_decay)
    return grads


def predict_proba(params: Params, X) -> np.ndarray:
    return forward(params, X, "eval").probabilities


def save_params(params: Params, path):
    """Write ``params`` in the little-endian binary format.

    Layout: ``b"DGNP"``, then uint32 version, layer count, and flags (bit 0
    set when the embedding layer uses ReLU), then uint32 (rows, cols) per
    layer, then per layer the float64 weight matrix (row-major) followed by
    its bias vector.
    """
    flags = 1 if params.embedding_activation == "relu" else 0
    with open(path, "wb") as fh:
        fh.write(PARAMS_MAGIC)
        fh.write(struct.pack("<III", PARAMS_VERSION, len(params.weights), flags))
        for W in params.weights:
            fh.write(struct.pack("<II", *W.shape))
        for W, b in zip(params.weights, params.biases):
            fh.write(np.ascontiguousarray(W, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(b, dtype="<f8").tobytes())


def load_params(path) -> Params:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != PARAMS_MAGIC:
        raise ValueError(f"{path}: not a params file")
    version, layers, flags = struct.unpack_from("<III", blob, 4)
    if version != PARAMS_VERSION:
        raise ValueError(f"{path}: unsupported params version {version}")
    shapes = [struct.unpack_from("<II", blob, 16 + 8 * k) for k in range(layers)]
    offset = 16 + 8 * layers
    weights, biases = [], []
    for rows, cols in shapes:
        W = np.frombuffer(blob, dtype="<f8", count=rows * cols, offset=offset).reshape(rows, cols)
        offset += 8 * rows * cols
        b = np.frombuffer(blob, dtype="<f8", count=cols, offset=offset)
        offset += 8 * cols
        weights.append(W.astype(np.float64))
        biases.append(b.astype(np.float64))
    if offset != len(blob):
        raise ValueError(f"{path}: trailing bytes after parameters")
    return Params(weights, biases, "relu" if flags & 1 else "linear")


def spec_from_params(params: Params, dropout_rate: float = 0.5, weight_decay: float = 1e-4) -> MlpSpec:
    return MlpSpec(params.weights[0].shape[0], tuple(W.shape[1] for W in params.weights[:-1]),
                   params.weights[-1].shape[1], dropout_rate, weight_decay, params.embedding_activation)
