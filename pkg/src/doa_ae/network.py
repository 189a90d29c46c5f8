"""Dense feed-forward autoencoder: forward, backprop, RMSProp, serialization.

The network narrows once (the encoding layer) and then widens through four
hidden layers into an output of J equal blocks, one per spatial subregion;
each block reconstructs the covariance-feature vector of sources falling in
its subregion. Hidden layers use tanh (or relu), the output layer is linear
since feature vectors carry signed values. Everything is double precision.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

_ACTIVATION_IDS = {"tanh": 0, "relu": 1}
_MODEL_MAGIC = b"DOAAE001"


class ModelFileError(Exception):
    """Base class for model (de)serialization failures."""


class ModelFormatError(ModelFileError):
    """The file is not a model file (bad magic or malformed header)."""


class ModelVersionError(ModelFileError):
    """A model file of an unsupported format version."""


class ModelTruncatedError(ModelFileError):
    """The file ends before the declared payload does."""


class ModelChecksumError(ModelFileError):
    """The payload does not match its checksum."""


class DivergenceError(Exception):
    """Training produced a non-finite loss."""


@dataclass(frozen=True)
class NetworkSpec:
    layer_sizes: tuple
    hidden_activation: str = "tanh"
    num_decoders: int = 6

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        object.__setattr__(self, "layer_sizes", sizes)
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ValueError(f"layer sizes must be >= 2 positive integers, got {sizes}")
        if self.hidden_activation not in _ACTIVATION_IDS:
            raise ValueError(f"unknown activation {self.hidden_activation!r}")
        if self.num_decoders < 1 or sizes[-1] % self.num_decoders:
            raise ValueError(
                f"output size {sizes[-1]} must split into {self.num_decoders} equal blocks"
            )

    @property
    def input_size(self) -> int:
        return self.layer_sizes[0]

    @property
    def output_size(self) -> int:
        return self.layer_sizes[-1]

    @property
    def block_size(self) -> int:
        return self.layer_sizes[-1] // self.num_decoders

    @classmethod
    def for_array(cls, num_elements, num_decoders=6, hidden_activation="tanh"):
        """Scale the layer widths from the feature length n = M(M-1).

        The widths follow n/2, n, 3n/2, 2n, 5n/2 and an output of J*n, which
        for a 20-element array gives 380-190-380-570-760-950-2280.
        """
        n = num_elements * (num_elements - 1)
        sizes = (n, n // 2, n, n + n // 2, 2 * n, 2 * n + n // 2, num_decoders * n)
        return cls(sizes, hidden_activation, num_decoders)


@dataclass
class NetworkParams:
    """Per-layer weight matrices (out x in) and bias vectors (out)."""

    spec: NetworkSpec
    weights: list
    biases: list

    def __post_init__(self):
        sizes = self.spec.layer_sizes
        if len(self.weights) != len(sizes) - 1 or len(self.biases) != len(sizes) - 1:
            raise ValueError("need one weight matrix and bias vector per layer transition")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (sizes[i + 1], sizes[i]) or b.shape != (sizes[i + 1],):
                raise ValueError(
                    f"layer {i}: expected weights {(sizes[i + 1], sizes[i])} "
                    f"and biases {(sizes[i + 1],)}, got {w.shape} and {b.shape}"
                )


def init_network(spec: NetworkSpec, rng) -> NetworkParams:
    """Glorot-uniform weights, zero biases."""
    weights, biases = [], []
    sizes = spec.layer_sizes
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return NetworkParams(spec, weights, biases)


def _activate(z, kind):
    return np.tanh(z) if kind == "tanh" else np.maximum(z, 0.0)


def forward(params: NetworkParams, x: np.ndarray):
    """Run the network; returns (output, cache) with the cache feeding backprop.

    ``x`` is a single feature vector or a batch (rows are samples); the
    output keeps the same leading shape. The cache stores post-activation
    values layer by layer.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    a = np.atleast_2d(x)
    if a.shape[1] != params.spec.input_size:
        raise ValueError(f"expected input length {params.spec.input_size}, got {a.shape[1]}")
    kind = params.spec.hidden_activation
    last = len(params.weights) - 1
    cache = [a]
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = a @ w.T + b
        a = z if i == last else _activate(z, kind)
        cache.append(a)
    return (a[0] if single else a), cache


def loss(expected: np.ndarray, actual: np.ndarray) -> float:
    """Half squared Euclidean distance, summed over all entries."""
    expected = np.asarray(expected, dtype=float)
    actual = np.asarray(actual, dtype=float)
    if expected.shape != actual.shape:
        raise ValueError(f"shape mismatch: {expected.shape} vs {actual.shape}")
    diff = actual - expected
    return 0.5 * float(np.sum(diff * diff))


def backward(params: NetworkParams, cache, expected: np.ndarray):
    """Exact gradients of the loss for the forward call that filled ``cache``.

    For a batch, gradients are of the mean per-sample loss, so the learning
    rate is batch-size invariant. Returns (weight_grads, bias_grads).
    """
    expected = np.atleast_2d(np.asarray(expected, dtype=float))
    activations = cache
    if expected.shape != activations[-1].shape:
        raise ValueError("expected output shape does not match the cached forward pass")
    kind = params.spec.hidden_activation
    batch = expected.shape[0]
    delta = (activations[-1] - expected) / batch
    weight_grads = [None] * len(params.weights)
    bias_grads = [None] * len(params.biases)
    for i in range(len(params.weights) - 1, -1, -1):
        a_prev = activations[i]
        weight_grads[i] = delta.T @ a_prev
        bias_grads[i] = delta.sum(axis=0)
        if i > 0:
            delta = delta @ params.weights[i]
            a_here = activations[i]
            if kind == "tanh":
                delta = delta * (1.0 - a_here * a_here)
            else:
                delta = delta * (a_here > 0)
    return weight_grads, bias_grads


@dataclass
class RmspropState:
    """Running mean-square gradient accumulators plus hyperparameters."""

    learning_rate: float = 1e-3
    rho: float = 0.9
    epsilon: float = 1e-8
    acc_weights: list = field(default_factory=list)
    acc_biases: list = field(default_factory=list)

    @classmethod
    def for_params(cls, params: NetworkParams, learning_rate=1e-3, rho=0.9, epsilon=1e-8):
        return cls(
            learning_rate, rho, epsilon,
            [np.zeros_like(w) for w in params.weights],
            [np.zeros_like(b) for b in params.biases],
        )


def rmsprop_step(params: NetworkParams, grads, state: RmspropState):
    """One in-place update: acc <- rho*acc + (1-rho)*g^2, p <- p - lr*g/(sqrt(acc)+eps)."""
    weight_grads, bias_grads = grads
    lr, rho, eps = state.learning_rate, state.rho, state.epsilon
    for p, g, acc in zip(params.weights, weight_grads, state.acc_weights):
        acc *= rho
        acc += (1.0 - rho) * g * g
        p -= lr * g / (np.sqrt(acc) + eps)
    for p, g, acc in zip(params.biases, bias_grads, state.acc_biases):
        acc *= rho
        acc += (1.0 - rho) * g * g
        p -= lr * g / (np.sqrt(acc) + eps)
    return params, state


def save_model(params: NetworkParams, path):
    """Binary little-endian container; see README for the exact layout."""
    spec = params.spec
    header = bytearray()
    header += _MODEL_MAGIC
    header += struct.pack("<I", len(spec.layer_sizes))
    for s in spec.layer_sizes:
        header += struct.pack("<I", s)
    header += struct.pack("<B", _ACTIVATION_IDS[spec.hidden_activation])
    header += struct.pack("<I", spec.num_decoders)
    body = bytearray()
    for w, b in zip(params.weights, params.biases):
        body += np.ascontiguousarray(w, dtype="<f8").tobytes()
        body += np.ascontiguousarray(b, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(bytes(header))
        fh.write(bytes(body))
        fh.write(struct.pack("<I", zlib.crc32(bytes(body)) & 0xFFFFFFFF))


def _read_exact(fh, count, what):
    data = fh.read(count)
    if len(data) != count:
        raise ModelTruncatedError(f"file ends inside {what} ({len(data)}/{count} bytes)")
    return data


def load_model(path) -> NetworkParams:
    """Load a model saved by ``save_model``; raises a distinct error per defect."""
    with open(path, "rb") as fh:
        magic = _read_exact(fh, len(_MODEL_MAGIC), "magic bytes")
        if magic[:5] != _MODEL_MAGIC[:5]:
            raise ModelFormatError(f"not a model file (magic {magic!r})")
        if magic != _MODEL_MAGIC:
            raise ModelVersionError(f"unsupported model version {magic[5:]!r}")
        (layer_count,) = struct.unpack("<I", _read_exact(fh, 4, "layer count"))
        if not 2 <= layer_count <= 1024:
            raise ModelFormatError(f"implausible layer count {layer_count}")
        sizes = struct.unpack(
            f"<{layer_count}I", _read_exact(fh, 4 * layer_count, "layer sizes")
        )
        (act_id,) = struct.unpack("<B", _read_exact(fh, 1, "activation id"))
        ids_to_name = {v: k for k, v in _ACTIVATION_IDS.items()}
        if act_id not in ids_to_name:
            raise ModelFormatError(f"unknown activation id {act_id}")
        (num_decoders,) = struct.unpack("<I", _read_exact(fh, 4, "decoder count"))
        try:
            spec = NetworkSpec(sizes, ids_to_name[act_id], num_decoders)
        except ValueError as err:
            raise ModelFormatError(str(err)) from err
        weights, biases = [], []
        body_crc = 0
        for i in range(layer_count - 1):
            out_n, in_n = sizes[i + 1], sizes[i]
            wb = _read_exact(fh, 8 * out_n * in_n, f"layer {i} weights")
            bb = _read_exact(fh, 8 * out_n, f"layer {i} biases")
            body_crc = zlib.crc32(bb, zlib.crc32(wb, body_crc))
            weights.append(np.frombuffer(wb, dtype="<f8").reshape(out_n, in_n).copy())
            biases.append(np.frombuffer(bb, dtype="<f8").copy())
        (stored_crc,) = struct.unpack("<I", _read_exact(fh, 4, "checksum"))
        if stored_crc != body_crc & 0xFFFFFFFF:
            raise ModelChecksumError(
                f"payload checksum {body_crc & 0xFFFFFFFF:#010x} != stored {stored_crc:#010x}"
            )
        if fh.read(1):
            raise ModelFormatError("trailing bytes after checksum")
    return NetworkParams(spec, weights, biases)
