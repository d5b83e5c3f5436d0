"""Small dense feature extractor mapping image patches to latent vectors.

Forward and backward passes are written directly in numpy so the kernel
machinery can backpropagate evidence gradients through the network without
pulling in an autodiff framework.  Everything here is pure: outputs are
deterministic functions of (params, inputs) and no state is shared.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InputError

_ACTIVATIONS = ("tanh", "relu", "identity")


@dataclass(frozen=True)
class Architecture:
    """Layer sizes from flattened input to latent output, plus activation.

    The activation applies to every layer except the last, which is linear.
    """

    layer_sizes: tuple
    activation: str = "tanh"

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        object.__setattr__(self, "layer_sizes", sizes)
        if len(sizes) < 2:
            raise ConfigurationError("architecture needs at least input and output layers")
        if any(s <= 0 for s in sizes):
            raise ConfigurationError(f"layer sizes must be positive, got {sizes}")
        if self.activation not in _ACTIVATIONS:
            raise ConfigurationError(
                f"unknown activation {self.activation!r}; expected one of {_ACTIVATIONS}"
            )

    @property
    def input_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def latent_dim(self) -> int:
        return self.layer_sizes[-1]

    def layer_shapes(self):
        """[(weight_shape, bias_shape)] per layer, weights stored (out, in)."""
        return [
            ((self.layer_sizes[i + 1], self.layer_sizes[i]), (self.layer_sizes[i + 1],))
            for i in range(len(self.layer_sizes) - 1)
        ]

    @property
    def param_count(self) -> int:
        return sum(o * i + o for (o, i), _ in self.layer_shapes())

    def to_dict(self) -> dict:
        return {"layer_sizes": list(self.layer_sizes), "activation": self.activation}

    @classmethod
    def from_dict(cls, d: dict) -> "Architecture":
        return cls(tuple(d["layer_sizes"]), d.get("activation", "tanh"))

    @classmethod
    def default_for_window(cls, window: int, hidden: int = 16, latent_dim: int = 2,
                           activation: str = "tanh") -> "Architecture":
        return cls((window * window, hidden, latent_dim), activation)


@dataclass
class NetworkParams:
    """Flat float64 parameter vector plus the architecture that lays it out."""

    arch: Architecture
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).ravel()
        if self.values.size != self.arch.param_count:
            raise ConfigurationError(
                f"parameter count {self.values.size} does not match "
                f"architecture ({self.arch.param_count})"
            )
        if not np.all(np.isfinite(self.values)):
            raise InputError("network parameters contain non-finite entries")

    def copy(self) -> "NetworkParams":
        return NetworkParams(self.arch, self.values.copy())


@dataclass(frozen=True)
class PatchTensor:
    """A window x window crop, min-max normalized to [0, 1].

    The window must be odd so the crop has an unambiguous center pixel,
    recorded as a (row, col) grid coordinate.
    """

    values: np.ndarray
    center: tuple = field(default=(0, 0))

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 2 or vals.shape[0] != vals.shape[1]:
            raise InputError(f"patch must be square, got shape {vals.shape}")
        if vals.shape[0] % 2 == 0:
            raise ConfigurationError(f"patch window must be odd, got {vals.shape[0]}")
        if not np.all(np.isfinite(vals)):
            raise InputError("patch contains non-finite entries")
        if vals.min() < -1e-12 or vals.max() > 1 + 1e-12:
            raise InputError("patch values must lie in [0, 1]")

    @property
    def window(self) -> int:
        return self.values.shape[0]


def init_params(arch: Architecture, seed: int) -> NetworkParams:
    """Draw weights uniformly in +/- sqrt(6 / (fan_in + fan_out)); biases zero.

    Deterministic for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    chunks = []
    for (out_n, in_n), _ in arch.layer_shapes():
        lim = np.sqrt(6.0 / (in_n + out_n))
        chunks.append(rng.uniform(-lim, lim, size=out_n * in_n))
        chunks.append(np.zeros(out_n))
    return NetworkParams(arch, np.concatenate(chunks))


def _unpack(params: NetworkParams):
    layers = []
    off = 0
    for (out_n, in_n), _ in params.arch.layer_shapes():
        w = params.values[off:off + out_n * in_n].reshape(out_n, in_n)
        off += out_n * in_n
        b = params.values[off:off + out_n]
        off += out_n
        layers.append((w, b))
    return layers


def _act(name: str, x: np.ndarray) -> np.ndarray:
    if name == "tanh":
        return np.tanh(x)
    if name == "relu":
        return np.maximum(x, 0.0)
    return x


def _act_grad(name: str, pre: np.ndarray, post: np.ndarray) -> np.ndarray:
    if name == "tanh":
        return 1.0 - post * post
    if name == "relu":
        return (pre > 0).astype(np.float64)
    return np.ones_like(pre)


def forward_latents(params: NetworkParams, inputs: np.ndarray) -> np.ndarray:
    """Batched forward pass: (n, input_dim) -> (n, latent_dim)."""
    x = np.asarray(inputs, dtype=np.float64)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[None, :]
    if x.shape[1] != params.arch.input_dim:
        raise InputError(
            f"input width {x.shape[1]} does not match architecture "
            f"input {params.arch.input_dim}"
        )
    layers = _unpack(params)
    h = x
    for li, (w, b) in enumerate(layers):
        h = h @ w.T + b
        if li < len(layers) - 1:
            h = _act(params.arch.activation, h)
    return h[0] if squeeze else h


def forward_features(params: NetworkParams, patch: PatchTensor) -> np.ndarray:
    """Latent vector for a single patch."""
    return forward_latents(params, patch.values.ravel())


def _forward_cached(params: NetworkParams, x: np.ndarray):
    """Forward pass keeping pre/post activations for the backward pass."""
    layers = _unpack(params)
    acts = [x]          # post-activation of each layer input
    pres = []
    h = x
    for li, (w, b) in enumerate(layers):
        pre = h @ w.T + b
        pres.append(pre)
        h = _act(params.arch.activation, pre) if li < len(layers) - 1 else pre
        acts.append(h)
    return layers, acts, pres


def backward_latents(params: NetworkParams, inputs: np.ndarray,
                     upstream: np.ndarray) -> np.ndarray:
    """Gradient of sum_i upstream_i . z_i with respect to the flat parameters.

    ``inputs`` is (n, input_dim) and ``upstream`` (n, latent_dim); the result
    uses the same flat layout as NetworkParams.values.
    """
    x = np.asarray(inputs, dtype=np.float64)
    u = np.asarray(upstream, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if u.ndim == 1:
        u = u[None, :]
    if x.shape[1] != params.arch.input_dim:
        raise InputError("input width does not match architecture input")
    if u.shape != (x.shape[0], params.arch.latent_dim):
        raise InputError(
            f"upstream shape {u.shape} does not match "
            f"({x.shape[0]}, {params.arch.latent_dim})"
        )
    layers, acts, pres = _forward_cached(params, x)
    grads = [None] * len(layers)
    delta = u
    for li in range(len(layers) - 1, -1, -1):
        w, _ = layers[li]
        gw = delta.T @ acts[li]
        gb = delta.sum(axis=0)
        grads[li] = (gw, gb)
        if li > 0:
            delta = delta @ w
            delta = delta * _act_grad(params.arch.activation, pres[li - 1], acts[li])
    return np.concatenate([np.concatenate([gw.ravel(), gb]) for gw, gb in grads])


def backward_features(params: NetworkParams, patch: PatchTensor,
                      upstream: np.ndarray) -> np.ndarray:
    """Single-patch gradient of upstream . z with respect to the parameters."""
    u = np.asarray(upstream, dtype=np.float64).ravel()
    if u.size != params.arch.latent_dim:
        raise InputError(
            f"upstream length {u.size} does not match latent dim "
            f"{params.arch.latent_dim}"
        )
    return backward_latents(params, patch.values.ravel()[None, :], u[None, :])
