"""Network shape, weights, activations, latent state and per-layer errors.

A network of L >= 1 latent layers generates top-down predictions: layer
l+1 predicts layer l through weights W(l) of shape d_l x d_{l+1}, with the
input row clamped at level 0. All batch state is kept as B x d float64
arrays (rows are samples), weights as plain 2-D float64 arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import kernels
from .errors import ConfigError, ShapeError
from .kernels.common import NAME_TAGS


@dataclass(frozen=True)
class Activation:
    """Elementwise activation with its derivative."""

    name: str
    f: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    tag: int


def _relu(a):
    return np.maximum(a, 0.0)


def _relu_deriv(a):
    # Subgradient at 0 is fixed to 0, matching the strict `a > 0` gate.
    return (a > 0.0).astype(np.float64)


ACTIVATIONS = {
    "relu": Activation("relu", _relu, _relu_deriv, NAME_TAGS["relu"]),
    "identity": Activation("identity", lambda a: np.asarray(a, dtype=np.float64).copy(),
                           lambda a: np.ones_like(a, dtype=np.float64),
                           NAME_TAGS["identity"]),
    "tanh": Activation("tanh", np.tanh, lambda a: 1.0 - np.tanh(a) ** 2,
                       NAME_TAGS["tanh"]),
}


@dataclass(frozen=True)
class ModelConfig:
    """Layer widths d_0..d_L, readout width, activation choice and the
    standard deviation used for fresh latent initialization.

    `activation` is a single name applied to every layer or a sequence of
    L names (one per generative layer, bottom to top).
    """

    dims: tuple
    output_dim: int
    activation: Union[str, Sequence[str]] = "relu"
    latent_init_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "output_dim", int(self.output_dim))
        object.__setattr__(self, "latent_init_scale", float(self.latent_init_scale))
        if len(self.dims) < 2:
            raise ConfigError("dims needs at least [d_0, d_1] (one latent layer)")
        if any(d < 1 for d in self.dims):
            raise ConfigError(f"all layer widths must be >= 1, got {self.dims}")
        if self.output_dim < 1:
            raise ConfigError(f"output_dim must be >= 1, got {self.output_dim}")
        if self.latent_init_scale < 0:
            raise ConfigError("latent_init_scale must be >= 0")
        names = ([self.activation] * self.num_layers
                 if isinstance(self.activation, str) else list(self.activation))
        if len(names) != self.num_layers:
            raise ConfigError(
                f"need 1 or {self.num_layers} activation names, got {len(names)}")
        for n in names:
            if n not in ACTIVATIONS:
                raise ConfigError(f"unknown activation {n!r}; "
                                  f"choices: {sorted(ACTIVATIONS)}")
        object.__setattr__(self, "activation",
                           names[0] if len(set(names)) == 1 else tuple(names))

    @property
    def num_layers(self) -> int:
        return len(self.dims) - 1

    def layer_activations(self) -> list:
        """Activation object per generative layer 0..L-1."""
        if isinstance(self.activation, str):
            return [ACTIVATIONS[self.activation]] * self.num_layers
        return [ACTIVATIONS[n] for n in self.activation]

    def param_count(self) -> int:
        """Total learnable entries over W(0..L-1) and the readout."""
        n = sum(self.dims[l] * self.dims[l + 1] for l in range(self.num_layers))
        return n + self.output_dim * self.dims[-1]


@dataclass
class GenerativeStack:
    """All learnable state: top-down weights plus the linear readout.

    Each layer carries its activation, so a stack is self-contained for
    every error/gradient computation.
    """

    weights: list
    readout: np.ndarray
    activations: list = field(default_factory=list)

    def __post_init__(self):
        if not self.activations:
            self.activations = [ACTIVATIONS["relu"]] * len(self.weights)

    @property
    def num_layers(self) -> int:
        return len(self.weights)

    def copy(self) -> "GenerativeStack":
        return GenerativeStack([w.copy() for w in self.weights],
                               self.readout.copy(), list(self.activations))

    def allclose(self, other, rtol=0.0, atol=0.0) -> bool:
        return (len(self.weights) == len(other.weights)
                and all(np.allclose(a, b, rtol=rtol, atol=atol)
                        for a, b in zip(self.weights, other.weights))
                and np.allclose(self.readout, other.readout, rtol=rtol, atol=atol))


@dataclass
class LatentBatch:
    """Per-sample latent rows X(1..L); x[l-1] holds layer l as B x d_l."""

    x: list

    @property
    def batch_size(self) -> int:
        return self.x[0].shape[0]

    @property
    def num_layers(self) -> int:
        return len(self.x)

    def copy(self) -> "LatentBatch":
        return LatentBatch([xl.copy() for xl in self.x])


@dataclass
class ErrorBundle:
    """One synchronous snapshot of the energy landscape.

    Lists are indexed by generative layer l = 0..L-1. `top_err` is the
    error signal driving the top latent layer: zero when no labels are
    clamped, sup_err @ readout otherwise.
    """

    preacts: list
    preds: list
    errors: list
    gain_mod: list
    top_err: np.ndarray
    sup_pred: Optional[np.ndarray] = None
    sup_err: Optional[np.ndarray] = None

    @property
    def batch_size(self) -> int:
        return self.errors[0].shape[0]

    @property
    def supervised(self) -> bool:
        return self.sup_err is not None

    def extended_error(self, layer: int) -> np.ndarray:
        """E(layer) for layer = 1..L, where E(L) is `top_err`."""
        if layer == len(self.errors):
            return self.top_err
        return self.errors[layer]


def derive_seed(root: int, *path: int) -> int:
    """Stable child seed for a (root, *path) coordinate."""
    ss = np.random.SeedSequence([int(root) & 0xFFFFFFFF, *map(int, path)])
    return int(ss.generate_state(1)[0])


def init_weights(config: ModelConfig, seed: int) -> GenerativeStack:
    """Xavier-uniform stack: entries i.i.d. U[-b, b], b = sqrt(6/(fan_in+fan_out))
    with fan_in = cols and fan_out = rows; deterministic in `seed`."""
    rng = np.random.default_rng(seed)

    def xavier(rows, cols):
        b = np.sqrt(6.0 / (rows + cols))
        return rng.uniform(-b, b, size=(rows, cols))

    L = config.num_layers
    weights = [xavier(config.dims[l], config.dims[l + 1]) for l in range(L)]
    readout = xavier(config.output_dim, config.dims[-1])
    return GenerativeStack(weights, readout, config.layer_activations())


def init_latents(config: ModelConfig, batch_size: int, seed: int) -> LatentBatch:
    """Fresh latents, i.i.d. Normal(0, latent_init_scale^2) per entry."""
    if batch_size < 1:
        raise ConfigError(f"batch_size must be >= 1, got {batch_size}")
    rng = np.random.default_rng(seed)
    scale = config.latent_init_scale
    x = [scale * rng.standard_normal((batch_size, d)) for d in config.dims[1:]]
    return LatentBatch(x)


def forward_layer(w: np.ndarray, x_above: np.ndarray, act: Activation):
    """Top-down prediction through one layer.

    preact = x_above @ w.T (B x d_l), pred = f(preact).
    """
    if x_above.ndim != 2 or w.ndim != 2 or x_above.shape[1] != w.shape[1]:
        raise ShapeError(f"forward_layer: x_above {tuple(x_above.shape)} "
                         f"incompatible with W {tuple(w.shape)}")
    preact = x_above @ w.T
    return preact, act.f(preact)


def _check_batch(name, arr, batch, width):
    if arr.shape != (batch, width):
        raise ShapeError.mismatch(name, arr.shape, (batch, width))


def compute_errors(stack: GenerativeStack, input: np.ndarray,
                   latents: LatentBatch,
                   labels: Optional[np.ndarray] = None) -> ErrorBundle:
    """Full error snapshot of (input, latents) under `stack`.

    Pure: none of the arguments are modified. With `labels` present the
    readout prediction, supervised error and the induced top-layer error
    sup_err @ readout are included; without labels the top error is zero.
    """
    acts = stack.activations
    L = stack.num_layers
    if latents.num_layers != L:
        raise ShapeError(f"latents hold {latents.num_layers} layers, stack has {L}")
    B = input.shape[0]
    levels = [input] + latents.x
    for l in range(L + 1):
        width = stack.weights[l].shape[0] if l < L else stack.weights[L - 1].shape[1]
        _check_batch(f"level {l}", levels[l], B, width)

    preacts, preds, errors, gains = [], [], [], []
    for l in range(L):
        preact = levels[l + 1] @ stack.weights[l].T
        pred, err, gain = kernels.act_err_gain(preact, levels[l], acts[l].tag)
        preacts.append(preact)
        preds.append(pred)
        errors.append(err)
        gains.append(gain)

    if labels is not None:
        d_out, d_top = stack.readout.shape
        _check_batch("labels", labels, B, d_out)
        sup_pred = levels[L] @ stack.readout.T
        sup_err = sup_pred - labels
        top_err = sup_err @ stack.readout
        return ErrorBundle(preacts, preds, errors, gains, top_err,
                           sup_pred=sup_pred, sup_err=sup_err)
    top_err = np.zeros_like(levels[L])
    return ErrorBundle(preacts, preds, errors, gains, top_err)
