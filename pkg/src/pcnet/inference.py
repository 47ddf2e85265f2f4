"""Synchronous latent descent: the fast timescale of the alternating scheme.

Each step computes every error from one frozen snapshot of the network,
then moves all latent layers at once; no latent is read after any latent
has been written within a step. Clamping labels only changes the error
signal injected at the top layer, never the update rule itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .energy import total_energy
from .errors import ConfigError, DivergenceError, ShapeError
from .model import ErrorBundle, GenerativeStack, LatentBatch, compute_errors


@dataclass(frozen=True)
class EarlyStop:
    """Halt once the largest latent update stays below `threshold`
    (max magnitude over all layers and entries) for `patience`
    consecutive steps."""

    threshold: float
    patience: int = 1

    def __post_init__(self):
        if self.threshold <= 0:
            raise ConfigError("early-stop threshold must be > 0")
        if self.patience < 1:
            raise ConfigError("early-stop patience must be >= 1")


@dataclass(frozen=True)
class InferenceSettings:
    t_infer: int
    eta_infer: float
    early_stop: Optional[EarlyStop] = None

    def __post_init__(self):
        if self.t_infer < 1:
            raise ConfigError(f"t_infer must be >= 1, got {self.t_infer}")
        if self.eta_infer < 0:
            raise ConfigError(f"eta_infer must be >= 0, got {self.eta_infer}")


def latent_gradients(bundle: ErrorBundle, stack: GenerativeStack) -> List[np.ndarray]:
    """Energy gradient w.r.t. each latent layer, from one snapshot.

    G(l) = E(l) - H(l-1) @ W(l-1) for l = 1..L, with E(L) the bundle's
    top error signal (zero without labels, sup_err @ readout with them).
    """
    grads = []
    for l in range(1, stack.num_layers + 1):
        err = bundle.extended_error(l)
        hw = bundle.gain_mod[l - 1] @ stack.weights[l - 1]
        if err.shape != hw.shape:
            raise ShapeError.mismatch(f"latent gradient layer {l}", err.shape, hw.shape)
        grads.append(err - hw)
    return grads


def inference_step(stack: GenerativeStack, input: np.ndarray, latents: LatentBatch,
                   labels: Optional[np.ndarray], settings: InferenceSettings,
                   layer_order: Optional[Sequence[int]] = None,
                   ) -> Tuple[LatentBatch, ErrorBundle]:
    """One synchronous update of all latent layers.

    Returns the updated latents together with the pre-update snapshot the
    step was computed from. `layer_order` permutes the order in which the
    per-layer writes happen; since every read comes from the snapshot, the
    result is independent of it (tests rely on this).
    """
    bundle = compute_errors(stack, input, latents, labels)
    L = stack.num_layers
    order = range(1, L + 1) if layer_order is None else layer_order
    new_x: list = [None] * L
    eta = settings.eta_infer
    for l in order:
        hw = bundle.gain_mod[l - 1] @ stack.weights[l - 1]
        new_x[l - 1] = kernels.latent_update(latents.x[l - 1],
                                             bundle.extended_error(l), hw, eta)
    for l in range(L):
        if not np.all(np.isfinite(new_x[l])):
            raise DivergenceError(layer=f"x({l + 1})", phase="infer")
    return LatentBatch(new_x), bundle


def run_inference(stack: GenerativeStack, input: np.ndarray, latents: LatentBatch,
                  labels: Optional[np.ndarray], settings: InferenceSettings,
                  ) -> Tuple[LatentBatch, List[float], int]:
    """Latent descent for up to t_infer steps.

    Returns (final latents, energies, steps taken). energies[t] is the
    batch-averaged energy after t updates, so energies[0] belongs to the
    incoming latents and the list has steps_taken + 1 entries.
    """
    energies: List[float] = []
    current = latents
    steps_taken = 0
    streak = 0
    stop = settings.early_stop
    for t in range(1, settings.t_infer + 1):
        try:
            updated, bundle = inference_step(stack, input, current, labels, settings)
        except DivergenceError as err:
            err.step = t
            raise
        energies.append(total_energy(bundle))
        steps_taken = t
        if stop is not None:
            delta = max(float(np.max(np.abs(new - old)))
                        for new, old in zip(updated.x, current.x))
            streak = streak + 1 if delta < stop.threshold else 0
        current = updated
        if stop is not None and streak >= stop.patience:
            break
    final_bundle = compute_errors(stack, input, current, labels)
    energies.append(total_energy(final_bundle))
    return current, energies, steps_taken
