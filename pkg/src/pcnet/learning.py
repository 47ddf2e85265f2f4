"""Weight descent on a frozen latent configuration: the slow timescale.

Gradients are batch means of the per-sample local rules: each generative
layer's gradient couples only its own gain-modulated error with the
activity of the layer above it. Errors are recomputed under the updated
weights at every step, so a multi-step learning phase keeps descending
the current landscape.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from . import kernels
from .energy import total_energy
from .errors import ConfigError, DivergenceError, ModeError, ShapeError
from .model import ErrorBundle, GenerativeStack, LatentBatch, compute_errors


@dataclass(frozen=True)
class LearnSettings:
    """t_learn of None means "match the batch size", resolved at run time."""

    t_learn: Optional[int] = None
    eta_learn: float = 0.005

    def __post_init__(self):
        if self.t_learn is not None and self.t_learn < 1:
            raise ConfigError(f"t_learn must be >= 1, got {self.t_learn}")
        if self.eta_learn < 0:
            raise ConfigError(f"eta_learn must be >= 0, got {self.eta_learn}")


def weight_gradients(bundle: ErrorBundle, latents: LatentBatch,
                     input: np.ndarray) -> List[np.ndarray]:
    """Batch-averaged energy gradients w.r.t. W(0..L-1).

    G_W(l) = -(1/B) H(l)^T @ X(l+1), with X(0) = input never a target.
    """
    B = bundle.batch_size
    levels = [input] + latents.x
    return [-(bundle.gain_mod[l].T @ levels[l + 1]) / B
            for l in range(len(bundle.gain_mod))]


def readout_gradient(bundle: ErrorBundle, latents: LatentBatch) -> np.ndarray:
    """Batch-averaged gradient w.r.t. the readout: (1/B) sup_err^T @ X(L)."""
    if not bundle.supervised:
        raise ModeError("readout gradient needs a supervised snapshot "
                        "(compute_errors was called without labels)")
    return (bundle.sup_err.T @ latents.x[-1]) / bundle.batch_size


def apply_updates(stack: GenerativeStack, grads: List[np.ndarray],
                  readout_grad: Optional[np.ndarray],
                  eta_learn: float) -> GenerativeStack:
    """Plain gradient step on every provided matrix; returns a new stack."""
    if len(grads) != stack.num_layers:
        raise ConfigError(f"got {len(grads)} gradients for "
                          f"{stack.num_layers} weight matrices")
    new = stack.copy()
    for w, g in zip(new.weights, grads):
        if w.shape != g.shape:
            raise ShapeError.mismatch("weight gradient", g.shape, w.shape)
        kernels.sgd_step_inplace(w, g, eta_learn)
    if readout_grad is not None:
        if new.readout.shape != readout_grad.shape:
            raise ShapeError.mismatch("readout gradient", readout_grad.shape,
                                      new.readout.shape)
        kernels.sgd_step_inplace(new.readout, readout_grad, eta_learn)
    return new


def run_learning(stack: GenerativeStack, input: np.ndarray, latents: LatentBatch,
                 labels: Optional[np.ndarray], settings: LearnSettings,
                 ) -> Tuple[GenerativeStack, List[float]]:
    """t_learn weight updates with latents held fixed.

    Every step recomputes the full snapshot under the current weights.
    Returns (updated stack, energies); as in run_inference, energies[t]
    is the energy after t updates, t_learn + 1 entries in total. The
    input stack is not modified.
    """
    t_learn = settings.t_learn if settings.t_learn is not None else latents.batch_size
    work = stack.copy()
    energies: List[float] = []
    for t in range(1, t_learn + 1):
        bundle = compute_errors(work, input, latents, labels)
        energies.append(total_energy(bundle))
        grads = weight_gradients(bundle, latents, input)
        for l, g in enumerate(grads):
            kernels.sgd_step_inplace(work.weights[l], g, settings.eta_learn)
            if not np.all(np.isfinite(work.weights[l])):
                raise DivergenceError(layer=f"W({l})", phase="learn", step=t)
        if labels is not None:
            g_out = readout_gradient(bundle, latents)
            kernels.sgd_step_inplace(work.readout, g_out, settings.eta_learn)
            if not np.all(np.isfinite(work.readout)):
                raise DivergenceError(layer="readout", phase="learn", step=t)
    final = compute_errors(work, input, latents, labels)
    energies.append(total_energy(final))
    return work, energies
