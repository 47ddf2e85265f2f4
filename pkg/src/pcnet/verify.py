"""Independent oracles for certifying the fast paths.

Two routes exist side by side:

* central finite differences of the energy (`fd_latent_grad`,
  `fd_weight_grad`) certify the analytic gradients;
* a scalar, loop-by-loop re-derivation of the error computation
  (`naive_errors`) certifies the vectorized snapshot.

The energy used for differencing is evaluated by a self-contained routine
in this module, written directly from the definitions and sharing no code
with the kernel backends.

Gradient agreement is summarized per matrix as

    rel_err = max|analytic - fd| / max(1, max|fd|)

which stays meaningful when individual entries vanish. Relu preactivations
within 1e-4 of zero are excluded by the case generator: the subgradient
choice at the kink makes differencing meaningless there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import inference, learning
from .model import (ErrorBundle, GenerativeStack, LatentBatch, ModelConfig,
                    compute_errors, derive_seed, init_weights)

KINK_ZONE = 1e-4
DEFAULT_H = 1e-6
REL_TOL = 1e-5


def _direct_energy(stack: GenerativeStack, input: np.ndarray,
                   latents: LatentBatch, labels: Optional[np.ndarray]) -> float:
    """Batch-averaged energy straight from the definitions."""
    levels = [input] + latents.x
    total = 0.0
    for l in range(stack.num_layers):
        pred = stack.activations[l].f(levels[l + 1] @ stack.weights[l].T)
        err = levels[l] - pred
        total += 0.5 * np.sum(err * err)
    if labels is not None:
        sup_err = levels[-1] @ stack.readout.T - labels
        total += 0.5 * np.sum(sup_err * sup_err)
    return float(total) / input.shape[0]


def fd_latent_grad(stack: GenerativeStack, input: np.ndarray, latents: LatentBatch,
                   labels: Optional[np.ndarray], layer: int,
                   h: float = DEFAULT_H) -> np.ndarray:
    """Central-difference energy gradient w.r.t. latent layer `layer` (1..L)."""
    if h <= 0:
        raise ValueError("h must be > 0")
    base = latents.copy()
    x = base.x[layer - 1]
    grad = np.empty_like(x)
    for i in range(x.shape[0]):
        for j in range(x.shape[1]):
            orig = x[i, j]
            x[i, j] = orig + h
            e_plus = _direct_energy(stack, input, base, labels)
            x[i, j] = orig - h
            e_minus = _direct_energy(stack, input, base, labels)
            x[i, j] = orig
            grad[i, j] = (e_plus - e_minus) / (2.0 * h)
    # The analytic latent rule is the gradient of the per-sample energy;
    # _direct_energy averages over the batch, so scale back up.
    return grad * input.shape[0]


def fd_weight_grad(stack: GenerativeStack, input: np.ndarray, latents: LatentBatch,
                   labels: Optional[np.ndarray], layer_or_readout,
                   h: float = DEFAULT_H) -> np.ndarray:
    """Central-difference energy gradient w.r.t. one weight matrix.

    `layer_or_readout` is a layer index 0..L-1 or the string "readout".
    Latents stay frozen; the result is batch-averaged like the analytic
    weight gradients.
    """
    if h <= 0:
        raise ValueError("h must be > 0")
    work = stack.copy()
    w = work.readout if layer_or_readout == "readout" else work.weights[layer_or_readout]
    grad = np.empty_like(w)
    for i in range(w.shape[0]):
        for j in range(w.shape[1]):
            orig = w[i, j]
            w[i, j] = orig + h
            e_plus = _direct_energy(work, input, latents, labels)
            w[i, j] = orig - h
            e_minus = _direct_energy(work, input, latents, labels)
            w[i, j] = orig
            grad[i, j] = (e_plus - e_minus) / (2.0 * h)
    return grad


def naive_errors(stack: GenerativeStack, input: np.ndarray, latents: LatentBatch,
                 labels: Optional[np.ndarray] = None) -> ErrorBundle:
    """Scalar re-derivation of the error snapshot; no matrix kernels.

    Triple loops over (sample, unit, unit above), using only Python floats
    and math functions. Slow by design; used to cross-check compute_errors.
    """
    L = stack.num_layers
    B = input.shape[0]
    levels = [input] + latents.x
    preacts, preds, errors, gains = [], [], [], []
    for l in range(L):
        act = stack.activations[l]
        w = stack.weights[l]
        d_l, d_up = w.shape
        A = np.zeros((B, d_l))
        P = np.zeros((B, d_l))
        E = np.zeros((B, d_l))
        G = np.zeros((B, d_l))
        for b in range(B):
            for i in range(d_l):
                a = 0.0
                for j in range(d_up):
                    a += float(w[i, j]) * float(levels[l + 1][b, j])
                p = _scalar_f(act.name, a)
                dv = _scalar_deriv(act.name, a)
                e = float(levels[l][b, i]) - p
                A[b, i] = a
                P[b, i] = p
                E[b, i] = e
                G[b, i] = e * dv
        preacts.append(A)
        preds.append(P)
        errors.append(E)
        gains.append(G)
    if labels is None:
        return ErrorBundle(preacts, preds, errors, gains,
                           np.zeros((B, stack.weights[-1].shape[1])))
    d_out, d_top = stack.readout.shape
    sup_pred = np.zeros((B, d_out))
    sup_err = np.zeros((B, d_out))
    top_err = np.zeros((B, d_top))
    for b in range(B):
        for k in range(d_out):
            y = 0.0
            for j in range(d_top):
                y += float(stack.readout[k, j]) * float(latents.x[-1][b, j])
            sup_pred[b, k] = y
            sup_err[b, k] = y - float(labels[b, k])
        for j in range(d_top):
            t = 0.0
            for k in range(d_out):
                t += sup_err[b, k] * float(stack.readout[k, j])
            top_err[b, j] = t
    return ErrorBundle(preacts, preds, errors, gains, top_err,
                       sup_pred=sup_pred, sup_err=sup_err)


def _scalar_f(name, a):
    if name == "relu":
        return a if a > 0.0 else 0.0
    if name == "tanh":
        return math.tanh(a)
    return a


def _scalar_deriv(name, a):
    if name == "relu":
        return 1.0 if a > 0.0 else 0.0
    if name == "tanh":
        t = math.tanh(a)
        return 1.0 - t * t
    return 1.0


# ---------------------------------------------------------------------------
# Randomized agreement suite (backs `pcnet verify` and the acceptance gate)
# ---------------------------------------------------------------------------

@dataclass
class CheckFailure:
    case: int
    kind: str          # "latent" | "weight" | "readout"
    layer: str
    entry: tuple
    analytic: float
    fd: float
    rel_err: float


@dataclass
class CheckReport:
    trials: int = 0
    max_rel_latent: float = 0.0
    max_rel_weight: float = 0.0
    max_rel_readout: float = 0.0
    failures: List[CheckFailure] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    @property
    def max_rel(self) -> float:
        return max(self.max_rel_latent, self.max_rel_weight, self.max_rel_readout)


def random_case(seed: int, max_width: int = 8, max_batch: int = 4,
                avoid_kinks: bool = True):
    """One random small net plus data, for oracle agreement checks.

    Cycles through layer counts 1..3, all activations and both modes.
    With `avoid_kinks`, redraws until every relu preactivation is at
    least KINK_ZONE away from zero.
    """
    for attempt in range(64):
        rng = np.random.default_rng(derive_seed(seed, attempt))
        L = int(rng.integers(1, 4))
        dims = tuple(int(rng.integers(2, max_width + 1)) for _ in range(L + 1))
        acts = [str(rng.choice(["relu", "identity", "tanh"])) for _ in range(L)]
        d_out = int(rng.integers(1, max_width + 1))
        B = int(rng.integers(1, max_batch + 1))
        config = ModelConfig(dims=dims, output_dim=d_out, activation=acts)
        stack = init_weights(config, derive_seed(seed, attempt, 1))
        input = rng.uniform(0.0, 1.0, size=(B, dims[0]))
        latents = LatentBatch([rng.standard_normal((B, d))
                               for d in dims[1:]])
        supervised = bool(rng.integers(0, 2))
        labels = None
        if supervised:
            labels = np.zeros((B, d_out))
            labels[np.arange(B), rng.integers(0, d_out, size=B)] = 1.0
        if avoid_kinks:
            bundle = compute_errors(stack, input, latents, labels)
            near = any(acts[l] == "relu"
                       and np.min(np.abs(bundle.preacts[l])) < KINK_ZONE
                       for l in range(L))
            if near:
                continue
        return stack, input, latents, labels
    raise RuntimeError("could not draw a kink-free case in 64 attempts")


def _compare(report, case_idx, kind, layer, analytic, fd):
    scale = max(1.0, float(np.max(np.abs(fd))))
    diff = np.abs(analytic - fd)
    rel = float(np.max(diff)) / scale
    attr = f"max_rel_{kind}"
    setattr(report, attr, max(getattr(report, attr), rel))
    if rel >= REL_TOL:
        entry = np.unravel_index(int(np.argmax(diff)), diff.shape)
        report.failures.append(CheckFailure(
            case_idx, kind, layer, tuple(int(i) for i in entry),
            float(analytic[entry]), float(fd[entry]), rel))


def gradient_check(seed: int = 0, trials: int = 100, h: float = DEFAULT_H) -> CheckReport:
    """Analytic-vs-finite-difference agreement over `trials` random nets."""
    report = CheckReport(trials=trials)
    for case_idx in range(trials):
        stack, input, latents, labels = random_case(derive_seed(seed, case_idx))
        bundle = compute_errors(stack, input, latents, labels)
        analytic_lat = inference.latent_gradients(bundle, stack)
        for l in range(1, stack.num_layers + 1):
            fd = fd_latent_grad(stack, input, latents, labels, l, h)
            _compare(report, case_idx, "latent", f"x({l})", analytic_lat[l - 1], fd)
        analytic_w = learning.weight_gradients(bundle, latents, input)
        for l in range(stack.num_layers):
            fd = fd_weight_grad(stack, input, latents, labels, l, h)
            _compare(report, case_idx, "weight", f"W({l})", analytic_w[l], fd)
        if labels is not None:
            fd = fd_weight_grad(stack, input, latents, labels, "readout", h)
            _compare(report, case_idx, "readout", "readout",
                     learning.readout_gradient(bundle, latents), fd)
    return report
