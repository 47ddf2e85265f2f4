"""Pure-numpy implementations of the hot per-layer kernels.

Reference backend: every function here is the plain vectorized form of
the corresponding numba kernel. Selected via PCN_BACKEND=numpy.
"""

import numpy as np

from .common import ACT_IDENTITY, ACT_RELU, ACT_TANH

NAME = "numpy"


def act_err_gain(preact, x_target, tag):
    """Prediction, error and gain-modulated error for one layer.

    Returns (pred, err, gain) where pred = f(preact), err = x_target - pred
    and gain = err * f'(preact), all elementwise on B x d arrays.
    """
    if tag == ACT_RELU:
        pred = np.maximum(preact, 0.0)
        deriv = (preact > 0.0).astype(np.float64)
    elif tag == ACT_TANH:
        pred = np.tanh(preact)
        deriv = 1.0 - pred * pred
    elif tag == ACT_IDENTITY:
        pred = preact.copy()
        deriv = np.ones_like(preact)
    else:
        raise ValueError(f"unknown activation tag {tag}")
    err = x_target - pred
    return pred, err, err * deriv


def latent_update(x, err_top, hw, eta):
    """One descent step on a latent block: x - eta * (err_top - hw)."""
    return x - eta * (err_top - hw)


def sgd_step_inplace(w, grad, eta):
    """In-place plain gradient step w -= eta * grad."""
    w -= eta * grad


def half_sumsq(e):
    """0.5 * sum of squared entries."""
    return 0.5 * float(np.sum(e * e))


def warmup():
    """No-op; present for interface parity with the jit backend."""
