"""Numba-jitted hot kernels: fused elementwise loops, one memory pass each.

Matrix products are left to BLAS at the call sites (numpy `@`), which both
backends share; what the jit path buys is fusing the activation / error /
gain-modulation chain and the update rules into single passes without
temporaries.

The loops are deliberately sequential. They are memory-bound, so extra
threads buy little, and a second thread pool competing with BLAS between
kernel calls oversubscribes small machines badly (measured 3-4x slowdowns).
Sequential loops also make results trivially independent of any worker
count and keep summation order fixed.

fastmath stays off: kernels must be bit-reproducible and tight enough for
finite-difference agreement at 1e-5.
"""

import math

import numpy as np
from numba import njit

from .common import ACT_IDENTITY, ACT_RELU, ACT_TANH

NAME = "numba"


@njit(cache=True)
def _act_err_gain(preact, x_target, tag, pred, err, gain):
    B, d = preact.shape
    for i in range(B):
        for j in range(d):
            a = preact[i, j]
            if tag == ACT_RELU:
                p = a if a > 0.0 else 0.0
                dv = 1.0 if a > 0.0 else 0.0
            elif tag == ACT_TANH:
                p = math.tanh(a)
                dv = 1.0 - p * p
            else:
                p = a
                dv = 1.0
            e = x_target[i, j] - p
            pred[i, j] = p
            err[i, j] = e
            gain[i, j] = e * dv


def act_err_gain(preact, x_target, tag):
    """Prediction, error and gain-modulated error for one layer, fused."""
    if tag not in (ACT_RELU, ACT_IDENTITY, ACT_TANH):
        raise ValueError(f"unknown activation tag {tag}")
    pred = np.empty_like(preact)
    err = np.empty_like(preact)
    gain = np.empty_like(preact)
    _act_err_gain(preact, x_target, tag, pred, err, gain)
    return pred, err, gain


@njit(cache=True)
def _latent_update(x, err_top, hw, eta, out):
    B, d = x.shape
    for i in range(B):
        for j in range(d):
            out[i, j] = x[i, j] - eta * (err_top[i, j] - hw[i, j])


def latent_update(x, err_top, hw, eta):
    """One descent step on a latent block: x - eta * (err_top - hw)."""
    out = np.empty_like(x)
    _latent_update(x, err_top, hw, eta, out)
    return out


@njit(cache=True)
def _sgd_step(w, grad, eta):
    r, c = w.shape
    for i in range(r):
        for j in range(c):
            w[i, j] -= eta * grad[i, j]


def sgd_step_inplace(w, grad, eta):
    """In-place plain gradient step w -= eta * grad."""
    _sgd_step(w, grad, eta)


@njit(cache=True)
def _half_sumsq(e):
    s = 0.0
    for i in range(e.shape[0]):
        for j in range(e.shape[1]):
            s += e[i, j] * e[i, j]
    return 0.5 * s


def half_sumsq(e):
    """0.5 * sum of squared entries."""
    return float(_half_sumsq(e))


def warmup():
    """Trigger jit compilation of every kernel on tiny inputs."""
    a = np.ones((2, 2))
    for tag in (ACT_RELU, ACT_IDENTITY, ACT_TANH):
        act_err_gain(a, a, tag)
    latent_update(a, a, a, 0.1)
    sgd_step_inplace(a.copy(), a, 0.1)
    half_sumsq(a)
