"""Backend dispatch for the hot numeric kernels.

Two interchangeable implementations exist: a numba-jitted one
(`numba_backend`) and a pure-numpy one (`numpy_backend`). The active
backend is chosen once at import time from the PCN_BACKEND environment
variable:

    PCN_BACKEND=numba   force the jit backend (ImportError if unavailable)
    PCN_BACKEND=numpy   force the pure-numpy fallback
    unset / "auto"      numba if importable, else numpy

`use_backend()` switches at runtime (used by tests and the benchmark).
Callers must go through this module's attributes (``kernels.act_err_gain``
etc.) rather than importing the functions, so the switch takes effect.
"""

import os

from .common import ACT_IDENTITY, ACT_RELU, ACT_TANH, NAME_TAGS, TAG_NAMES

_EXPORTED = ("act_err_gain", "latent_update", "sgd_step_inplace",
             "half_sumsq", "warmup")

_impl = None


def _load(name):
    if name == "numba":
        from . import numba_backend as mod
    elif name == "numpy":
        from . import numpy_backend as mod
    else:
        raise ValueError(f"unknown kernel backend {name!r} "
                         "(expected 'numba' or 'numpy')")
    return mod


def use_backend(name):
    """Activate the named backend ('numba' or 'numpy') for this process."""
    global _impl
    _impl = _load(name)
    g = globals()
    for fn in _EXPORTED:
        g[fn] = getattr(_impl, fn)
    g["BACKEND"] = _impl.NAME


def backend_name():
    """Name of the currently active backend."""
    return _impl.NAME


def set_threads(n):
    """Cap the BLAS worker pool at `n` threads; 0 means leave the default.

    The fused elementwise kernels are sequential in both backends, so the
    matrix-product pool is the only threading knob. Needs threadpoolctl;
    silently a no-op without it.
    """
    global _blas_limiter
    if not n:
        return
    try:
        from threadpoolctl import ThreadpoolController
    except ImportError:
        return
    _blas_limiter = ThreadpoolController()
    _blas_limiter.limit(limits=max(1, int(n)))


_blas_limiter = None


_requested = os.environ.get("PCN_BACKEND", "auto").strip().lower() or "auto"
if _requested == "auto":
    try:
        use_backend("numba")
    except ImportError:
        use_backend("numpy")
else:
    use_backend(_requested)
