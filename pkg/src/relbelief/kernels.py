"""Backend-dispatched array kernels.

Thin wrappers that broadcast their arguments, hand flat float64 arrays to the
selected backend and restore the broadcast shape. Scalars in, float out.
"""

import numpy as np

from . import _backend
from . import _kernels_numpy

if _backend.USE_NUMBA:
    from . import _kernels_numba as _impl
else:
    _impl = _kernels_numpy

BACKEND = _backend.BACKEND


def _run(fn, *args):
    arrs = np.broadcast_arrays(*(np.asarray(a, dtype=np.float64) for a in args))
    shape = arrs[0].shape
    flat = [np.ascontiguousarray(a).ravel() for a in arrs]
    with np.errstate(all="ignore"):
        out = fn(*flat)
    if isinstance(out, tuple):
        return tuple(_shape(o, shape) for o in out)
    return _shape(out, shape)


def _shape(out, shape):
    if shape == ():
        return float(out[0])
    return out.reshape(shape)


def ndtr(x):
    return _run(_impl.ndtr_vec, x)


def ndtri(p):
    return _run(_impl.ndtri_vec, p)


def betainc(a, b, x):
    """Regularized incomplete beta I_x(a, b)."""
    x = np.asarray(x, dtype=np.float64)
    return _run(_impl.betainc_vec, a, b, x, 1.0 - x)


def gamma_pq(a, x):
    """Both regularized incomplete gammas, ``(P(a, x), Q(a, x))``."""
    return _run(_impl.gamma_pq_vec, a, x)


def gammainc(a, x):
    """Regularized lower incomplete gamma P(a, x)."""
    return _run(_impl.gamma_pq_vec, a, x)[0]


def gammaincc(a, x):
    """Regularized upper incomplete gamma Q(a, x)."""
    return _run(_impl.gamma_pq_vec, a, x)[1]


def t_cdf(t, df):
    return _run(_impl.t_cdf_vec, t, df)


def t_interval_mass(center, scale, df, lo, hi):
    return _run(_impl.t_interval_mass_vec, center, scale, df, lo, hi)


def trunc_normal_inv(mean, sd, lo, hi, u):
    return _run(_impl.trunc_normal_inv_vec, mean, sd, lo, hi, u)


def lgamma(x):
    return _run(_impl.lgamma_vec, x)
