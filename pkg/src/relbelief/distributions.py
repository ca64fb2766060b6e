"""Special functions, distribution laws and seeded sampling.

Everything heavy goes through :mod:`relbelief.kernels`, so the numba and numpy
backends produce the same numbers up to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError, NumericError

UINT64_MAX = 2**64 - 1


def _is_scalar(*args):
    return all(np.ndim(a) == 0 for a in args)


def _require_positive(name, value):
    if np.any(~(np.asarray(value, dtype=float) > 0)):
        raise DomainError(f"{name} must be > 0, got {value!r}")


# ---------------------------------------------------------------------------
# normal


def std_normal_cdf(x):
    return kernels.ndtr(x)


def std_normal_pdf(x):
    x = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    return float(out) if out.ndim == 0 else out


def std_normal_quantile(p):
    pa = np.asarray(p, dtype=float)
    if np.any(~((pa > 0.0) & (pa < 1.0))):
        raise DomainError(f"normal quantile needs 0 < p < 1, got {p!r}")
    return kernels.ndtri(p)


# ---------------------------------------------------------------------------
# Student t


def student_t_cdf(x, df):
    _require_positive("df", df)
    return kernels.t_cdf(x, df)


def student_t_pdf(x, df):
    _require_positive("df", df)
    x = np.asarray(x, dtype=float)
    df = np.asarray(df, dtype=float)
    logc = kernels.lgamma(0.5 * (df + 1.0)) - kernels.lgamma(0.5 * df) - 0.5 * np.log(df * math.pi)
    out = np.exp(logc - 0.5 * (df + 1.0) * np.log1p(x * x / df))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ScaledTLaw:
    """Law of ``center + scale * T`` with ``T`` standard Student t on ``df``."""

    center: float
    scale: float
    df: float

    def __post_init__(self):
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise DomainError(f"scale must be positive and finite, got {self.scale}")
        if not self.df > 0:
            raise DomainError(f"df must be positive, got {self.df}")

    def cdf(self, x):
        return kernels.t_cdf((np.asarray(x, dtype=float) - self.center) / self.scale, self.df)

    def pdf(self, x):
        z = (np.asarray(x, dtype=float) - self.center) / self.scale
        return student_t_pdf(z, self.df) / self.scale

    def interval_prob(self, a, b):
        return scaled_t_interval_prob(self, a, b)


def scaled_t_interval_prob(law: ScaledTLaw, a, b):
    """Probability of the half-open interval ``(a, b]`` under ``law``.

    Bins lying wholly in one tail are evaluated from that tail, so small masses
    keep their relative accuracy.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a > b):
        raise DomainError("interval lower end exceeds upper end")
    return kernels.t_interval_mass(law.center, law.scale, law.df, a, b)


# ---------------------------------------------------------------------------
# Gamma (shape, rate)


def gamma_cdf(x, shape, rate):
    _require_positive("shape", shape)
    _require_positive("rate", rate)
    x = np.asarray(x, dtype=float)
    return kernels.gammainc(shape, np.maximum(x, 0.0) * rate)


def gamma_sf(x, shape, rate):
    _require_positive("shape", shape)
    _require_positive("rate", rate)
    x = np.asarray(x, dtype=float)
    return kernels.gammaincc(shape, np.maximum(x, 0.0) * rate)


def gamma_logpdf(x, shape, rate):
    x = np.asarray(x, dtype=float)
    return shape * np.log(rate) + (shape - 1.0) * np.log(x) - rate * x - math.lgamma(shape)


def _unit_gamma_quantile(p, a):
    """Quantile of Gamma(a, 1) by bracketing plus Newton steps in log x."""
    upper = p > 0.5
    target = 1.0 - p if upper else p

    def resid(y):
        pp, qq = kernels.gamma_pq(a, math.exp(y))
        return (target - qq) if upper else (pp - target)

    if a >= 1.0:
        # Wilson-Hilferty start; log x has spread about 1/sqrt(a)
        z = float(kernels.ndtri(p))
        c = 1.0 - 1.0 / (9.0 * a) + z / (3.0 * math.sqrt(a))
        y0 = math.log(a * c**3) if c > 0 else math.log(a) - 1.0
        step = 0.5 / math.sqrt(a)
    elif not upper:
        # small-x asymptote P(a, x) ~ x^a / Gamma(a + 1)
        y0 = (math.log(p) + math.lgamma(a + 1.0)) / a
        if y0 < -700.0:
            return 0.0
        y0 = min(y0, math.log(a + 1.0))
        step = 1.0
    else:
        y0 = math.log(a + 1.0)
        step = 1.0
    lo = hi = y0
    f = resid(y0)
    if f < 0:
        while True:
            lo = hi
            hi += step
            step *= 2.0
            if hi > 710.0:
                raise NumericError("gamma quantile bracket overflow")
            if resid(hi) >= 0:
                break
    elif f > 0:
        while True:
            hi = lo
            lo -= step
            step *= 2.0
            if lo < -745.0:
                return 0.0
            if resid(lo) <= 0:
                break
    else:
        return math.exp(y0)
    y = y0
    for _ in range(400):
        if f == 0.0:
            break
        if f < 0:
            lo = max(lo, y)
        else:
            hi = min(hi, y)
        x = math.exp(y)
        # resid is increasing in y in both branches, with slope x * pdf(x)
        dens = math.exp(-x + a * math.log(x) - math.lgamma(a))
        ynew = y - f / dens if dens > 0 else 0.5 * (lo + hi)
        # dy is the relative error in x; below 1e-14 the residual is rounding noise
        if abs(ynew - y) < 1e-14:
            y = ynew
            break
        if not (lo < ynew < hi):
            ynew = 0.5 * (lo + hi)
        if hi - lo < 4e-16 * max(1.0, abs(y)):
            break
        y = ynew
        f = resid(y)
    return math.exp(y)


def gamma_quantile(p, shape, rate):
    """Inverse of :func:`gamma_cdf` in ``x`` (shape-rate parameterization)."""
    _require_positive("shape", shape)
    _require_positive("rate", rate)
    if not 0.0 < p < 1.0:
        raise DomainError(f"gamma quantile needs 0 < p < 1, got {p!r}")
    return _unit_gamma_quantile(float(p), float(shape)) / rate


# ---------------------------------------------------------------------------
# bivariate t


def bivariate_t_logpdf(u, df, mean, scale):
    """Log density of the bivariate t with location ``mean``, diagonal scale matrix ``scale``.

    ``u`` may have shape ``(2,)`` or ``(n, 2)``. ``scale`` is a 2x2 diagonal
    matrix or the length-2 vector of its diagonal.
    """
    _require_positive("df", df)
    s = np.asarray(scale, dtype=float)
    if s.shape == (2, 2):
        if s[0, 1] != 0.0 or s[1, 0] != 0.0:
            raise DomainError("scale matrix must be diagonal")
        s = np.diag(s)
    if s.shape != (2,) or np.any(~(s > 0)):
        raise DomainError("scale must be positive definite (positive diagonal)")
    d = np.asarray(u, dtype=float) - np.asarray(mean, dtype=float)
    quad = (d * d / s).sum(axis=-1)
    logc = (math.lgamma(0.5 * df + 1.0) - math.lgamma(0.5 * df)
            - math.log(df * math.pi) - 0.5 * math.log(s[0] * s[1]))
    out = logc - (0.5 * df + 1.0) * np.log1p(quad / df)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# random streams and samplers


class RandomStream:
    """Reproducible random stream keyed by ``(seed, stream_index)``.

    Backed by the Philox counter-based generator; the key is fed through
    ``numpy.random.SeedSequence`` with ``stream_index`` as the spawn key, so
    distinct indices give independent streams. A stream must not be shared
    between threads.
    """

    def __init__(self, seed: int, stream_index: int = 0):
        if not (0 <= int(seed) <= UINT64_MAX):
            raise DomainError("seed must be a 64-bit unsigned integer")
        if int(stream_index) < 0:
            raise DomainError("stream_index must be non-negative")
        self.seed = int(seed)
        self.stream_index = int(stream_index)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_index,))
        self.generator = np.random.Generator(np.random.Philox(ss))

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, stream_index={self.stream_index})"

    def uniform_open_closed(self, size=None):
        """Uniform draws on (0, 1]."""
        return 1.0 - self.generator.random(size)


def sample_uniform(stream: RandomStream, size=None):
    return stream.uniform_open_closed(size)


def sample_normal(stream: RandomStream, mean, sd, size=None):
    _require_positive("sd", sd)
    return stream.generator.normal(mean, sd, size)


def sample_gamma(stream: RandomStream, shape, rate, size=None):
    _require_positive("shape", shape)
    _require_positive("rate", rate)
    return stream.generator.gamma(shape, 1.0 / np.asarray(rate, dtype=float), size)


def sample_chi_squared(stream: RandomStream, df, size=None):
    _require_positive("df", df)
    return stream.generator.chisquare(df, size)


def truncated_normal_from_uniform(mean, sd, lo, hi, u):
    """Inversion map for the truncated normal; NaN where the truncation mass underflows."""
    return kernels.trunc_normal_inv(mean, sd, lo, hi, u)


def sample_truncated_normal(stream: RandomStream, mean, sd, lo, hi, size=None):
    """Draw from N(mean, sd^2) conditioned on (lo, hi] by cdf inversion."""
    _require_positive("sd", sd)
    if np.any(np.asarray(lo) >= np.asarray(hi)):
        raise DomainError("truncation requires lo < hi")
    u = stream.uniform_open_closed(size)
    x = truncated_normal_from_uniform(mean, sd, lo, hi, u)
    if np.any(np.isnan(x)):
        raise NumericError("truncation mass below 1e-300; cannot invert")
    return x
