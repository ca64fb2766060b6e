"""Scalar special-function kernels compiled with numba.

Every public ``*_vec`` function takes flat float64 arrays of equal length and
returns a new array. Failures are signalled with NaN; the Python layer turns
them into exceptions.
"""

import math

import numpy as np
from numba import njit

EPS = 1e-15
FPMIN = 1e-300
BETA_MAXIT = 20000
GAMMA_MAXIT = 200000
SQRT2 = math.sqrt(2.0)


@njit(cache=True)
def ndtr(x):
    return 0.5 * math.erfc(-x / SQRT2)


@njit(cache=True)
def ndtri(p):
    # Wichura AS241 (PPND16), about 1e-16 relative accuracy.
    if not (p > 0.0 and p < 1.0):
        return np.nan
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        num = (((((((2509.0809287301226727 * r + 33430.575583588128105) * r
                    + 67265.770927008700853) * r + 45921.953931549871457) * r
                  + 13731.693765509461125) * r + 1971.5909503065514427) * r
                + 133.14166789178437745) * r + 3.387132872796366608)
        den = (((((((5226.495278852545925 * r + 28729.085735721942674) * r
                    + 39307.89580009271061) * r + 21213.794301586595867) * r
                  + 5394.1960214247511077) * r + 687.1870074920579083) * r
                + 42.313330701600911252) * r + 1.0)
        return q * num / den
    r = p if q < 0.0 else 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r -= 1.6
        num = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r
                    + 0.24178072517745061177) * r + 1.27045825245236838258) * r
                  + 3.64784832476320460504) * r + 5.7694972214606914055) * r
                + 4.6303378461565452959) * r + 1.42343711074968357734)
        den = (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r
                    + 0.0151986665636164571966) * r + 0.14810397642748007459) * r
                  + 0.68976733498510000455) * r + 1.6763848301838038494) * r
                + 2.05319162663775882187) * r + 1.0)
    else:
        r -= 5.0
        num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                    + 0.0012426609473880784386) * r + 0.026532189526576123093) * r
                  + 0.29656057182850489123) * r + 1.7848265399172913358) * r
                + 5.4637849111641143699) * r + 6.6579046435011037772)
        den = (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r
                    + 1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r
                  + 0.0148753612908506148525) * r + 0.13692988092273580531) * r
                + 0.59983220655588793769) * r + 1.0)
    val = num / den
    return -val if q < 0.0 else val


LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@njit(cache=True)
def _stirling_corr(x):
    # lgamma(x) - Stirling's formula, x >= 10
    r = 1.0 / x
    r2 = r * r
    return r * (1.0 / 12 - r2 * (1.0 / 360 - r2 * (1.0 / 1260 - r2 * (1.0 / 1680 - r2 / 1188))))


@njit(cache=True)
def lbeta(a, b):
    """log B(a, b), without the lgamma cancellation for large arguments."""
    big = max(a, b)
    small = min(a, b)
    if big < 10.0:
        return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    corr = _stirling_corr(big) - _stirling_corr(big + small)
    if small < 10.0:
        return (math.lgamma(small) - (big - 0.5) * math.log1p(small / big)
                - small * math.log(big + small) + small + corr)
    return (LOG_SQRT_2PI - 0.5 * math.log(small) - (big - 0.5) * math.log1p(small / big)
            + small * math.log(small / (big + small)) + _stirling_corr(small) + corr)


@njit(cache=True)
def _betacf(a, b, x):
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < FPMIN:
        d = FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, BETA_MAXIT + 1):
        m2 = 2.0 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        de = d * c
        h *= de
        if abs(de - 1.0) < EPS:
            return h
    return np.nan


@njit(cache=True)
def betainc(a, b, x, y):
    """Regularized I_x(a, b) with y = 1 - x supplied separately."""
    if x <= 0.0:
        return 0.0
    if y <= 0.0:
        return 1.0
    lbt = a * math.log(x) + b * math.log(y) - lbeta(a, b)
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(lbt) * _betacf(a, b, x) / a
    return 1.0 - math.exp(lbt) * _betacf(b, a, y) / b


@njit(cache=True)
def t_cdf(t, df):
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    t2 = t * t
    tail = 0.5 * betainc(0.5 * df, 0.5, df / (df + t2), t2 / (df + t2))
    return 1.0 - tail if t > 0.0 else tail


@njit(cache=True)
def _gamma_prefactor(a, x):
    # exp(-x) x^a / Gamma(a)
    if a < 10.0:
        return math.exp(-x + a * math.log(x) - math.lgamma(a))
    d = (x - a) / a
    return math.exp(-a * (d - math.log1p(d)) + 0.5 * math.log(a) - LOG_SQRT_2PI - _stirling_corr(a))


@njit(cache=True)
def gamma_pq(a, x):
    """Return (P(a, x), Q(a, x)), the regularized incomplete gamma pair."""
    if x <= 0.0:
        return 0.0, 1.0
    if math.isinf(x):
        return 1.0, 0.0
    if x < a + 1.0:
        ap = a
        s = 1.0 / a
        d = s
        for _ in range(GAMMA_MAXIT):
            ap += 1.0
            d *= x / ap
            s += d
            if abs(d) < abs(s) * EPS:
                p = s * _gamma_prefactor(a, x)
                return p, 1.0 - p
        return np.nan, np.nan
    b = x + 1.0 - a
    c = 1.0 / FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, GAMMA_MAXIT + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < FPMIN:
            d = FPMIN
        c = b + an / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        de = d * c
        h *= de
        if abs(de - 1.0) < EPS:
            q = _gamma_prefactor(a, x) * h
            return 1.0 - q, q
    return np.nan, np.nan


@njit(cache=True)
def trunc_normal_inv(mean, sd, lo, hi, u):
    """Inverse-cdf draw from N(mean, sd^2) restricted to (lo, hi], u in (0, 1]."""
    zl = (lo - mean) / sd
    zh = (hi - mean) / sd
    if zl > 0.0:
        # right of the mean: reflect so the tail probabilities stay representable
        fa = ndtr(-zh)
        fb = ndtr(-zl)
        mass = fb - fa
        if not mass > 1e-300:
            return np.nan
        z = -ndtri(fb - mass * u)
    else:
        fa = ndtr(zl)
        fb = ndtr(zh)
        mass = fb - fa
        if not mass > 1e-300:
            return np.nan
        z = ndtri(fa + mass * u)
    x = mean + sd * z
    if x <= lo:
        x = np.nextafter(lo, np.inf)
    if x > hi:
        x = hi
    return x


@njit(cache=True, nogil=True)
def ndtr_vec(x):
    out = np.empty_like(x)
    for i in range(x.size):
        out[i] = ndtr(x[i])
    return out


@njit(cache=True, nogil=True)
def ndtri_vec(p):
    out = np.empty_like(p)
    for i in range(p.size):
        out[i] = ndtri(p[i])
    return out


@njit(cache=True, nogil=True)
def betainc_vec(a, b, x, y):
    out = np.empty_like(x)
    for i in range(x.size):
        out[i] = betainc(a[i], b[i], x[i], y[i])
    return out


@njit(cache=True, nogil=True)
def t_cdf_vec(t, df):
    out = np.empty_like(t)
    for i in range(t.size):
        out[i] = t_cdf(t[i], df[i])
    return out


@njit(cache=True, nogil=True)
def gamma_pq_vec(a, x):
    p = np.empty_like(x)
    q = np.empty_like(x)
    for i in range(x.size):
        p[i], q[i] = gamma_pq(a[i], x[i])
    return p, q


@njit(cache=True, nogil=True)
def t_interval_mass_vec(center, scale, df, lo, hi):
    """Mass of (lo, hi] under center + scale * t_df, elementwise."""
    out = np.empty_like(center)
    for i in range(center.size):
        a = (lo[i] - center[i]) / scale[i]
        b = (hi[i] - center[i]) / scale[i]
        if a >= 0.0:
            out[i] = t_cdf(-a, df[i]) - t_cdf(-b, df[i])
        elif b <= 0.0:
            out[i] = t_cdf(b, df[i]) - t_cdf(a, df[i])
        else:
            out[i] = 1.0 - t_cdf(a, df[i]) - t_cdf(-b, df[i])
    return out


@njit(cache=True, nogil=True)
def trunc_normal_inv_vec(mean, sd, lo, hi, u):
    out = np.empty_like(mean)
    for i in range(mean.size):
        out[i] = trunc_normal_inv(mean[i], sd[i], lo[i], hi[i], u[i])
    return out


@njit(cache=True, nogil=True)
def lgamma_vec(x):
    out = np.empty_like(x)
    for i in range(x.size):
        out[i] = math.lgamma(x[i])
    return out
