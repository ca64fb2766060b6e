"""Prior-data conflict checks based on prior predictive p-values.

The variance prior is checked first through ``V = (n_E + n_R - 2) s^2``; if it
passes, the prior on the means is checked through ``U = (xbar_E, xbar_R)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .distributions import RandomStream, bivariate_t_logpdf
from .elicitation import Hyperparameters
from .errors import DegenerateInputError, DomainError
from .trial_data import SufficientStats

CHUNK_SIZE = 10_000
VERDICTS = ("variance_conflict", "means_conflict", "no_conflict")


def prior_predictive_v_logdensity(v, hyper: Hyperparameters, k: int):
    """Log density of ``V = sigma^2 * chi2_k`` with ``1/sigma^2 ~ Gamma(alpha0, rate=beta0)``."""
    v = np.asarray(v, dtype=float)
    if np.any(~(v > 0)):
        raise DomainError("v must be positive")
    if k < 1:
        raise DomainError("k must be at least 1")
    a, b = hyper.alpha0, hyper.beta0
    r = v / (2 * b)
    out = (math.lgamma((k + 2 * a) / 2) - math.lgamma(a) - math.lgamma(k / 2)
           + (k / 2 - 1) * np.log(r) - (k / 2 + a) * np.log1p(r) - math.log(2 * b))
    return float(out) if out.ndim == 0 else out


def prior_predictive_u_logdensity(u, hyper: Hyperparameters, n_E: int, n_R: int):
    """Log density of ``U = (xbar_E, xbar_R)`` under the prior predictive (bivariate t)."""
    a = hyper.alpha0
    diag = (hyper.beta0 / a) * np.array([hyper.tau0_sq + 1 / n_E, hyper.tau0_sq + 1 / n_R])
    return bivariate_t_logpdf(u, 2 * a, (hyper.mu0, hyper.mu0), diag)


def variance_score(v, hyper, k):
    """Invariant discrepancy for V: log m_V(v) + log(v)/2."""
    return prior_predictive_v_logdensity(v, hyper, k) + 0.5 * np.log(v)


def _chunks(reps):
    return [(i, min(CHUNK_SIZE, reps - s)) for i, s in enumerate(range(0, reps, CHUNK_SIZE))]


def _check_reps(reps):
    if reps < 1000:
        raise DomainError("reps must be at least 1000")


def simulate_v(hyper, k, stream: RandomStream, size):
    g = stream.generator
    sigma2 = 1.0 / g.gamma(hyper.alpha0, 1.0 / hyper.beta0, size)
    return sigma2 * g.chisquare(k, size)


def simulate_u(hyper, n_E, n_R, stream: RandomStream, size):
    g = stream.generator
    sigma2 = 1.0 / g.gamma(hyper.alpha0, 1.0 / hyper.beta0, size)
    sd = np.sqrt(sigma2[:, None] * np.array([hyper.tau0_sq + 1 / n_E, hyper.tau0_sq + 1 / n_R]))
    return hyper.mu0 + sd * g.standard_normal((size, 2))


def check_variance_prior(hyper: Hyperparameters, stats: SufficientStats, reps: int, seed: int, stream_offset=0):
    """Monte Carlo p-value ``M_V(score(V) <= score(v_obs))``."""
    _check_reps(reps)
    if not stats.s2 > 0:
        raise DegenerateInputError("s2 = 0 gives no information about the variance prior")
    k = stats.n_E + stats.n_R - 2
    obs = variance_score(k * stats.s2, hyper, k)
    count = 0
    for idx, m in _chunks(reps):
        v = simulate_v(hyper, k, RandomStream(seed, stream_offset + idx), m)
        count += int((variance_score(v, hyper, k) <= obs).sum())
    return count / reps


def check_means_prior(hyper: Hyperparameters, stats: SufficientStats, reps: int, seed: int, stream_offset=0):
    """Monte Carlo p-value ``M_U(m_U(U) <= m_U(u_obs))``."""
    _check_reps(reps)
    obs = prior_predictive_u_logdensity((stats.xbar_E, stats.xbar_R), hyper, stats.n_E, stats.n_R)
    count = 0
    for idx, m in _chunks(reps):
        u = simulate_u(hyper, stats.n_E, stats.n_R, RandomStream(seed, stream_offset + idx), m)
        count += int((prior_predictive_u_logdensity(u, hyper, stats.n_E, stats.n_R) <= obs).sum())
    return count / reps


# keeps the mean check on streams disjoint from the variance check
MEANS_STREAM_OFFSET = 1 << 20


@dataclass(frozen=True)
class ConflictReport:
    p_variance: float
    p_means: float | None
    threshold: float
    verdict: str
    reps: int
    seed: int

    def to_dict(self):
        return asdict(self)


def check_prior(hyper, stats, reps=100_000, threshold=0.05, seed=0) -> ConflictReport:
    if not 0 < threshold < 0.5:
        raise DomainError("threshold must lie in (0, 0.5)")
    p_var = check_variance_prior(hyper, stats, reps, seed)
    if p_var < threshold:
        return ConflictReport(p_var, None, threshold, "variance_conflict", reps, seed)
    p_means = check_means_prior(hyper, stats, reps, seed, MEANS_STREAM_OFFSET)
    verdict = "means_conflict" if p_means < threshold else "no_conflict"
    return ConflictReport(p_var, p_means, threshold, verdict, reps, seed)
