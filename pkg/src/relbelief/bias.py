"""Monte Carlo assessment of prior-induced bias for and against equivalence.

Bias against bin 0 is the prior probability of obtaining ``RB(0) < 1`` when
the true difference lies in bin 0; bias for bin 0 is the prior probability of
``RB(0) > 1`` when the true difference lies in an alternative bin.

Replications are split into fixed-size chunks; chunk ``k`` draws from
``RandomStream(seed, k)``. Counts are summed over chunks, so results depend
only on ``(seed, chunk_size)`` and not on the number of workers.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .distributions import RandomStream, truncated_normal_from_uniform
from .elicitation import Hyperparameters
from .errors import DomainError, NumericError, UnstableError
from .relative_belief import MODES, UNSTABLE_PRIOR_MASS, posterior_gamma_params, prior_difference_law

CHUNK_SIZE = 10_000
MAX_DISCARD_FRACTION = 1e-3


def _posterior_params(hyper, diff_bar, s2, n_E, n_R, mode, xbar_R):
    n = n_E + n_R
    if mode == "paper_literal":
        nu = n + 2 * hyper.alpha0 - 4
        if not nu > 0:
            raise DomainError(f"posterior degrees of freedom {nu} must be positive")
        scale = np.sqrt((2 * hyper.beta0 + (n - 2) * s2) / nu * (1 / n_E + 1 / n_R))
        return diff_bar, scale, nu
    kappa = 1.0 / hyper.tau0_sq
    shape, rate = posterior_gamma_params(hyper, s2, n_E, n_R)
    if n_E == n_R:
        center = n_E / (n_E + kappa) * diff_bar
    else:
        if xbar_R is None:
            raise DomainError("derived mode with unequal arms needs xbar_R")
        xbar_E = xbar_R + diff_bar
        center = ((n_E * xbar_E + kappa * hyper.mu0) / (n_E + kappa)
                  - (n_R * xbar_R + kappa * hyper.mu0) / (n_R + kappa))
    c = 1 / (n_E + kappa) + 1 / (n_R + kappa)
    return center, np.sqrt(c * rate / shape), 2 * shape


def rb_zero_from_stats(hyper: Hyperparameters, diff_bar, s2, n_E, n_R, delta,
                       mode="paper_literal", xbar_R=None):
    """Relative belief of bin 0 as a function of ``(xbar_E - xbar_R, s^2)``.

    Vectorized over ``diff_bar`` and ``s2``.
    """
    if mode not in MODES:
        raise DomainError(f"unknown mode {mode!r}")
    if np.any(np.asarray(s2) < 0):
        raise DomainError("s2 must be non-negative")
    prior = prior_difference_law(hyper, mode)
    prior_mass = float(kernels.t_interval_mass(prior.center, prior.scale, prior.df, -delta, delta))
    if prior_mass < UNSTABLE_PRIOR_MASS:
        raise UnstableError(f"prior mass {prior_mass:.3g} of bin 0 is too small")
    center, scale, df = _posterior_params(hyper, np.asarray(diff_bar, dtype=float),
                                          np.asarray(s2, dtype=float), n_E, n_R, mode, xbar_R)
    post = kernels.t_interval_mass(center, scale, df, -delta, delta)
    return post / prior_mass


def sample_cond_prior_predictive(hyper, true_diff, sigma2, n_E, n_R, stream: RandomStream, size=None):
    """Draw ``(xbar_E - xbar_R, s^2)`` given the true difference and ``sigma^2``."""
    sigma2 = np.asarray(sigma2, dtype=float)
    if np.any(~(sigma2 > 0)):
        raise DomainError("sigma2 must be positive")
    k = n_E + n_R - 2
    g = stream.generator
    diff_bar = true_diff + np.sqrt(sigma2 * (1 / n_E + 1 / n_R)) * g.standard_normal(size)
    s2 = sigma2 * g.chisquare(k, size) / k
    return diff_bar, s2


@dataclass(frozen=True)
class BiasSpec:
    hyper: Hyperparameters
    n_E: int = 12
    n_R: int = 12
    delta: float = 0.5
    alternative_bin: int = 1
    reps: int = 100_000
    seed: int = 0
    mode: str = "paper_literal"
    chunk_size: int = CHUNK_SIZE
    workers: int = 1

    def __post_init__(self):
        if self.n_E < 2 or self.n_R < 2:
            raise DomainError("each arm needs n >= 2")
        if not self.delta > 0:
            raise DomainError("delta must be positive")
        if self.alternative_bin == 0:
            raise DomainError("alternative_bin must be nonzero")
        if self.reps < 1:
            raise DomainError("reps must be positive")
        if self.mode not in MODES:
            raise DomainError(f"unknown mode {self.mode!r}")


def _chunk(spec: BiasSpec, target_bin, chunk_index, m):
    h = spec.hyper
    stream = RandomStream(spec.seed, chunk_index)
    g = stream.generator
    lo = (2 * target_bin - 1) * spec.delta
    hi = (2 * target_bin + 1) * spec.delta
    sigma2 = 1.0 / g.gamma(h.alpha0, 1.0 / h.beta0, m)
    sd = np.sqrt(2 * h.tau0_sq * sigma2)
    diff = truncated_normal_from_uniform(0.0, sd, lo, hi, stream.uniform_open_closed(m))
    bad = np.isnan(diff)
    diff = np.where(bad, 0.5 * (lo + hi), diff)
    xbar_R = None
    if spec.mode == "derived" and spec.n_E != spec.n_R:
        # mu_E + mu_R is independent of mu_E - mu_R under the prior
        total = 2 * h.mu0 + sd * g.standard_normal(m)
        mu_R = 0.5 * (total - diff)
        xbar_R = mu_R + np.sqrt(sigma2 / spec.n_R) * g.standard_normal(m)
        xbar_E = mu_R + diff + np.sqrt(sigma2 / spec.n_E) * g.standard_normal(m)
        k = spec.n_E + spec.n_R - 2
        diff_bar, s2 = xbar_E - xbar_R, sigma2 * g.chisquare(k, m) / k
    else:
        diff_bar, s2 = sample_cond_prior_predictive(h, diff, sigma2, spec.n_E, spec.n_R, stream, m)
    rb = rb_zero_from_stats(h, diff_bar, s2, spec.n_E, spec.n_R, spec.delta, spec.mode, xbar_R)
    bad |= ~np.isfinite(rb)
    ok = ~bad
    return int((rb[ok] < 1).sum()), int((rb[ok] > 1).sum()), int(bad.sum())


def _simulate(spec: BiasSpec, target_bin):
    sizes = [min(spec.chunk_size, spec.reps - s) for s in range(0, spec.reps, spec.chunk_size)]
    jobs = list(enumerate(sizes))
    if spec.workers > 1:
        with ThreadPoolExecutor(spec.workers) as ex:
            parts = list(ex.map(lambda j: _chunk(spec, target_bin, *j), jobs))
    else:
        parts = [_chunk(spec, target_bin, *j) for j in jobs]
    less = sum(p[0] for p in parts)
    more = sum(p[1] for p in parts)
    bad = sum(p[2] for p in parts)
    if bad > MAX_DISCARD_FRACTION * spec.reps:
        raise NumericError(f"{bad} of {spec.reps} replications failed numerically")
    return less, more, spec.reps - bad


def _binomial(count, n):
    p = count / n
    return p, math.sqrt(p * (1 - p) / n)


def simulate_bias_against(spec: BiasSpec):
    """Prior probability of evidence against bin 0 when bin 0 holds; ``(p, se)``."""
    less, _, n = _simulate(spec, 0)
    return _binomial(less, n)


def simulate_bias_for(spec: BiasSpec):
    """Prior probability of evidence for bin 0 when ``alternative_bin`` holds; ``(p, se)``."""
    _, more, n = _simulate(spec, spec.alternative_bin)
    return _binomial(more, n)


@dataclass(frozen=True)
class BiasReport:
    p_against: float
    se_against: float
    p_for: float
    se_for: float
    reps: int
    seed: int
    n_E: int
    n_R: int
    delta: float
    alternative_bin: int
    mode: str

    def to_dict(self):
        return asdict(self)


def bias_report(spec: BiasSpec) -> BiasReport:
    p_a, se_a = simulate_bias_against(spec)
    p_f, se_f = simulate_bias_for(spec)
    return BiasReport(p_a, se_a, p_f, se_f, spec.reps, spec.seed, spec.n_E, spec.n_R,
                      spec.delta, spec.alternative_bin, spec.mode)


def design_scan(hyper, delta, n_list, reps=100_000, seed=0, alternative_bin=1,
                mode="paper_literal", workers=1):
    """Bias probabilities for each ``(n_E, n_R)`` pair, common prior and margin."""
    if not n_list:
        raise DomainError("n_list is empty")
    return [
        bias_report(BiasSpec(hyper, int(nE), int(nR), delta, alternative_bin, reps, seed, mode,
                             workers=workers))
        for nE, nR in n_list
    ]


DESIGN_COLUMNS = ("n_E", "n_R", "p_against", "se_against", "p_for", "se_for")


def write_design_csv(reports, path_or_file):
    own = isinstance(path_or_file, (str, Path))
    fh = Path(path_or_file).open("w", newline="") if own else path_or_file
    try:
        w = csv.writer(fh)
        w.writerow(DESIGN_COLUMNS)
        for r in reports:
            w.writerow([r.n_E, r.n_R, repr(r.p_against), repr(r.se_against), repr(r.p_for), repr(r.se_for)])
    finally:
        if own:
            fh.close()
