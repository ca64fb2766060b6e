"""Hyperparameter elicitation from virtual-certainty intervals."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass

from .distributions import _unit_gamma_quantile, gamma_quantile, std_normal_quantile
from .errors import DegenerateInputError, DomainError, NoSolutionError

log = logging.getLogger(__name__)

ALPHA_BRACKET = (1e-3, 1e3)
ALPHA_CAP = 1e6
MAX_ITER = 200
RATIO_TOL = 1e-10


@dataclass(frozen=True)
class ElicitationSpec:
    """Expert inputs.

    ``(m1, m2)`` contains both arm means with virtual certainty; ``s1_sq`` and
    ``s2_sq`` bound the squared half-length of an interval holding virtually all
    measurements; ``gamma_vc`` is the virtual-certainty probability.
    """

    m1: float
    m2: float
    s1_sq: float
    s2_sq: float
    gamma_vc: float = 0.999

    def __post_init__(self):
        if not self.m1 < self.m2:
            raise DomainError("need m1 < m2")
        if self.s1_sq == self.s2_sq:
            raise DegenerateInputError("s1_sq == s2_sq gives a degenerate variance prior")
        if not 0 < self.s1_sq < self.s2_sq:
            raise DomainError("need 0 < s1_sq < s2_sq")
        if not 0.5 < self.gamma_vc < 1:
            raise DomainError("need 0.5 < gamma_vc < 1")

    @property
    def z(self):
        return std_normal_quantile((1 + self.gamma_vc) / 2)


@dataclass(frozen=True)
class Hyperparameters:
    mu0: float
    tau0_sq: float
    alpha0: float
    beta0: float

    def __post_init__(self):
        vals = (self.mu0, self.tau0_sq, self.alpha0, self.beta0)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError("hyperparameters must be finite")
        if not (self.tau0_sq > 0 and self.alpha0 > 0 and self.beta0 > 0):
            raise DomainError("tau0_sq, alpha0 and beta0 must be positive")

    def to_dict(self):
        return asdict(self)

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(float(d["mu0"]), float(d["tau0_sq"]), float(d["alpha0"]), float(d["beta0"]))
        except KeyError as exc:
            raise DomainError(f"prior is missing key {exc.args[0]!r}") from None


def elicit_location(spec: ElicitationSpec):
    mu0 = (spec.m1 + spec.m2) / 2
    tau0_sq = ((spec.m2 - spec.m1) / 2) ** 2 / spec.s2_sq
    return mu0, tau0_sq


def _log_quantile_ratio(alpha, p_hi, p_lo):
    q_lo = _unit_gamma_quantile(p_lo, alpha)
    if q_lo <= 0.0:
        return math.inf
    return math.log(_unit_gamma_quantile(p_hi, alpha)) - math.log(q_lo)


def elicit_variance(spec: ElicitationSpec):
    """Solve for the Gamma(shape, rate) prior on 1/sigma^2.

    The upper and lower ``(1 +- gamma)/2`` quantiles of 1/sigma^2 are matched to
    ``z^2/s1_sq`` and ``z^2/s2_sq``. The unit-rate quantile ratio is strictly
    decreasing in the shape, so the shape is found by bisection in log space and
    the rate follows from the upper equation.
    """
    p_hi = (1 + spec.gamma_vc) / 2
    p_lo = (1 - spec.gamma_vc) / 2
    target = math.log(spec.s2_sq / spec.s1_sq)

    def f(alpha):
        return _log_quantile_ratio(alpha, p_hi, p_lo) - target

    lo, hi = ALPHA_BRACKET
    while f(lo) < 0:
        lo /= 10
        if lo < 1e-12:
            raise NoSolutionError("quantile ratio too large for any shape")
    while f(hi) > 0:
        log.info("expanding shape bracket upward past %g", hi)
        hi *= 10
        if hi > ALPHA_CAP:
            raise NoSolutionError(
                f"shape exceeds cap {ALPHA_CAP:g}; s2_sq/s1_sq is too close to 1"
            )
    for _ in range(MAX_ITER):
        mid = math.sqrt(lo * hi)
        fm = f(mid)
        if fm > 0:
            lo = mid
        else:
            hi = mid
        if abs(fm) < RATIO_TOL * 1e-2 or hi / lo - 1 < 1e-15:
            break
    alpha0 = math.sqrt(lo * hi)
    beta0 = _unit_gamma_quantile(p_hi, alpha0) / (spec.z**2 / spec.s1_sq)
    return alpha0, beta0


def el4_residuals(spec: ElicitationSpec, alpha0, beta0):
    """Relative residuals of the two quantile-matching equations."""
    z2 = spec.z**2
    r_hi = gamma_quantile((1 + spec.gamma_vc) / 2, alpha0, beta0) / (z2 / spec.s1_sq) - 1
    r_lo = gamma_quantile((1 - spec.gamma_vc) / 2, alpha0, beta0) / (z2 / spec.s2_sq) - 1
    return r_hi, r_lo


def elicit(spec: ElicitationSpec) -> Hyperparameters:
    mu0, tau0_sq = elicit_location(spec)
    alpha0, beta0 = elicit_variance(spec)
    return Hyperparameters(mu0, tau0_sq, alpha0, beta0)
