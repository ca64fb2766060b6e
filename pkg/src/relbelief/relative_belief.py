"""Relative belief inference for the discretized mean difference.

The difference ``mu_E - mu_R`` is binned into ``psi = i`` for
``((2i - 1) delta, (2i + 1) delta]``. Bin 0 is the equivalence hypothesis.

Two modes build the prior and posterior laws of the difference:

``paper_literal``
    prior ``tau0 * sqrt(beta0/alpha0) * t(2 alpha0)``; posterior centred at
    ``xbar_E - xbar_R`` with ``nu = n_E + n_R + 2 alpha0 - 4`` degrees of freedom.
``derived``
    the laws actually implied by the conjugate prior and the Gamma/normal
    posterior: the prior scale carries the extra ``sqrt(2)`` and the posterior is
    the exact Student-t mixture (shrunken centre, ``n_E + n_R + 2 alpha0`` df).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .distributions import RandomStream, ScaledTLaw, sample_gamma, sample_normal, scaled_t_interval_prob
from .elicitation import Hyperparameters
from .errors import ConsistencyError, DomainError, EstimationError, UnstableError
from .trial_data import SufficientStats

MODES = ("paper_literal", "derived")
UNSTABLE_PRIOR_MASS = 1e-12
TIE_RTOL = 1e-12
DEFAULT_TAIL = 1e-6


def _check_mode(mode):
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")


def prior_difference_law(hyper: Hyperparameters, mode="paper_literal") -> ScaledTLaw:
    _check_mode(mode)
    factor = 1.0 if mode == "paper_literal" else 2.0
    scale = math.sqrt(hyper.tau0_sq * factor * hyper.beta0 / hyper.alpha0)
    return ScaledTLaw(0.0, scale, 2.0 * hyper.alpha0)


def _shrunk_means(hyper, xbar_E, xbar_R, n_E, n_R):
    kappa = 1.0 / hyper.tau0_sq
    m_E = (n_E * xbar_E + kappa * hyper.mu0) / (n_E + kappa)
    m_R = (n_R * xbar_R + kappa * hyper.mu0) / (n_R + kappa)
    return m_E, m_R


def posterior_gamma_params(hyper, s2, n_E, n_R):
    """(shape, rate) of the posterior Gamma law of 1/sigma^2."""
    n = n_E + n_R
    return (n + 2 * hyper.alpha0) / 2, (2 * hyper.beta0 + (n - 2) * s2) / 2


def posterior_difference_law(hyper: Hyperparameters, stats: SufficientStats, mode="paper_literal") -> ScaledTLaw:
    _check_mode(mode)
    n_E, n_R = stats.n_E, stats.n_R
    n = n_E + n_R
    if mode == "paper_literal":
        nu = n + 2 * hyper.alpha0 - 4
        if not nu > 0:
            raise DomainError(f"posterior degrees of freedom {nu} must be positive")
        sp2 = (2 * hyper.beta0 + (n - 2) * stats.s2) / nu
        return ScaledTLaw(stats.xbar_E - stats.xbar_R, math.sqrt(sp2 * (1 / n_E + 1 / n_R)), nu)
    kappa = 1.0 / hyper.tau0_sq
    shape, rate = posterior_gamma_params(hyper, stats.s2, n_E, n_R)
    m_E, m_R = _shrunk_means(hyper, stats.xbar_E, stats.xbar_R, n_E, n_R)
    c = 1 / (n_E + kappa) + 1 / (n_R + kappa)
    return ScaledTLaw(m_E - m_R, math.sqrt(c * rate / shape), 2 * shape)


@dataclass(frozen=True)
class DifferenceLaws:
    prior: ScaledTLaw
    posterior: ScaledTLaw
    mode: str = "paper_literal"


def difference_laws(hyper, stats, mode="paper_literal") -> DifferenceLaws:
    return DifferenceLaws(prior_difference_law(hyper, mode), posterior_difference_law(hyper, stats, mode), mode)


def exact_posterior_sampler(hyper: Hyperparameters, stats: SufficientStats, stream: RandomStream, size=None):
    """Draw ``mu_E - mu_R`` from the joint Gamma/normal posterior."""
    shape, rate = posterior_gamma_params(hyper, stats.s2, stats.n_E, stats.n_R)
    kappa = 1.0 / hyper.tau0_sq
    m_E, m_R = _shrunk_means(hyper, stats.xbar_E, stats.xbar_R, stats.n_E, stats.n_R)
    sigma2 = 1.0 / sample_gamma(stream, shape, rate, size)
    mu_E = sample_normal(stream, 0.0, 1.0, size) * np.sqrt(sigma2 / (stats.n_E + kappa)) + m_E
    mu_R = sample_normal(stream, 0.0, 1.0, size) * np.sqrt(sigma2 / (stats.n_R + kappa)) + m_R
    return mu_E - mu_R


# ---------------------------------------------------------------------------
# grid


@dataclass(frozen=True)
class DeltaGrid:
    """Bins ``i_min..i_max`` of half-width ``delta``; the end bins absorb the tails."""

    delta: float
    i_min: int
    i_max: int
    tail_policy: str = "lump_into_end_bins"

    def __post_init__(self):
        if not self.delta > 0:
            raise DomainError("delta must be positive")
        if not self.i_min <= 0 <= self.i_max:
            raise DomainError("grid must contain bin 0")

    @property
    def bins(self):
        return np.arange(self.i_min, self.i_max + 1)

    def edges(self):
        """Lower and upper bin edges with the lumped ends at -inf / +inf."""
        i = self.bins
        lower = (2 * i - 1) * self.delta
        upper = (2 * i + 1) * self.delta
        lower = lower.astype(float)
        upper = upper.astype(float)
        lower[0] = -np.inf
        upper[-1] = np.inf
        return lower, upper

    @classmethod
    def covering(cls, laws, delta, tail=DEFAULT_TAIL):
        """Smallest symmetric-in-construction grid leaving < ``tail`` of each law outside."""
        side = tail / 2

        def outside_right(i):
            x = (2 * i + 1) * delta
            return max(float(scaled_t_interval_prob(law, x, np.inf)) for law in laws)

        def outside_left(i):
            x = (2 * i - 1) * delta
            return max(float(scaled_t_interval_prob(law, -np.inf, x)) for law in laws)

        return cls(delta, -_search(lambda k: outside_left(-k), side), _search(outside_right, side))


def _search(outside, side):
    """Least k >= 0 with outside(k) < side (outside is nonincreasing)."""
    if outside(0) < side:
        return 0
    hi = 1
    while outside(hi) >= side:
        hi *= 2
        if hi > 2**40:
            raise DomainError("law too diffuse for the requested grid tail")
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if outside(mid) < side:
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# table and derived inferences


@dataclass
class RBTable:
    grid: DeltaGrid
    bins: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    prior_mass: np.ndarray
    posterior_mass: np.ndarray
    rb: np.ndarray
    unstable: np.ndarray

    def index_of(self, i):
        if not self.grid.i_min <= i <= self.grid.i_max:
            raise DomainError(f"bin {i} outside grid [{self.grid.i_min}, {self.grid.i_max}]")
        return int(i - self.grid.i_min)

    def rows(self):
        return [
            {"bin_index": int(b), "lower": _finite_or_none(lo), "upper": _finite_or_none(up),
             "prior_mass": float(p), "posterior_mass": float(q), "rb": float(r)}
            for b, lo, up, p, q, r in zip(self.bins, self.lower, self.upper,
                                          self.prior_mass, self.posterior_mass, self.rb)
        ]


def _finite_or_none(x):
    return float(x) if math.isfinite(x) else None


def rb_table(laws: DifferenceLaws, grid: DeltaGrid) -> RBTable:
    lower, upper = grid.edges()
    prior = np.asarray(scaled_t_interval_prob(laws.prior, lower, upper))
    post = np.asarray(scaled_t_interval_prob(laws.posterior, lower, upper))
    with np.errstate(divide="ignore", invalid="ignore"):
        rb = np.where(prior > 0, post / prior, np.nan)
    unstable = prior < UNSTABLE_PRIOR_MASS
    return RBTable(grid, grid.bins, lower, upper, prior, post, rb, unstable)


def _rb_le(rb, ref):
    return rb <= ref * (1 + TIE_RTOL)


def strength(table: RBTable, i0=0) -> float:
    """Posterior mass of bins whose relative belief is no greater than bin ``i0``'s."""
    ref = table.rb[table.index_of(i0)]
    ok = ~np.isnan(table.rb)
    return float(min(1.0, table.posterior_mass[ok & _rb_le(table.rb, ref)].sum()))


def lrse(table: RBTable):
    """Bin maximizing the relative belief ratio over stable rows.

    Ties go to the smallest ``|i|``, then to negative ``i``. Returns
    ``(bin, at_boundary)`` where ``at_boundary`` flags a lumped end bin.
    """
    stable = ~table.unstable & ~np.isnan(table.rb)
    if not stable.any():
        raise EstimationError("no stable rows to estimate from")
    best = table.rb[stable].max()
    cand = table.bins[stable & (table.rb >= best * (1 - TIE_RTOL))]
    i = int(sorted(cand, key=lambda k: (abs(k), k))[0])
    return i, i in (table.grid.i_min, table.grid.i_max) and table.grid.i_min != table.grid.i_max


def _rb_groups(table):
    """Stable rows grouped by relative belief (ties merged), largest first."""
    idx = np.flatnonzero(~table.unstable & ~np.isnan(table.rb))
    idx = idx[np.argsort(-table.rb[idx], kind="stable")]
    groups = []
    for k in idx:
        if groups and table.rb[k] >= table.rb[groups[-1][0]] * (1 - TIE_RTOL):
            groups[-1].append(k)
        else:
            groups.append([k])
    return groups


def credible_threshold(table: RBTable, gamma: float) -> float:
    """``c_gamma = inf{k : posterior mass of {rb >= k} <= gamma}``.

    On a discrete table the infimum is the relative belief of the group that
    first pushes the upper set past ``gamma``.
    """
    if not 0 <= gamma < 1:
        raise DomainError("gamma must lie in [0, 1)")
    groups = _rb_groups(table)
    cum = 0.0
    for g in groups:
        cum += table.posterior_mass[g].sum()
        if cum > gamma:
            return float(table.rb[g[0]])
    return float(table.rb[groups[-1][0]])


@dataclass(frozen=True)
class CredibleRegion:
    gamma: float
    threshold: float
    bins: tuple
    interval: tuple | None
    posterior_mass: float

    def to_dict(self):
        return {
            "gamma": self.gamma,
            "threshold": self.threshold,
            "bins": list(self.bins),
            "contiguous": self.interval is not None,
            "interval": None if self.interval is None else [_finite_or_none(v) for v in self.interval],
            "posterior_mass": self.posterior_mass,
        }


def credible_region(table: RBTable, gamma: float) -> CredibleRegion:
    c = credible_threshold(table, gamma)
    sel = ~table.unstable & ~np.isnan(table.rb) & (table.rb >= c * (1 - TIE_RTOL))
    bins = tuple(int(b) for b in table.bins[sel])
    interval = None
    if bins and bins[-1] - bins[0] + 1 == len(bins):
        interval = (float(table.lower[sel][0]), float(table.upper[sel][-1]))
    return CredibleRegion(gamma, c, bins, interval, float(table.posterior_mass[sel].sum()))


def interval_hypothesis_rb(laws: DifferenceLaws, a, b):
    """Prior and posterior probability of ``(a, b]`` and their ratio."""
    if not a < b:
        raise DomainError("need a < b")
    prior = float(scaled_t_interval_prob(laws.prior, a, b))
    post = float(scaled_t_interval_prob(laws.posterior, a, b))
    if prior < UNSTABLE_PRIOR_MASS:
        raise UnstableError(f"prior probability {prior:.3g} of ({a}, {b}] is too small")
    return {"lower": a, "upper": b, "prior_prob": prior, "posterior_prob": post, "rb": post / prior}


# ---------------------------------------------------------------------------
# classification


CLASSES = ("evidence_for_weak", "evidence_for_strong", "evidence_against_weak",
           "evidence_against_strong", "inconclusive")


def classify(rb0, strength0, prior0, post0, small=0.05, large=0.95):
    """Label the evidence about bin 0.

    Against (rb0 < 1): strength below ``small`` is strong; a strength of at
    least ``large`` together with a posterior mass below ``small`` and a prior
    mass of at least ``small`` is the ambiguous discrete case and is reported
    as inconclusive; anything else is weak. For (rb0 > 1): strength of at least
    ``large`` is strong, otherwise weak. rb0 == 1 is inconclusive.
    """
    if not post0 <= strength0 * (1 + TIE_RTOL) + 1e-15 or not strength0 <= rb0 * (1 + TIE_RTOL) + 1e-15:
        raise ConsistencyError(
            f"inequality posterior0 <= strength <= rb0 violated: {post0}, {strength0}, {rb0}"
        )
    if rb0 == 1.0:
        return "inconclusive"
    if rb0 < 1.0:
        if strength0 < small:
            return "evidence_against_strong"
        if strength0 >= large and post0 < small and prior0 >= small:
            return "inconclusive"
        return "evidence_against_weak"
    return "evidence_for_strong" if strength0 >= large else "evidence_for_weak"


@dataclass
class RBAnalysis:
    table: RBTable
    rb0: float
    strength0: float
    prior_mass_at_0: float
    posterior_mass_at_0: float
    lrse_bin: int
    lrse_at_boundary: bool
    credible: CredibleRegion
    classification: str
    thresholds: dict = field(default_factory=dict)

    def summary(self):
        return {
            "rb0": self.rb0,
            "strength0": self.strength0,
            "prior_mass_at_0": self.prior_mass_at_0,
            "posterior_mass_at_0": self.posterior_mass_at_0,
            "lrse_bin": self.lrse_bin,
            "lrse_at_boundary": self.lrse_at_boundary,
            "credible_region": self.credible.to_dict(),
            "classification": self.classification,
            "classification_thresholds": dict(self.thresholds),
        }


def evidence_classification(table: RBTable, small=0.05, large=0.95):
    k = table.index_of(0)
    rb0 = float(table.rb[k])
    s0 = strength(table, 0)
    prior0 = float(table.prior_mass[k])
    post0 = float(table.posterior_mass[k])
    label = classify(rb0, s0, prior0, post0, small, large)
    return {"classification": label, "rb0": rb0, "strength0": s0,
            "prior_mass_at_0": prior0, "posterior_mass_at_0": post0}


def analyze(laws: DifferenceLaws, delta, gamma=0.95, grid=None, small=0.05, large=0.95) -> RBAnalysis:
    grid = grid or DeltaGrid.covering([laws.prior, laws.posterior], delta)
    table = rb_table(laws, grid)
    ev = evidence_classification(table, small, large)
    i_hat, at_edge = lrse(table)
    return RBAnalysis(
        table=table,
        rb0=ev["rb0"],
        strength0=ev["strength0"],
        prior_mass_at_0=ev["prior_mass_at_0"],
        posterior_mass_at_0=ev["posterior_mass_at_0"],
        lrse_bin=i_hat,
        lrse_at_boundary=at_edge,
        credible=credible_region(table, gamma),
        classification=ev["classification"],
        thresholds={"small": small, "large": large},
    )


# ---------------------------------------------------------------------------
# export


def write_rb_csv(table: RBTable, path):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_index", "lower", "upper", "prior_mass", "posterior_mass", "rb"])
        for b, lo, up, p, q, r in zip(table.bins, table.lower, table.upper,
                                      table.prior_mass, table.posterior_mass, table.rb):
            w.writerow([int(b), repr(float(lo)), repr(float(up)), repr(float(p)), repr(float(q)), repr(float(r))])


def density_table(laws: DifferenceLaws, lo, hi, num=801):
    """Fine-grid prior density, posterior density and their ratio."""
    x = np.linspace(lo, hi, num)
    prior = laws.prior.pdf(x)
    post = laws.posterior.pdf(x)
    return np.column_stack([x, prior, post, post / prior])
