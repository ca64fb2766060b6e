"""Two-arm data ingestion, sufficient statistics and model checking."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .distributions import std_normal_cdf, std_normal_quantile
from .errors import DegenerateInputError, DomainError, InsufficientDataError


@dataclass(frozen=True)
class TwoArmData:
    experimental: tuple
    reference: tuple

    def __post_init__(self):
        object.__setattr__(self, "experimental", tuple(float(v) for v in self.experimental))
        object.__setattr__(self, "reference", tuple(float(v) for v in self.reference))
        for name, arm in (("experimental", self.experimental), ("reference", self.reference)):
            if not all(math.isfinite(v) for v in arm):
                raise DomainError(f"{name} arm contains non-finite values")

    @property
    def n_E(self):
        return len(self.experimental)

    @property
    def n_R(self):
        return len(self.reference)


@dataclass(frozen=True)
class SufficientStats:
    xbar_E: float
    xbar_R: float
    s2: float
    n_E: int
    n_R: int

    @property
    def diff(self):
        return self.xbar_E - self.xbar_R

    def to_dict(self):
        return {"xbar_E": self.xbar_E, "xbar_R": self.xbar_R, "s2": self.s2,
                "n_E": self.n_E, "n_R": self.n_R}


def read_csv(path) -> TwoArmData:
    """Read a ``arm,value`` CSV with arms labelled ``E`` and ``R``."""
    arms = {"E": [], "R": []}
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["arm", "value"]:
            raise DomainError(f"{path}: expected header 'arm,value'")
        for lineno, row in enumerate(reader, start=2):
            arm = row["arm"].strip()
            if arm not in arms:
                raise DomainError(f"{path}:{lineno}: arm must be E or R, got {arm!r}")
            try:
                arms[arm].append(float(row["value"]))
            except (TypeError, ValueError):
                raise DomainError(f"{path}:{lineno}: bad value {row['value']!r}") from None
    return TwoArmData(arms["E"], arms["R"])


def write_csv(data: TwoArmData, path):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["arm", "value"])
        w.writerows(("E", v) for v in data.experimental)
        w.writerows(("R", v) for v in data.reference)


def _check_sizes(data):
    if data.n_E < 2 or data.n_R < 2:
        raise InsufficientDataError("each arm needs at least two observations")


def sufficient_stats(data: TwoArmData) -> SufficientStats:
    _check_sizes(data)
    xe = np.asarray(data.experimental)
    xr = np.asarray(data.reference)
    ss = ((xe - xe.mean()) ** 2).sum() + ((xr - xr.mean()) ** 2).sum()
    s2 = ss / (data.n_E + data.n_R - 2)
    return SufficientStats(float(xe.mean()), float(xr.mean()), float(s2), data.n_E, data.n_R)


def residuals(data: TwoArmData) -> np.ndarray:
    """Within-arm residuals, experimental arm first."""
    _check_sizes(data)
    xe = np.asarray(data.experimental)
    xr = np.asarray(data.reference)
    return np.concatenate([xe - xe.mean(), xr - xr.mean()])


def grand_mean_residuals(data: TwoArmData) -> np.ndarray:
    """Residuals about the mean of both arms combined, experimental arm first."""
    _check_sizes(data)
    x = np.concatenate([data.experimental, data.reference])
    return x - x.mean()


# ---------------------------------------------------------------------------
# Shapiro-Wilk (Royston 1995, algorithm AS R94)

_C1 = [0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056]
_C2 = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633]
_C3 = [0.5440, -0.39978, 0.025054, -6.714e-4]
_C4 = [1.3822, -0.77857, 0.062767, -0.0020322]
_C5 = [-1.5861, -0.31082, -0.083751, 0.0038915]
_C6 = [-0.4803, -0.082676, 0.0030302]
_G = [-2.273, 0.459]


def _poly(c, x):
    return sum(ci * x**i for i, ci in enumerate(c))


def _sw_coefficients(n):
    m = std_normal_quantile((np.arange(1, n + 1) - 0.375) / (n + 0.25))
    mm = float(m @ m)
    u = 1.0 / math.sqrt(n)
    a = np.empty(n)
    an = -m[0] / math.sqrt(mm) + _poly(_C1, u)
    if n > 5:
        an1 = -m[1] / math.sqrt(mm) + _poly(_C2, u)
        phi = (mm - 2 * m[0] ** 2 - 2 * m[1] ** 2) / (1 - 2 * an**2 - 2 * an1**2)
        a[:] = m / math.sqrt(phi)
        a[0], a[1] = -an, -an1
        a[-1], a[-2] = an, an1
    else:
        phi = (mm - 2 * m[0] ** 2) / (1 - 2 * an**2)
        a[:] = m / math.sqrt(phi)
        a[0], a[-1] = -an, an
    return a


def shapiro_wilk(values):
    """Shapiro-Wilk W and p-value using Royston's approximation.

    Valid for 3 <= n <= 5000.
    """
    x = np.sort(np.asarray(values, dtype=float))
    n = x.size
    if not 3 <= n <= 5000:
        raise DomainError(f"Shapiro-Wilk needs 3 <= n <= 5000, got n={n}")
    ssq = float(((x - x.mean()) ** 2).sum())
    if not ssq > 0 or ssq < 1e-300 * n:
        raise DegenerateInputError("zero sample variance")

    if n == 3:
        a = np.array([-math.sqrt(0.5), 0.0, math.sqrt(0.5)])
    else:
        a = _sw_coefficients(n)
    w = float((a @ x) ** 2 / ssq)
    w = min(w, 1.0)

    if n == 3:
        pw = 6.0 / math.pi * (math.asin(math.sqrt(w)) - math.asin(math.sqrt(0.75)))
        return w, max(pw, 0.0)

    w1 = math.log1p(-w) if w < 1.0 else -math.inf
    if n <= 11:
        gamma = _poly(_G, n)
        if w1 == -math.inf or gamma - w1 <= 0:
            return w, 0.0 if w1 != -math.inf else 1.0
        y = -math.log(gamma - w1)
        mean = _poly(_C3, n)
        sd = math.exp(_poly(_C4, n))
    else:
        if w1 == -math.inf:
            return w, 1.0
        ln = math.log(n)
        y = w1
        mean = _poly(_C5, ln)
        sd = math.exp(_poly(_C6, ln))
    return w, float(1.0 - std_normal_cdf((y - mean) / sd))


def qq_points(values):
    """Normal QQ pairs (theoretical quantile, order statistic), Blom positions."""
    x = np.sort(np.asarray(values, dtype=float))
    n = x.size
    if n < 2:
        raise InsufficientDataError("QQ plot needs at least two values")
    q = std_normal_quantile((np.arange(1, n + 1) - 0.375) / (n + 0.25))
    return np.column_stack([q, x])


def check_model(data: TwoArmData) -> dict:
    """Normality check of the two-arm model.

    Reports Shapiro-Wilk on residuals about the grand mean (``p_value``) and on
    within-arm residuals (``p_value_within_arm``).
    """
    w, p = shapiro_wilk(grand_mean_residuals(data))
    w_arm, p_arm = shapiro_wilk(residuals(data))
    return {
        "test": "shapiro_wilk",
        "n": data.n_E + data.n_R,
        "w_statistic": w,
        "p_value": p,
        "residuals": "grand_mean",
        "w_statistic_within_arm": w_arm,
        "p_value_within_arm": p_arm,
    }


def qq_table(data: TwoArmData):
    """One QQ row per observation: ``(arm, residual, arm_quantile, pooled_quantile)``.

    Residuals are within-arm. ``arm_quantile`` places the residual among its
    own arm, ``pooled_quantile`` among all residuals; both use Blom positions.
    Rows are ordered by arm, then residual.
    """
    res = residuals(data)
    labels = np.array(["E"] * data.n_E + ["R"] * data.n_R)
    n = res.size
    pooled_rank = np.empty(n, dtype=int)
    pooled_rank[np.argsort(res, kind="stable")] = np.arange(1, n + 1)
    pooled_q = std_normal_quantile((pooled_rank - 0.375) / (n + 0.25))
    rows = []
    for arm in ("E", "R"):
        idx = np.flatnonzero(labels == arm)
        idx = idx[np.argsort(res[idx], kind="stable")]
        arm_q = qq_points(res[idx])[:, 0]
        for k, q in zip(idx, arm_q):
            rows.append((arm, float(res[k]), float(q), float(pooled_q[k])))
    return rows
