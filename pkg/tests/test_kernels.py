"""Special functions against scipy/mpmath, and numba vs numpy agreement."""

import math

import mpmath
import numpy as np
import pytest
from scipy import special, stats

from relbelief import _kernels_numpy as knp
from relbelief import kernels

numba_k = pytest.importorskip("relbelief._kernels_numba")

rng = np.random.default_rng(7)


def test_ndtr_matches_scipy():
    x = np.linspace(-37, 8, 2001)
    # the tail loses a few ulps to the rounding of x/sqrt(2)
    np.testing.assert_allclose(kernels.ndtr(x), special.ndtr(x), rtol=1e-12, atol=1e-300)


def test_ndtri_round_trip():
    p = np.concatenate([np.logspace(-300, -1, 300), rng.uniform(0.01, 0.99, 300)])
    np.testing.assert_allclose(kernels.ndtri(p), special.ndtri(p), rtol=1e-14)


def test_ndtri_out_of_range_is_nan():
    assert np.isnan(kernels.ndtri(np.array([0.0, 1.0, -1.0, 2.0]))).all()


@pytest.mark.parametrize("df", [0.5, 1, 2, 4.5, 22, 300, 1e5])
def test_t_cdf(df):
    t = np.concatenate([-np.logspace(-3, 4, 60), np.logspace(-3, 4, 60), [0.0]])
    ref = stats.t.cdf(t, df)
    np.testing.assert_allclose(kernels.t_cdf(t, df), ref, rtol=1e-11, atol=1e-300)


def test_t_cdf_tail_against_mpmath():
    # lower tail far out, where subtraction from one would lose everything
    df, t = 3.0, -1e3
    x = df / (df + t * t)
    ref = 0.5 * mpmath.betainc(df / 2, 0.5, 0, x, regularized=True)
    assert kernels.t_cdf(t, df) == pytest.approx(float(ref), rel=1e-12)


def test_betainc():
    a = rng.uniform(0.1, 50, 400)
    b = rng.uniform(0.1, 50, 400)
    x = rng.uniform(0, 1, 400)
    np.testing.assert_allclose(kernels.betainc(a, b, x), special.betainc(a, b, x), rtol=1e-11, atol=1e-300)


def test_gammainc_pair():
    a = rng.uniform(0.05, 200, 400)
    x = a * rng.uniform(0.01, 3, 400)
    np.testing.assert_allclose(kernels.gammainc(a, x), special.gammainc(a, x), rtol=1e-12, atol=1e-300)
    np.testing.assert_allclose(kernels.gammaincc(a, x), special.gammaincc(a, x), rtol=1e-11, atol=1e-300)


def test_lgamma():
    x = np.logspace(-3, 3, 200)
    np.testing.assert_allclose(kernels.lgamma(x), special.gammaln(x), rtol=1e-13, atol=1e-14)


def test_scalar_in_float_out():
    assert isinstance(kernels.t_cdf(0.3, 5), float)
    assert kernels.t_cdf(np.zeros((2, 3)), 5).shape == (2, 3)


def test_interval_mass_tail_accuracy():
    # a bin far in the right tail keeps relative accuracy
    m = kernels.t_interval_mass(0.0, 1.0, 22.0, 40.0, 41.0)
    ref = stats.t.sf(40, 22) - stats.t.sf(41, 22)
    assert m == pytest.approx(ref, rel=1e-9)


def test_trunc_normal_inv_stays_inside():
    u = rng.uniform(0, 1, 1000)
    u[0] = 1.0
    x = kernels.trunc_normal_inv(0.0, 1.0, 30.0, 31.0, u)
    assert np.all((x > 30.0) & (x <= 31.0))


# numba and numpy backends agree -------------------------------------------------

CASES = {
    "ndtr_vec": lambda: (rng.normal(0, 5, 500),),
    "ndtri_vec": lambda: (rng.uniform(1e-12, 1, 500),),
    "t_cdf_vec": lambda: (rng.normal(0, 10, 500), rng.uniform(0.5, 100, 500)),
    "lgamma_vec": lambda: (rng.uniform(0.01, 100, 500),),
    "trunc_normal_inv_vec": lambda: (
        np.zeros(500), np.full(500, 2.0), np.full(500, -1.0), np.full(500, 3.0), rng.uniform(0, 1, 500)),
    "t_interval_mass_vec": lambda: (
        rng.normal(0, 3, 500), rng.uniform(0.5, 3, 500), rng.uniform(1, 50, 500),
        np.full(500, -0.5), np.full(500, 0.5)),
}


@pytest.mark.parametrize("name", sorted(CASES))
def test_backends_agree(name):
    args = CASES[name]()
    a = getattr(numba_k, name)(*args)
    b = getattr(knp, name)(*args)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-15)


def test_backends_agree_incomplete_functions():
    a = rng.uniform(0.1, 40, 300)
    b = rng.uniform(0.1, 40, 300)
    x = rng.uniform(0, 1, 300)
    np.testing.assert_allclose(numba_k.betainc_vec(a, b, x, 1 - x), knp.betainc_vec(a, b, x, 1 - x), rtol=1e-12)
    p1, q1 = numba_k.gamma_pq_vec(a, x * 50)
    p2, q2 = knp.gamma_pq_vec(a, x * 50)
    np.testing.assert_allclose(p1, p2, rtol=1e-12, atol=1e-300)
    np.testing.assert_allclose(q1, q2, rtol=1e-11, atol=1e-300)


def test_backend_flag_selects_numpy(monkeypatch):
    import subprocess
    import sys

    code = "import relbelief.kernels as k; print(k.BACKEND)"
    env = dict(__import__("os").environ, RELBELIEF_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
    assert not math.isnan(kernels.ndtr(0.0))
