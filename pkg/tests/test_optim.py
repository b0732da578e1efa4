import math

import numpy as np
import pytest
from scipy.integrate import quad

from metapool.exceptions import DomainError, InvalidBounds
from metapool.optim import (
    GammaFitConfig,
    gamma_cdf,
    gamma_quantile,
    normal_quantile,
    pso_minimize,
    t_quantile,
)

from conftest import GAMMA_4_2_QUANTILES


def _bisect(f, lo, hi, n=200):
    for _ in range(n):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _t_cdf_quad(x, nu):
    c = math.exp(math.lgamma((nu + 1) / 2) - math.lgamma(nu / 2)) / math.sqrt(nu * math.pi)
    val, _ = quad(lambda s: c * (1 + s * s / nu) ** (-(nu + 1) / 2), 0, x, epsabs=1e-13, epsrel=1e-13)
    return 0.5 + val


# --- PSO -------------------------------------------------------------------


def test_pso_sphere():
    x, f = pso_minimize(lambda x: float((x**2).sum()), [-5, -5], [5, 5])
    assert np.all(np.abs(x) < 1e-6)
    assert f == pytest.approx(float((x**2).sum()))


def test_pso_rosenbrock():
    def rosen(p):
        return (1 - p[0]) ** 2 + 100 * (p[1] - p[0] ** 2) ** 2

    x, f = pso_minimize(rosen, [-2, -2], [2, 2])
    assert f < 1e-6
    assert x == pytest.approx([1, 1], abs=1e-2)


def test_pso_1d_quadratic():
    # run to the iteration cap; the default stall rule stops near 1e-7
    cfg = GammaFitConfig(tolerance=0.0)
    x, _ = pso_minimize(lambda x: (x[0] - 3) ** 2, [0], [10], cfg)
    assert abs(x[0] - 3) <= 1e-8


def test_pso_vectorized_matches_scalar():
    cfg = GammaFitConfig(seed=11)
    f = lambda p: (p[0] - 1) ** 2 + (p[1] + 0.5) ** 2  # noqa: E731
    fv = lambda P: (P[:, 0] - 1) ** 2 + (P[:, 1] + 0.5) ** 2  # noqa: E731
    a = pso_minimize(f, [-3, -3], [3, 3], cfg)
    b = pso_minimize(fv, [-3, -3], [3, 3], cfg, vectorized=True)
    np.testing.assert_array_equal(a[0], b[0])
    assert a[1] == b[1]


def test_pso_deterministic():
    cfg = GammaFitConfig(seed=123, max_iters=60)
    f = lambda p: math.sin(3 * p[0]) + (p[1] - 0.3) ** 2  # noqa: E731
    a = pso_minimize(f, [-2, -2], [2, 2], cfg)
    b = pso_minimize(f, [-2, -2], [2, 2], cfg)
    assert a[0].tobytes() == b[0].tobytes() and a[1] == b[1]


def test_pso_stays_in_box():
    # unconstrained optimum at (10, -10) lies outside the box
    x, _ = pso_minimize(lambda p: (p[0] - 10) ** 2 + (p[1] + 10) ** 2, [0, 0], [1, 1])
    assert np.all(x >= 0) and np.all(x <= 1)
    assert x == pytest.approx([1, 0])


def test_pso_nonfinite_objective_is_ignored():
    def f(p):
        return math.inf if p[0] < 0 else (p[0] - 0.5) ** 2

    x, v = pso_minimize(f, [-1], [1])
    assert math.isfinite(v) and x[0] == pytest.approx(0.5, abs=1e-4)


@pytest.mark.parametrize(
    "lower, upper",
    [([0, 0], [1, 0]), ([1], [0]), ([0, 0], [1]), ([0], [math.inf])],
)
def test_pso_invalid_bounds(lower, upper):
    with pytest.raises(InvalidBounds):
        pso_minimize(lambda p: 0.0, lower, upper)


def test_config_rejects_tiny_swarm():
    with pytest.raises(ValueError):
        GammaFitConfig(swarm_size=1)


# --- normal quantile -------------------------------------------------------


@pytest.mark.parametrize(
    "p, expected",
    [(0.95, 1.6448536269514715), (0.5, 0.0), (0.975, 1.9599639845400532)],
)
def test_normal_quantile_values(p, expected):
    # expected values: bisection on 0.5 * erfc(-x / sqrt 2)
    assert normal_quantile(p) == pytest.approx(expected, abs=1e-10)


def test_normal_quantile_roundtrip_grid():
    p = np.linspace(1e-6, 1 - 1e-6, 2001)
    x = normal_quantile(p)
    back = np.array([0.5 * math.erfc(-xi / math.sqrt(2)) for xi in x])
    assert np.max(np.abs(back - p)) < 1e-12
    assert np.all(np.diff(x) > 0)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, math.nan])
def test_normal_quantile_domain(p):
    with pytest.raises(DomainError):
        normal_quantile(p)


# --- t quantile ------------------------------------------------------------


def test_t_quantile_df2_against_integrator():
    # bisection on a quadrature of the t density gives 2.919985580353723
    assert t_quantile(0.95, 2) == pytest.approx(2.919985580353723, abs=1e-8)
    oracle = _bisect(lambda x: _t_cdf_quad(x, 2) - 0.95, 0, 50)
    assert t_quantile(0.95, 2) == pytest.approx(oracle, abs=1e-8)


@pytest.mark.parametrize("df", [1, 2.5, 9, 30])
def test_t_quantile_matches_quadrature(df):
    for p in (0.6, 0.9, 0.975):
        oracle = _bisect(lambda x: _t_cdf_quad(x, df) - p, 0, 200)
        assert t_quantile(p, df) == pytest.approx(oracle, abs=1e-8)


@pytest.mark.parametrize("df", [1, 3, 17])
def test_t_quantile_median_and_symmetry(df):
    assert t_quantile(0.5, df) == pytest.approx(0.0, abs=1e-12)
    assert t_quantile(0.2, df) == pytest.approx(-t_quantile(0.8, df), abs=1e-12)


def test_t_quantile_normal_limit():
    assert t_quantile(0.975, 1e6) == pytest.approx(1.959964, abs=1e-4)


def test_t_quantile_domain():
    with pytest.raises(DomainError):
        t_quantile(0.5, 0)
    with pytest.raises(DomainError):
        t_quantile(1.0, 3)


# --- gamma -----------------------------------------------------------------


def test_gamma_quantile_exponential_closed_form():
    assert gamma_quantile(0.5, 1, 1) == pytest.approx(math.log(2), rel=1e-12)
    for p in (0.01, 0.3, 0.99):
        assert gamma_quantile(p, 1, 3.5) == pytest.approx(-math.log(1 - p) / 3.5, rel=1e-10)


def test_gamma_quantile_against_quadrature_oracle():
    levels = (0.05, 0.25, 0.5, 0.75, 0.95)
    got = gamma_quantile(np.array(levels), 4, 2)
    np.testing.assert_allclose(got, GAMMA_4_2_QUANTILES, rtol=1e-9)
    assert gamma_quantile(0.5, 4, 2) == pytest.approx(1.8360, abs=1e-3)


def test_gamma_roundtrip_random():
    rng = np.random.default_rng(2024)
    p = rng.uniform(1e-4, 1 - 1e-4, 500)
    shape = 10 ** rng.uniform(-1, 3, 500)
    rate = 10 ** rng.uniform(-2, 2, 500)
    x = gamma_quantile(p, shape, rate)
    np.testing.assert_allclose(gamma_cdf(x, shape, rate), p, atol=1e-9)


def test_gamma_quantile_increasing():
    p = np.linspace(0.001, 0.999, 999)
    for shape in (0.5, 1, 4, 100):
        assert np.all(np.diff(gamma_quantile(p, shape, 1.0)) > 0)


def test_gamma_domain():
    with pytest.raises(DomainError):
        gamma_quantile(0.5, 0, 1)
    with pytest.raises(DomainError):
        gamma_quantile(0.5, 1, -1)
    with pytest.raises(DomainError):
        gamma_quantile(0, 1, 1)
