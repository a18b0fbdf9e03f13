import math

import numpy as np
import pytest
from scipy import stats

from conftest import random_bloch
from homodyne_pointer_lab.endpoint import TimeHorizon, gaussian_pdf
from homodyne_pointer_lab.pointers import RationalX, RationalZ
from homodyne_pointer_lab.pushforward import (
    DensityGrid,
    density_r,
    density_s,
    endpoint_expectation,
    figure_grid,
    optimal_pointer,
    pointer_cdf,
    pointer_density,
    pointer_support,
    pushforward_expectation,
)
from homodyne_pointer_lab.qubit import BlochVector
from homodyne_pointer_lab.simulate import SimConfig, sample_endpoints

INF = TimeHorizon.infinite()


@pytest.fixture(scope="module")
def hx():
    return optimal_pointer("x", INF)


@pytest.fixture(scope="module")
def hz():
    return optimal_pointer("z", INF)


def test_x_support(hx):
    lo, hi = pointer_support(hx)
    assert hi == pytest.approx(1.516, abs=2e-3) and lo == -hi
    rho = BlochVector(0.2, 0, 0.1)
    assert density_r(hi * 1.01, hx.c1, hx.eps, INF, rho) == 0.0
    assert density_r(-hi * 1.01, hx.c1, hx.eps, INF, rho) == 0.0
    assert density_r(hi, hx.c1, hx.eps, INF, rho) == math.inf


def test_z_support(hz):
    lo, hi = pointer_support(hz)
    assert lo == pytest.approx(-2.624, abs=0.02)
    assert hi == pytest.approx(5.391, abs=0.02)
    rho = BlochVector(0, 0, 0.5)
    assert density_s(lo - 0.01, hz.d2, hz.d3, hz.delta, INF, rho) == 0.0
    assert density_s(hi + 0.01, hz.d2, hz.d3, hz.delta, INF, rho) == 0.0
    assert density_s(lo, hz.d2, hz.d3, hz.delta, INF, rho) == math.inf


def test_densities_nonnegative(rng, hx, hz):
    xs = np.linspace(*pointer_support(hx), 401)[1:-1]
    zs = np.linspace(*pointer_support(hz), 401)[1:-1]
    for rho in random_bloch(rng, 50) + random_bloch(rng, 50, pure=True):
        assert pointer_density(hx, xs, INF, rho).min() >= 0
        assert pointer_density(hz, zs, INF, rho).min() >= 0


def test_pushforward_means_and_mass(rng, hx, hz):
    for rho in random_bloch(rng, 20):
        assert pushforward_expectation(lambda x: x, hx, INF, rho) == pytest.approx(rho.px, abs=1e-6)
        assert pushforward_expectation(lambda x: x, hz, INF, rho) == pytest.approx(rho.pz, abs=1e-6)
        assert pushforward_expectation(lambda x: 1.0, hx, INF, rho) == pytest.approx(1.0, abs=1e-6)
        assert pushforward_expectation(lambda x: 1.0, hz, INF, rho) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("which", ["x", "z"])
def test_change_of_variables(rng, which):
    h = optimal_pointer(which, TimeHorizon(8.0))
    for rho in random_bloch(rng, 5):
        c = rng.normal(size=4)

        def g(x, c=c):
            return np.polynomial.polynomial.polyval(x, c)

        lhs = pushforward_expectation(g, h, 8.0, rho)
        rhs = endpoint_expectation(lambda y: g(h(y)), 8.0, rho)
        assert lhs == pytest.approx(rhs, abs=1e-6)


def test_excited_state_z_values_exceed_one(hz):
    rho = BlochVector(0, 0, 1)
    above = pushforward_expectation(lambda x: 1.0 if x > 1 else 0.0, hz, INF, rho)
    assert above > 0
    assert pushforward_expectation(lambda x: x, hz, INF, rho) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize(
    "h", [RationalX.unbiased(0.605), RationalX(-2.0, 1.1), RationalZ.unbiased(2.7), RationalZ(0.0, 3.0, -1.0, 2.0)]
)
def test_pointer_cdf_against_density(h):
    rho = BlochVector(0.5, 0.1, 0.4)
    lo, hi = pointer_support(h)
    assert pointer_cdf(h, lo - 1, 8.0, rho) == 0.0
    assert pointer_cdf(h, hi, 8.0, rho) == 1.0
    for x in np.linspace(lo, hi, 7)[1:-1]:
        mass = pushforward_expectation(lambda v: 1.0 if v <= x else 0.0, h, 8.0, rho)
        assert pointer_cdf(h, x, 8.0, rho) == pytest.approx(mass, abs=1e-8)


def test_endpoint_grid_ground_state_is_gaussian():
    g = figure_grid("endpoint", BlochVector(0, 0, -1), INF)
    assert np.array_equal(g.values, gaussian_pdf(g.axis))
    assert g.support == (-6.0, 6.0)
    assert len(g.axis) == 513


def test_endpoint_grids_mirror():
    a = figure_grid("endpoint", BlochVector(1, 0, 0), INF)
    b = figure_grid("endpoint", BlochVector(-1, 0, 0), INF)
    assert np.allclose(a.values, b.values[::-1], atol=1e-16)


@pytest.mark.parametrize("which", ["pointer_x", "pointer_z"])
@pytest.mark.parametrize("state", [(-1, 0, 0), (0, 0, 0), (1, 0, 0), (0, 0, 1), (0, 0, -1)])
def test_pointer_grids_normalise(which, state):
    g = figure_grid(which, BlochVector(*state), INF)
    lo, hi = g.support
    assert np.all(g.axis > lo) and np.all(g.axis < hi)
    assert np.all(np.isfinite(g.values)) and g.values.min() >= 0
    assert g.integral() == pytest.approx(1.0, abs=1e-3)


def test_grid_integral_corrects_singular_ends():
    # u^{-1/2} on (0, 1] integrates to 2; the plain midpoint sum is far off
    n = 513
    axis = (np.arange(n) + 0.5) / n
    g = DensityGrid(axis, axis**-0.5, (0.0, 1.0), (True, False))
    plain = float(np.sum(g.values)) / n
    assert abs(plain - 2.0) > 1e-2
    assert g.integral() == pytest.approx(2.0, abs=1e-6)


def test_figure_grid_validation():
    with pytest.raises(ValueError):
        figure_grid("endpoint", BlochVector(0, 0, 0), INF, n=32)
    with pytest.raises(ValueError):
        figure_grid("pointer_y", BlochVector(0, 0, 0), INF)


def test_histogram_of_pointer_matches_density(hx):
    rho = BlochVector(0.3, 0.0, 0.5)
    cfg = SimConfig(INF, 10**6, 99)
    values = hx(sample_endpoints(rho, cfg).y)
    lo, hi = pointer_support(hx)
    edges = np.linspace(lo, hi, 61)
    observed, _ = np.histogram(values, bins=edges)
    cdf = np.array([pointer_cdf(hx, e, INF, rho) for e in edges])
    expected = np.diff(cdf) * len(values)
    expected *= observed.sum() / expected.sum()
    assert stats.chisquare(observed, expected).pvalue > 0.01
