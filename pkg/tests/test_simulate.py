import math

import numpy as np
import pytest
from scipy import stats

from homodyne_pointer_lab import simulate as sim
from homodyne_pointer_lab.endpoint import TimeHorizon
from homodyne_pointer_lab.pushforward import optimal_pointer
from homodyne_pointer_lab.qubit import SIGMA_X, SIGMA_Z, BlochVector
from homodyne_pointer_lab.simulate import (
    EndpointSamples,
    SimConfig,
    SimulationError,
    chi_square_against_q,
    counter_uniforms,
    empirical_quality,
    ks_against_q,
    sample_endpoints,
    simulate,
    simulate_filter_paths,
    state_variance,
    worker_count,
)

INF = TimeHorizon.infinite()
GROUND = BlochVector(0.0, 0.0, -1.0)
PLUS_X = BlochVector(1.0, 0.0, 0.0)
UP_Z = BlochVector(0.0, 0.0, 1.0)


@pytest.fixture(scope="module")
def big_samples():
    """10^6 exact endpoint draws for each axis eigenstate, infinite horizon."""
    states = {
        "plus_x": PLUS_X,
        "minus_x": BlochVector(-1.0, 0.0, 0.0),
        "up_z": UP_Z,
        "down_z": GROUND,
    }
    return {k: sample_endpoints(rho, SimConfig(INF, 10**6, 100 + i)) for i, (k, rho) in enumerate(states.items())}


# --- configuration -----------------------------------------------------------


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(method="nope"),
        dict(n_samples=0),
        dict(seed=-1),
        dict(seed=2**64),
        dict(dt=0.0),
        dict(method="filter_paths", horizon=INF),
        dict(method="filter_paths", horizon=1.0, dt=0.02),
    ],
)
def test_config_rejects(kwargs):
    base = dict(horizon=8.0, n_samples=10, seed=1, method="endpoint_exact", dt=1e-3)
    base.update(kwargs)
    with pytest.raises(ValueError):
        SimConfig(**base)


def test_config_steps_and_horizon_coercion():
    cfg = SimConfig(8.0, 10, 1, "filter_paths", 1e-3)
    assert isinstance(cfg.horizon, TimeHorizon)
    assert cfg.n_steps == 8000


@pytest.mark.parametrize("raw, expected", [("1", 1), ("3", 3), (" 2 ", 2)])
def test_worker_count_parses(monkeypatch, raw, expected):
    monkeypatch.setenv("HPL_THREADS", raw)
    assert worker_count() == expected


@pytest.mark.parametrize("raw", ["0", ""])
def test_worker_count_automatic(monkeypatch, raw):
    monkeypatch.setenv("HPL_THREADS", raw)
    assert 1 <= worker_count() <= 8


@pytest.mark.parametrize("raw", ["-1", "two", "1.5"])
def test_worker_count_rejects(monkeypatch, raw):
    monkeypatch.setenv("HPL_THREADS", raw)
    with pytest.raises(ValueError):
        worker_count()


# --- counter-based uniforms --------------------------------------------------


def test_uniforms_independent_of_chunking():
    whole = counter_uniforms(7, 0, 1000)
    pieces = np.concatenate([counter_uniforms(7, s, n) for s, n in [(0, 3), (3, 250), (253, 1), (254, 746)]])
    np.testing.assert_array_equal(whole, pieces)
    assert np.all((whole >= 0) & (whole < 1))


def test_uniforms_depend_on_seed():
    assert not np.array_equal(counter_uniforms(1, 0, 100), counter_uniforms(2, 0, 100))


def test_uniforms_are_uniform():
    u = counter_uniforms(99, 0, 200_000)
    assert stats.kstest(u, "uniform").pvalue > 0.01


# --- exact endpoint sampler ----------------------------------------------------


def test_ground_state_is_standard_normal():
    n = 200_000
    s = sample_endpoints(GROUND, SimConfig(INF, n, 5))
    ks = stats.kstest(s.y, "norm")
    assert ks.statistic < 1.63 / math.sqrt(n)


def test_sample_mean_excited_quadrature(big_samples):
    y = big_samples["plus_x"].y
    se = y.std(ddof=1) / math.sqrt(len(y))
    assert abs(y.mean() - 1.0) < 4 * se


@pytest.mark.parametrize("t", [0.5, 2.513, 8.0])
def test_sample_mean_scales_with_beta(t):
    s = sample_endpoints(PLUS_X, SimConfig(t, 400_000, 9))
    beta = math.sqrt(-math.expm1(-t))
    se = s.y.std(ddof=1) / math.sqrt(len(s))
    assert abs(s.y.mean() - beta) < 4 * se


def test_chi_square_against_q(big_samples):
    for s in big_samples.values():
        assert chi_square_against_q(s.y, INF, s.rho).pvalue > 0.001


def test_chi_square_detects_wrong_state(big_samples):
    assert chi_square_against_q(big_samples["plus_x"].y, INF, GROUND).pvalue < 1e-10


def test_same_seed_same_samples():
    cfg = SimConfig(3.0, 50_000, 42)
    rho = BlochVector(0.2, -0.4, 0.1)
    np.testing.assert_array_equal(sample_endpoints(rho, cfg).y, sample_endpoints(rho, cfg).y)


def test_different_seeds_differ():
    a = sample_endpoints(PLUS_X, SimConfig(3.0, 1000, 1)).y
    b = sample_endpoints(PLUS_X, SimConfig(3.0, 1000, 2)).y
    assert not np.array_equal(a, b)


def test_sampler_chunk_independent():
    cfg = SimConfig(INF, 10_000, 8)
    np.testing.assert_array_equal(sample_endpoints(PLUS_X, cfg).y, sample_endpoints(PLUS_X, cfg, chunk=777).y)


def test_sampler_rejects_filter_config():
    with pytest.raises(ValueError):
        sample_endpoints(PLUS_X, SimConfig(1.0, 10, 1, "filter_paths", 1e-3))


# --- samples container -------------------------------------------------------


def test_container_interface():
    s = sample_endpoints(PLUS_X, SimConfig(INF, 5, 1))
    assert isinstance(s, EndpointSamples)
    assert len(s) == 5
    assert s[2].y == s.y[2]
    assert s[2].record is None
    assert [e.y for e in s] == list(s.y)
    assert np.all(np.isfinite(s.y))


def test_container_records_for_filter():
    cfg = SimConfig(1.0, 8, 3, "filter_paths", 1e-2)
    s = simulate_filter_paths(PLUS_X, cfg, keep_records=True)
    assert s.records.shape == (8, 100)
    assert s[3].record.shape == (100,)
    dt = 1e-2
    weights = np.exp(-0.5 * dt * (np.arange(100) + 0.5))
    beta = math.sqrt(-math.expm1(-1.0))
    np.testing.assert_allclose(s.records @ weights / beta, s.y, rtol=1e-12)


# --- filtered paths ----------------------------------------------------------


def test_dark_state_stays_ground():
    cfg = SimConfig(2.0, 2000, 4, "filter_paths", 1e-2)
    s = simulate_filter_paths(GROUND, cfg)
    assert np.all(s.final_quadrature == 0.0)
    assert np.all(s.max_bloch_norm == 1.0)
    # endpoint is a normalised Wiener integral
    assert stats.kstest(s.y, "norm").pvalue > 0.01


def test_unconditional_mean_follows_semigroup():
    t = 1.0
    rho = BlochVector(0.8, 0.3, 0.2)
    s = simulate_filter_paths(rho, SimConfig(t, 8192, 12, "filter_paths", 1e-3))
    se = s.final_quadrature.std(ddof=1) / math.sqrt(len(s))
    assert abs(s.final_quadrature.mean() - math.exp(-0.5 * t) * rho.px) < 4 * se + 1e-3


def test_filter_stays_in_bloch_ball():
    rho = BlochVector(0.6, 0.0, 0.8)
    s = simulate_filter_paths(rho, SimConfig(4.0, 2000, 2, "filter_paths", 1e-2))
    assert s.max_bloch_norm.max() <= 1.0 + 1e-6


def test_filter_deterministic():
    cfg = SimConfig(1.0, 300, 77, "filter_paths", 1e-2)
    rho = BlochVector(0.3, 0.1, -0.2)
    a, b = simulate_filter_paths(rho, cfg), simulate_filter_paths(rho, cfg)
    np.testing.assert_array_equal(a.y, b.y)
    c = simulate_filter_paths(rho, SimConfig(1.0, 300, 78, "filter_paths", 1e-2))
    assert not np.array_equal(a.y, c.y)


@pytest.mark.parametrize("threads", ["1", "3"])
@pytest.mark.parametrize("block", [64, 100, 4096])
def test_filter_independent_of_blocks_and_workers(monkeypatch, threads, block):
    cfg = SimConfig(1.0, 300, 5, "filter_paths", 1e-2)
    rho = BlochVector(0.5, 0.0, 0.5)
    monkeypatch.setenv("HPL_THREADS", "1")
    reference = simulate_filter_paths(rho, cfg).y
    monkeypatch.setattr(sim, "PATH_BLOCK", block)
    monkeypatch.setenv("HPL_THREADS", threads)
    np.testing.assert_array_equal(simulate_filter_paths(rho, cfg).y, reference)


def test_filter_prefix_stable():
    rho = BlochVector(0.5, 0.0, 0.5)
    short = simulate_filter_paths(rho, SimConfig(1.0, 50, 5, "filter_paths", 1e-2)).y
    long = simulate_filter_paths(rho, SimConfig(1.0, 200, 5, "filter_paths", 1e-2)).y
    np.testing.assert_array_equal(long[:50], short)


def test_rejected_step_is_halved_and_recovers(monkeypatch):
    original = sim._kraus_step
    calls = {"n": 0}

    def flaky(a, cr, ci, dy, dt):
        a1, cr1, ci1 = original(a, cr, ci, dy, dt)
        calls["n"] += 1
        if calls["n"] == 10:
            a1 = a1.copy()
            a1[0] = 2.0
        return a1, cr1, ci1

    monkeypatch.setattr(sim, "_kraus_step", flaky)
    s = simulate_filter_paths(PLUS_X, SimConfig(1.0, 16, 3, "filter_paths", 1e-2))
    assert s.rejected_steps == 1
    assert s.max_bloch_norm.max() <= 1.0 + 1e-6
    assert np.all(np.isfinite(s.y))


def test_retry_budget_exhausted(monkeypatch):
    def broken(a, cr, ci, dy, dt):
        return np.full_like(a, 2.0), cr, ci

    monkeypatch.setattr(sim, "_kraus_step", broken)
    with pytest.raises(SimulationError):
        simulate_filter_paths(PLUS_X, SimConfig(1.0, 4, 3, "filter_paths", 1e-2))


def test_kraus_step_preserves_trace_and_positivity(rng):
    from conftest import random_bloch

    states = random_bloch(rng, 500)
    dms = np.array([r.density_matrix() for r in states])
    a, cr, ci = dms[:, 0, 0].real, dms[:, 0, 1].real, dms[:, 0, 1].imag
    dy = rng.normal(scale=0.3, size=len(a))
    a1, cr1, ci1 = sim._kraus_step(a, cr, ci, dy, 1e-2)
    det = a1 * (1.0 - a1) - (cr1**2 + ci1**2)
    assert np.all(det >= -1e-12)
    assert np.all((a1 >= 0) & (a1 <= 1))


@pytest.mark.slow
def test_filter_endpoint_chi_square_against_q():
    rho = BlochVector(0.6, 0.0, 0.5)
    cfg = SimConfig(8.0, 100_000, 32, "filter_paths", 1e-3)
    s = simulate_filter_paths(rho, cfg)
    assert chi_square_against_q(s.y, cfg.horizon, rho).pvalue > 0.01


def test_filter_endpoint_ks_small():
    rho = BlochVector(0.6, 0.0, 0.5)
    cfg = SimConfig(4.0, 8192, 13, "filter_paths", 2e-3)
    s = simulate(rho, cfg)
    assert ks_against_q(s.y, cfg.horizon, rho).pvalue > 0.01


def test_simulate_dispatch():
    s = simulate(PLUS_X, SimConfig(INF, 100, 1))
    np.testing.assert_array_equal(s.y, sample_endpoints(PLUS_X, SimConfig(INF, 100, 1)).y)


# --- empirical qualities -------------------------------------------------------


def test_empirical_mean_x(big_samples):
    mean, _ = empirical_quality(big_samples["plus_x"], optimal_pointer("x", INF), PLUS_X, SIGMA_X)
    assert mean == pytest.approx(1.0, abs=0.005)


def test_empirical_mean_z(big_samples):
    mean, _ = empirical_quality(big_samples["up_z"], optimal_pointer("z", INF), UP_Z, SIGMA_Z)
    assert mean == pytest.approx(1.0, abs=0.01)


def _added_variance(samples, h, target):
    v = h(samples.y)
    var = v.var(ddof=1)
    se = math.sqrt(np.mean((v - v.mean()) ** 4) - var**2) / math.sqrt(len(v))
    return var - state_variance(samples.rho, target), se


def test_worst_added_variance_x(big_samples):
    hx = optimal_pointer("x", INF)
    worst = max((_added_variance(s, hx, SIGMA_X) for s in big_samples.values()), key=lambda p: p[0])
    assert worst[0] <= 0.470 + 3 * worst[1]
    # and the bound is attained rather than trivially satisfied
    assert worst[0] > 0.470 - 5 * worst[1] - 0.002


def test_empirical_joint_bound(big_samples):
    hx, hz = optimal_pointer("x", INF), optimal_pointer("z", INF)
    ax = max((_added_variance(s, hx, SIGMA_X) for s in big_samples.values()), key=lambda p: p[0])
    az = max((_added_variance(s, hz, SIGMA_Z) for s in big_samples.values()), key=lambda p: p[0])
    product = math.sqrt(ax[0] * az[0])
    # first-order error propagation
    tol = 3 * product * 0.5 * math.hypot(ax[1] / ax[0], az[1] / az[0])
    assert product >= 1.0 - tol


def test_state_variance():
    assert state_variance(PLUS_X, SIGMA_X) == pytest.approx(0.0, abs=1e-15)
    assert state_variance(PLUS_X, SIGMA_Z) == pytest.approx(1.0)
    assert state_variance(BlochVector(0.0, 0.0, 0.6), SIGMA_Z) == pytest.approx(0.64)


def test_empirical_quality_needs_samples():
    with pytest.raises(ValueError):
        empirical_quality(np.zeros(999), optimal_pointer("x", INF), PLUS_X, SIGMA_X)


def test_empirical_quality_accepts_arrays(big_samples):
    s = big_samples["plus_x"]
    hx = optimal_pointer("x", INF)
    assert empirical_quality(s.y, hx, PLUS_X, SIGMA_X) == empirical_quality(s, hx, PLUS_X, SIGMA_X)
