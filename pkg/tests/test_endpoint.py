import math

import numpy as np
import pytest

from conftest import random_bloch
from homodyne_pointer_lab.endpoint import (
    TimeHorizon,
    characteristic_matrix,
    density_from_characteristic,
    gaussian_pdf,
    matrix_density_p,
    ode_oracle_Fk,
    scalar_cdf_q,
    scalar_density_q,
)
from homodyne_pointer_lab.qubit import EXCITED, IDENTITY, QUADRATURE, BlochVector, hermitian_eigenvalues
from homodyne_pointer_lab.special import adaptive_quadrature

Y = np.linspace(-12, 12, 4801)
DY = Y[1] - Y[0]


def test_horizon():
    assert TimeHorizon.infinite().beta == 1.0
    assert TimeHorizon(0).beta == 0.0
    assert TimeHorizon(8).beta_sq == pytest.approx(1 - math.exp(-8))
    assert TimeHorizon.from_beta(0.9).beta == pytest.approx(0.9, rel=1e-15)
    assert TimeHorizon.from_beta(1.0).is_infinite
    with pytest.raises(ValueError):
        TimeHorizon(-1)


@pytest.mark.parametrize("t", [0.0, 0.5, 3.0])
def test_characteristic_at_zero_k(t):
    assert np.allclose(characteristic_matrix(0.0, t), IDENTITY)


def test_characteristic_at_zero_t():
    assert np.allclose(characteristic_matrix(2.7, 0.0), IDENTITY)


def test_characteristic_infinite_limit():
    expected = math.exp(-0.5) * (IDENTITY - 1j * QUADRATURE - EXCITED)
    assert np.max(np.abs(characteristic_matrix(1.0, 30.0) - expected)) < 1e-10


def test_ode_oracle_at_zero_k():
    assert np.max(np.abs(ode_oracle_Fk(0.0, 1.0, 1000) - IDENTITY)) < 1e-9
    _, _, f_e = ode_oracle_Fk(0.0, 1.7, 1000, full=True)
    assert np.max(np.abs(f_e - math.exp(-1.7) * EXCITED)) < 1e-12


def test_ode_oracle_self_consistency():
    assert np.max(np.abs(ode_oracle_Fk(1.3, 2.0, 10_000) - characteristic_matrix(1.3, 2.0))) < 1e-7


def test_ode_oracle_needs_steps():
    with pytest.raises(ValueError):
        ode_oracle_Fk(1.0, 1.0, 50)


@pytest.mark.parametrize("t", [0.3, 2.513, math.inf])
def test_p_moments(t):
    hz = TimeHorizon(t)
    p = matrix_density_p(Y, hz)
    assert np.max(np.abs(np.trapezoid(p, dx=DY, axis=0) - IDENTITY)) < 1e-9
    first = np.trapezoid(Y[:, None, None] * p, dx=DY, axis=0)
    assert np.max(np.abs(first - hz.beta * QUADRATURE)) < 1e-9


def test_p_normalisation_by_quadrature():
    res = adaptive_quadrature(lambda y: matrix_density_p(y, 1.0).real, -np.inf, np.inf)
    assert np.max(np.abs(res.value - IDENTITY)) < 1e-9


def test_p_at_origin():
    hz = TimeHorizon(1.2)
    assert matrix_density_p(0.0, hz)[1, 1].real == pytest.approx(1 / math.sqrt(2 * math.pi))
    assert matrix_density_p(0.0, hz)[0, 0].real == pytest.approx((1 - hz.beta_sq) / math.sqrt(2 * math.pi))


def test_p_is_positive():
    y = np.linspace(-8, 8, 801)
    for t in np.linspace(0.01, 20, 50):
        p = matrix_density_p(y, t)
        assert min(hermitian_eigenvalues(m)[0] for m in p) >= -1e-10
    p = matrix_density_p(y, TimeHorizon.infinite())
    assert min(hermitian_eigenvalues(m)[0] for m in p) >= -1e-10


def test_q_ground_state_is_gaussian():
    q = scalar_density_q(Y, TimeHorizon(3.0), BlochVector(0, 0, -1))
    assert np.array_equal(q, gaussian_pdf(Y))


def test_q_normalised_nonnegative_and_moments(rng):
    y = np.linspace(-8, 8, 1601)
    for rho in random_bloch(rng, 500) + random_bloch(rng, 500, pure=True):
        t = rng.uniform(0.05, 10)
        hz = TimeHorizon(t)
        q = scalar_density_q(Y, hz, rho)
        assert abs(np.trapezoid(q, dx=DY) - 1) < 1e-9
        assert scalar_density_q(y, hz, rho).min() >= -1e-12
    rho = BlochVector(0.4, 0.1, -0.3)
    hz = TimeHorizon(2.0)
    q = scalar_density_q(Y, hz, rho)
    assert np.trapezoid(Y * q, dx=DY) == pytest.approx(hz.beta * rho.px, abs=1e-9)
    assert np.trapezoid((Y**2 - 1) * q, dx=DY) == pytest.approx(hz.beta_sq * (rho.pz + 1), abs=1e-9)


def test_q_does_not_depend_on_py(rng):
    for _ in range(100):
        px, pz = rng.uniform(-0.6, 0.6, 2)
        a = scalar_density_q(Y, 1.5, BlochVector(px, 0.5, pz))
        b = scalar_density_q(Y, 1.5, BlochVector(px, -0.3, pz))
        assert np.array_equal(a, b)


def test_q_mirror_symmetry():
    hz = TimeHorizon.infinite()
    a = scalar_density_q(Y, hz, BlochVector(1, 0, 0))
    b = scalar_density_q(-Y, hz, BlochVector(-1, 0, 0))
    assert np.allclose(a, b, atol=1e-17)


def test_cdf_matches_density(rng):
    rho = BlochVector(0.7, 0, 0.6)
    hz = TimeHorizon(4.0)
    y = np.linspace(-6, 6, 13)
    for a, b in zip(y[:-1], y[1:]):
        mass = adaptive_quadrature(lambda v: scalar_density_q(v, hz, rho), a, b).value
        assert scalar_cdf_q(b, hz, rho) - scalar_cdf_q(a, hz, rho) == pytest.approx(mass, abs=1e-13)
    ends = scalar_cdf_q(np.array([-np.inf, np.inf]), hz, rho)
    assert ends.tolist() == [0.0, 1.0]


def test_fourier_inversion_recovers_p():
    y = np.linspace(-4, 4, 20)
    for t in (0.7, 3.0):
        assert np.max(np.abs(density_from_characteristic(y, t) - matrix_density_p(y, t))) < 1e-5
