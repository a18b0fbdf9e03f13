"""Law of the normalised weighted-path endpoint

    Y_t = (1 - e^{-t})^{-1/2} int_0^t e^{-tau/2} (dA_tau + dA_tau^*).

Everything here is in the normalised variable ``y``; the characteristic
function :func:`characteristic_matrix` is the one exception and refers to the
un-normalised endpoint (variance ``1 - e^{-t}`` in the ground state).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .qubit import EXCITED, IDENTITY, QUADRATURE, BlochVector
from .special import SQRT_2PI

# clamp threshold for round-off negatives in densities
CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class TimeHorizon:
    """Measurement duration ``t`` and the derived ``beta = sqrt(1 - e^{-t})``.

    ``t = math.inf`` is the infinite-horizon limit and has ``beta == 1``
    exactly.
    """

    t: float

    def __post_init__(self):
        t = float(self.t)
        if not t >= 0.0:
            raise ValueError(f"horizon must be non-negative, got {self.t}")
        object.__setattr__(self, "t", t)

    @classmethod
    def infinite(cls) -> "TimeHorizon":
        return cls(math.inf)

    @classmethod
    def from_beta(cls, beta: float) -> "TimeHorizon":
        if not 0.0 <= beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {beta}")
        if beta == 1.0:
            return cls.infinite()
        return cls(-math.log1p(-beta * beta))

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.t)

    @property
    def beta(self) -> float:
        if self.is_infinite:
            return 1.0
        return math.sqrt(-math.expm1(-self.t))

    @property
    def beta_sq(self) -> float:
        if self.is_infinite:
            return 1.0
        return -math.expm1(-self.t)


def as_horizon(horizon) -> TimeHorizon:
    """Accept a :class:`TimeHorizon` or a bare time."""
    if isinstance(horizon, TimeHorizon):
        return horizon
    return TimeHorizon(horizon)


def characteristic_matrix(k: float, t: float) -> np.ndarray:
    """F_k(I) = E[exp(-i k Y_t)] as a matrix, un-normalised endpoint.

    F_k(I) = e^{-k^2 g/2} (I - i k g (s- + s+) - k^2 g^2 s+s-),  g = 1 - e^{-t}.
    """
    g = 1.0 if math.isinf(t) else -math.expm1(-t)
    return math.exp(-0.5 * k * k * g) * (
        IDENTITY - 1j * k * g * QUADRATURE - (k * g) ** 2 * EXCITED
    )


def _fk_rhs(s: float, state: np.ndarray, k: float) -> np.ndarray:
    f_i, f_q, f_e = state
    a = math.exp(-0.5 * s)
    damp = 0.5 * k * k * math.exp(-s)
    return np.array(
        [
            -1j * k * a * f_q - damp * f_i,
            -0.5 * f_q - 2j * k * a * f_e - damp * f_q,
            -f_e - damp * f_e,
        ]
    )


def ode_oracle_Fk(k: float, t: float, steps: int = 1000, full: bool = False):
    """RK4 integration of the coupled system for F_k(I), F_k(s- + s+) and
    F_k(s+ s-) from their initial values I, s- + s+, s+ s-.

    Returns F_k(I), or all three matrices when ``full`` is set.
    """
    if steps < 100:
        raise ValueError("steps must be at least 100")
    if t < 0:
        raise ValueError("t must be non-negative")
    state = np.array([IDENTITY, QUADRATURE, EXCITED], dtype=complex)
    h = t / steps
    s = 0.0
    for _ in range(steps):
        k1 = _fk_rhs(s, state, k)
        k2 = _fk_rhs(s + 0.5 * h, state + 0.5 * h * k1, k)
        k3 = _fk_rhs(s + 0.5 * h, state + 0.5 * h * k2, k)
        k4 = _fk_rhs(s + h, state + h * k3, k)
        state = state + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        s += h
    if full:
        return state[0], state[1], state[2]
    return state[0]


def gaussian_pdf(y):
    y = np.asarray(y, dtype=float)
    return np.exp(-0.5 * y * y) / SQRT_2PI


def matrix_density_p(y, horizon) -> np.ndarray:
    """Matrix density of the normalised endpoint,

    p(y) = phi(y) (I + beta y (s- + s+) + beta^2 (y^2 - 1) s+ s-).

    Vectorised: an input of shape ``S`` gives an output of shape ``S + (2, 2)``.
    """
    hz = as_horizon(horizon)
    y = np.asarray(y, dtype=float)
    b = hz.beta
    phi = gaussian_pdf(y)[..., None, None]
    yy = y[..., None, None]
    return phi * (IDENTITY + b * yy * QUADRATURE + hz.beta_sq * (yy * yy - 1.0) * EXCITED)


def scalar_density_q(y, horizon, rho: BlochVector):
    """Density of the normalised endpoint in state ``rho``,

    q(y) = phi(y) (1 + beta y Px + beta^2 (y^2 - 1)(Pz + 1)/2).

    Independent of Py.  Round-off negatives above ``-CLAMP_TOL`` are clamped
    to zero.
    """
    hz = as_horizon(horizon)
    y = np.asarray(y, dtype=float)
    val = gaussian_pdf(y) * (
        1.0 + hz.beta * y * rho.px + hz.beta_sq * (y * y - 1.0) * rho.excited_population
    )
    val = np.where((val < 0) & (val > -CLAMP_TOL), 0.0, val)
    return float(val) if val.ndim == 0 else val


def scalar_cdf_q(y, horizon, rho: BlochVector):
    """Cumulative distribution of :func:`scalar_density_q` in closed form:
    Phi(y) - phi(y) (beta Px + beta^2 y (Pz + 1)/2)."""
    hz = as_horizon(horizon)
    y = np.asarray(y, dtype=float)
    yf = np.where(np.isfinite(y), y, 0.0)
    tail = gaussian_pdf(yf) * (hz.beta * rho.px + hz.beta_sq * yf * rho.excited_population)
    val = ndtr(y) - np.where(np.isfinite(y), tail, 0.0)
    val = np.clip(val, 0.0, 1.0)
    return float(val) if val.ndim == 0 else val


def density_from_characteristic(y, t: float, k_max: float = 40.0, n_k: int = 8001) -> np.ndarray:
    """Recover p(y) by trapezoidal Fourier inversion of F_k(I).

    Validation route only.  The un-normalised density is
    (1/2pi) int F_k(I) e^{ikx} dk, evaluated at x = beta y and rescaled by beta.
    """
    hz = as_horizon(t)
    b = hz.beta
    g = hz.beta_sq
    k = np.linspace(-k_max, k_max, n_k)
    envelope = np.exp(-0.5 * k * k * g)
    coeff_i = envelope
    coeff_q = -1j * k * g * envelope
    coeff_e = -(k * g) ** 2 * envelope
    y = np.atleast_1d(np.asarray(y, dtype=float))
    phase = np.exp(1j * np.outer(b * y, k))
    integ = lambda c: np.trapezoid(phase * c, k, axis=1) / (2.0 * math.pi)  # noqa: E731
    ci, cq, ce = integ(coeff_i), integ(coeff_q), integ(coeff_e)
    out = b * (
        ci[:, None, None] * IDENTITY + cq[:, None, None] * QUADRATURE + ce[:, None, None] * EXCITED
    )
    return out
