"""Quality of unbiased pointers: sigma^2 = || M(h^2) - M(h)^2 ||.

For a pointer ``h`` of the normalised endpoint, ``M(h^k) = int h^k p``.  The
two diagonal entries of ``M(h^2) - X^2`` are reported as ``d1`` (entry
(0, 0), the excited-state / s+s- weighted one) and ``d2`` (entry (1, 1)).

Pointers of the raw photocurrent (the naive choices) are handled by
integrating the moment equations

    dF_m(X)/dt = F_m(L(X)) + f m F_{m-1}(s+ X + X s-) + f^2 m(m-1)/2 F_{m-2}(X)

for ``F_m(X) = M(X w^m)``, with weight ``f``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .endpoint import TimeHorizon, as_horizon, matrix_density_p
from .pointers import NaiveLinear, NaiveQuadratic, PointerFunction
from .qubit import EXCITED, IDENTITY, SIGMA_MINUS, SIGMA_PLUS, commutator, operator_norm
from .special import SQRT_2PI, adaptive_quadrature, integral_I, integral_J

UNBIASED_TOL = 1e-8
HEISENBERG_TOL = 1e-9

_MOMENT_NAMES = ("identity", "quadrature (s- + s+)", "excited (s+ s-)")


class BiasedPointerError(ValueError):
    """The pointer's first moment does not reproduce the target observable."""


class HeisenbergViolation(AssertionError):
    """sigma * sigma~ fell below the joint-measurement bound: an implementation bug."""


@dataclass(frozen=True)
class QualityReport:
    d1: float
    d2: float
    pointer: PointerFunction
    horizon: TimeHorizon
    target: np.ndarray | None = None

    @property
    def sigma_sq(self) -> float:
        return max(self.d1, self.d2)

    @property
    def sigma(self) -> float:
        return math.sqrt(max(self.sigma_sq, 0.0))


# --- raw-photocurrent moments ------------------------------------------------


def _vec_superop(left, right) -> np.ndarray:
    # vec(A X B) = (B^T kron A) vec(X), column-major vec
    return np.kron(np.asarray(right).T, np.asarray(left))


_L_SUPER = (
    -0.5 * (_vec_superop(EXCITED, IDENTITY) + _vec_superop(IDENTITY, EXCITED))
    + _vec_superop(SIGMA_PLUS, SIGMA_MINUS)
)
_R_SUPER = _vec_superop(SIGMA_PLUS, IDENTITY) + _vec_superop(IDENTITY, SIGMA_MINUS)


def _vec(m) -> np.ndarray:
    return np.asarray(m, dtype=complex).reshape(-1, order="F")


def _unvec(v) -> np.ndarray:
    return np.asarray(v).reshape(2, 2, order="F")


def path_moments(n: int, t: float, weight: str = "flat", steps: int = 1000) -> list[np.ndarray]:
    """Matrix moments ``M(W^m)``, m = 0..n, of the weighted path
    ``W = int_0^t f(s) (dA_s + dA_s^*)`` by RK4 on the moment equations.

    ``weight`` is ``"flat"`` (f = 1, the raw photocurrent) or ``"exp"``
    (f = e^{-s/2}, the un-normalised weighted endpoint).
    """
    if weight == "flat":
        f = lambda s: 1.0  # noqa: E731
    elif weight == "exp":
        f = lambda s: math.exp(-0.5 * s)  # noqa: E731
    else:
        raise ValueError(f"unknown weight {weight!r}")
    if n < 0 or t < 0:
        raise ValueError("need n >= 0 and t >= 0")

    def rhs(s, g):
        fs = f(s)
        out = np.empty_like(g)
        for m in range(n + 1):
            acc = g[m] @ _L_SUPER
            if m >= 1:
                acc = acc + fs * m * (g[m - 1] @ _R_SUPER)
            if m >= 2:
                acc = acc + fs * fs * 0.5 * m * (m - 1) * g[m - 2]
            out[m] = acc
        return out

    g = np.zeros((n + 1, 4, 4), dtype=complex)
    g[0] = np.eye(4)
    h = t / steps
    s = 0.0
    for _ in range(steps):
        k1 = rhs(s, g)
        k2 = rhs(s + 0.5 * h, g + 0.5 * h * k1)
        k3 = rhs(s + 0.5 * h, g + 0.5 * h * k2)
        k4 = rhs(s + h, g + h * k3)
        g = g + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        s += h
    vi = _vec(IDENTITY)
    return [_unvec(g[m] @ vi) for m in range(n + 1)]


def _raw_moment_matrix(h: PointerFunction, power: int) -> np.ndarray:
    coeffs = np.polynomial.polynomial.polypow(h.polynomial(), power)
    moments = path_moments(len(coeffs) - 1, h.t, "flat")
    return sum(c * m for c, m in zip(coeffs, moments))


# --- moments and quality -----------------------------------------------------


def moment_matrix(h: PointerFunction, power: int, horizon=None, tol: float = 1e-12) -> np.ndarray:
    """M(h^power) = int h(y)^power p(y) dy for power in {1, 2}.

    Raw-photocurrent pointers carry their own time and ignore ``horizon``.
    """
    if power not in (1, 2):
        raise ValueError("power must be 1 or 2")
    if h.variable == "raw":
        return _raw_moment_matrix(h, power)
    hz = as_horizon(horizon)

    def f(y):
        return h(y) ** power * matrix_density_p(y, hz).real

    # round-off bounds the attainable relative accuracy for sharply peaked h
    res = adaptive_quadrature(f, -np.inf, np.inf, tol=tol, rel_tol=1e-10, points=h.breakpoints or None)
    return np.asarray(res.value, dtype=complex)


def _pointer_horizon(h: PointerFunction, horizon) -> TimeHorizon:
    if h.variable == "raw":
        return TimeHorizon(h.t)
    if horizon is None:
        raise ValueError("a horizon is required for pointers of the normalised endpoint")
    return as_horizon(horizon)


def quality(h: PointerFunction, target, horizon=None) -> QualityReport:
    """Worst-case added variance of an unbiased pointer for ``target``.

    Raises
    ------
    BiasedPointerError
        If any of the three first-moment components misses the target by
        more than ``UNBIASED_TOL``.
    """
    hz = _pointer_horizon(h, horizon)
    target = np.asarray(target, dtype=complex)
    m1 = moment_matrix(h, 1, hz)
    diff = m1 - target
    comps = (abs(diff[1, 1]), abs(diff[0, 1]) + abs(diff[1, 0]), abs(diff[0, 0] - diff[1, 1]))
    for name, c in zip(_MOMENT_NAMES, comps):
        if c > UNBIASED_TOL:
            raise BiasedPointerError(f"pointer {h!r} is biased in the {name} moment by {c:.3g}")
    m2 = moment_matrix(h, 2, hz)
    d = m2 - target @ target
    return QualityReport(float(d[0, 0].real), float(d[1, 1].real), h, hz, target)


def added_variance_matrix(report: QualityReport) -> np.ndarray:
    """M(h^2) - X^2 recomputed from the report's pointer."""
    m2 = moment_matrix(report.pointer, 2, report.horizon)
    return m2 - report.target @ report.target


# --- closed forms ------------------------------------------------------------


def rational_x_d(eps: float, beta: float = 1.0) -> tuple[float, float]:
    """(d1, d2) of the unbiased x pointer as functions of eps."""
    i_e = integral_I(eps)
    j_e = integral_J(eps)
    c1 = SQRT_2PI / (beta * (SQRT_2PI - eps * i_e))
    d2 = c1 * c1 / SQRT_2PI * (i_e - eps * j_e) - 1.0
    d1 = (
        c1 * c1 * beta * beta / SQRT_2PI
        * (SQRT_2PI - (1.0 + 2.0 * eps) * i_e + eps * (1.0 + eps) * j_e)
        + d2
    )
    return d1, d2


def rational_z_d(delta: float, beta: float = 1.0) -> tuple[float, float]:
    """(d1, d2) of the unbiased z pointer as functions of delta.

    With g = 1/(y^2 + delta), Gaussian moments E[g] = I/sqrt(2pi),
    E[g^2] = J/sqrt(2pi) and (y^2 - 1) = (y^2 + delta) - (1 + delta).
    """
    i_d = integral_I(delta)
    j_d = integral_J(delta)
    d2c = 2.0 * SQRT_2PI / (beta**2 * (SQRT_2PI - (1.0 + delta) * i_d))
    d3c = -(SQRT_2PI + i_d * d2c) / SQRT_2PI
    eg = i_d / SQRT_2PI
    eg2 = j_d / SQRT_2PI
    second = d2c * d2c * eg2 + 2.0 * d2c * d3c * eg + d3c * d3c
    second_exc = d2c * d2c * (eg - (1.0 + delta) * eg2) + 2.0 * d2c * d3c * (1.0 - (1.0 + delta) * eg)
    d2 = second - 1.0
    d1 = d2 + beta**2 * second_exc
    return d1, d2


def naive_quality_x(t: float) -> float:
    """t / (2 - 2 e^{-t/2})^2 + 1 for the flat-weighted linear pointer."""
    if not t > 0:
        raise ValueError("t must be positive")
    return t / (2.0 * math.expm1(-0.5 * t)) ** 2 + 1.0


def naive_quality_z(t: float) -> float:
    """t^2 / (8 a^4) + (2 t - 4 a^2) / a^2 with a = e^{-t/2} - 1."""
    if not t > 0:
        raise ValueError("t must be positive")
    a = math.expm1(-0.5 * t)
    return t * t / (8.0 * a**4) + (2.0 * t - 4.0 * a * a) / (a * a)


def heisenberg_check(report_x: QualityReport, report_z: QualityReport) -> float:
    """Return sigma * sigma~ after checking 2 sigma sigma~ >= ||[X, X~]||."""
    product = report_x.sigma * report_z.sigma
    if report_x.target is not None and report_z.target is not None:
        bound = 0.5 * operator_norm(1j * commutator(report_x.target, report_z.target))
    else:
        bound = 1.0
    if product < bound - HEISENBERG_TOL:
        raise HeisenbergViolation(f"sigma * sigma~ = {product:.12g} < {bound:.12g}")
    return product
