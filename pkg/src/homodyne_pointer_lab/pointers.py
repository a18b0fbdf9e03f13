"""Pointer functions: post-processing maps ``h`` applied to the endpoint.

Two families act on the normalised endpoint ``y`` and are reduced to their
unbiased sub-families:

* :class:`RationalX` ``h(y) = c1 y / (y^2 + eps)`` (sigma_x pointer)
* :class:`RationalZ` ``h(y) = d2 / (y^2 + delta) + d3`` (sigma_z pointer)

together with the polynomial limits :class:`Linear` and :class:`Quadratic`.
:class:`NaiveLinear` and :class:`NaiveQuadratic` instead act on the raw
integrated photocurrent ``w`` at time ``t`` (flat weighting).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .qubit import SIGMA_X, SIGMA_Z, as_hermitian
from .special import SQRT_2PI, adaptive_quadrature, integral_I

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-9
DEGENERATE_TOL = 1e-12


class ConstraintError(ValueError):
    """The unbiasedness constraints cannot be solved (degenerate family)."""


class PointerFunction:
    """Base class; subclasses are frozen dataclasses and callable."""

    #: "normalized" pointers act on Y_t, "raw" ones on the flat photocurrent
    variable = "normalized"

    def __call__(self, y):
        raise NotImplementedError

    def derivative(self, y):
        raise NotImplementedError

    @property
    def family(self) -> str:
        return type(self).__name__

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Abscissae of sharp features, for quadrature."""
        return ()


def _as_float_array(y):
    return np.asarray(y, dtype=float)


def _scalarize(out, y):
    return float(out) if np.ndim(y) == 0 else out


@dataclass(frozen=True)
class NaiveLinear(PointerFunction):
    """w / (2 - 2 e^{-t/2}), acting on the raw photocurrent at time t."""

    t: float
    variable = "raw"

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError("naive pointers need t > 0")

    @property
    def scale(self) -> float:
        return 1.0 / (-2.0 * math.expm1(-0.5 * self.t))

    def __call__(self, w):
        return _scalarize(_as_float_array(w) * self.scale, w)

    def polynomial(self) -> np.ndarray:
        """Coefficients in increasing powers of w."""
        return np.array([0.0, self.scale])


@dataclass(frozen=True)
class NaiveQuadratic(PointerFunction):
    """(w^2 - t) / (4 (e^{-t/2} - 1)^2) - 1, acting on the raw photocurrent."""

    t: float
    variable = "raw"

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError("naive pointers need t > 0")

    def polynomial(self) -> np.ndarray:
        c = 1.0 / (4.0 * math.expm1(-0.5 * self.t) ** 2)
        return np.array([-self.t * c - 1.0, 0.0, c])

    def __call__(self, w):
        return _scalarize(np.polynomial.polynomial.polyval(_as_float_array(w), self.polynomial()), w)


@dataclass(frozen=True)
class Linear(PointerFunction):
    """y / beta: unbiased for sigma_x."""

    beta: float

    def __post_init__(self):
        if not 0 < self.beta <= 1:
            raise ValueError("beta must lie in (0, 1]")

    def __call__(self, y):
        return _scalarize(_as_float_array(y) / self.beta, y)

    def derivative(self, y):
        return _scalarize(np.full_like(_as_float_array(y), 1.0 / self.beta), y)


@dataclass(frozen=True)
class Quadratic(PointerFunction):
    """y^2 / beta^2 - 1 - 1/beta^2: unbiased for sigma_z."""

    beta: float

    def __post_init__(self):
        if not 0 < self.beta <= 1:
            raise ValueError("beta must lie in (0, 1]")

    @property
    def coefficients(self) -> tuple[float, float, float]:
        """(D4, D5, D6) of D4 y^2 + D5 y + D6."""
        b2 = self.beta**2
        return 1.0 / b2, 0.0, -1.0 - 1.0 / b2

    def __call__(self, y):
        d4, _, d6 = self.coefficients
        y = _as_float_array(y)
        return _scalarize(d4 * y * y + d6, y)

    def derivative(self, y):
        return _scalarize(2.0 * self.coefficients[0] * _as_float_array(y), y)


@dataclass(frozen=True)
class RationalX(PointerFunction):
    """c1 y / (y^2 + eps); odd, bounded by c1 / (2 sqrt(eps))."""

    c1: float
    eps: float

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive (pole-free on the real line)")

    @classmethod
    def unbiased(cls, eps: float, beta: float = 1.0) -> "RationalX":
        return solve_unbiased_x(eps, beta).pointer

    @property
    def breakpoints(self) -> tuple[float, ...]:
        r = math.sqrt(self.eps)
        return (-r, 0.0, r)

    @property
    def peak(self) -> float:
        """max h = c1 / (2 sqrt(eps)), attained at y = sqrt(eps)."""
        return abs(self.c1) / (2.0 * math.sqrt(self.eps))

    def __call__(self, y):
        y = _as_float_array(y)
        with np.errstate(over="ignore", invalid="ignore"):
            out = self.c1 * y / (y * y + self.eps)
        out = np.where(np.isinf(y), 0.0, out)
        return _scalarize(out, y)

    def derivative(self, y):
        y = _as_float_array(y)
        y2 = y * y
        with np.errstate(over="ignore", invalid="ignore"):
            out = self.c1 * (self.eps - y2) / (y2 + self.eps) ** 2
        out = np.where(np.isinf(y), 0.0, out)
        return _scalarize(out, y)


@dataclass(frozen=True)
class RationalZ(PointerFunction):
    """(d1 y + d2) / (y^2 + delta) + d3 with d1 = 0 (the unbiased branch)."""

    d1: float
    d2: float
    d3: float
    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive (pole-free on the real line)")
        if self.d1 != 0.0:
            raise ValueError("only the d1 = 0 branch of the z family is supported")

    @classmethod
    def unbiased(cls, delta: float, beta: float = 1.0) -> "RationalZ":
        return solve_unbiased_z(delta, beta).pointer

    @property
    def breakpoints(self) -> tuple[float, ...]:
        r = math.sqrt(self.delta)
        return (-r, 0.0, r)

    @property
    def support(self) -> tuple[float, float]:
        """Closed range of h over the real line."""
        a, b = self.d3 + self.d2 / self.delta, self.d3
        return (min(a, b), max(a, b))

    def __call__(self, y):
        y = _as_float_array(y)
        with np.errstate(over="ignore", invalid="ignore"):
            out = (self.d1 * y + self.d2) / (y * y + self.delta) + self.d3
        out = np.where(np.isinf(y), self.d3, out)
        return _scalarize(out, y)

    def derivative(self, y):
        y = _as_float_array(y)
        y2 = y * y
        with np.errstate(over="ignore", invalid="ignore"):
            out = (self.d1 * (self.delta - y2) - 2.0 * self.d2 * y) / (y2 + self.delta) ** 2
        out = np.where(np.isinf(y), 0.0, out)
        return _scalarize(out, y)


def evaluate(h: PointerFunction, y):
    """Evaluate pointer ``h`` at ``y`` (scalar or array)."""
    return h(y)


# --- unbiasedness ----------------------------------------------------------


def target_coefficients(target) -> tuple[float, float, float]:
    """Decompose a real symmetric target as a I + b (s- + s+) + c s+s-.

    Raises ``ValueError`` for targets with a sigma_y component, which no
    function of the endpoint can reproduce.
    """
    m = as_hermitian(target, tol=1e-9)
    if abs(m[0, 1].imag) > 1e-12:
        raise ValueError("target has a sigma_y component; the endpoint law carries no sigma_y information")
    a = float(m[1, 1].real)
    return a, float(m[0, 1].real), float(m[0, 0].real) - a


def pointer_moments(h: PointerFunction, tol: float = 1e-12) -> tuple[float, float, float]:
    """Gaussian moments (E[h], E[h y], E[h (y^2 - 1)]) of a normalised pointer,
    by quadrature.  With these, int h p = m0 I + beta m1 (s- + s+) + beta^2 m2 s+s-."""
    if h.variable != "normalized":
        raise ValueError("moments are defined for pointers of the normalised endpoint")

    def f(y):
        w = math.exp(-0.5 * y * y) / SQRT_2PI
        v = h(y) * w
        return np.array([v, v * y, v * (y * y - 1.0)])

    res = adaptive_quadrature(f, -np.inf, np.inf, tol=tol, points=h.breakpoints or None)
    return tuple(float(v) for v in res.value)


def unbiasedness_residuals(h: PointerFunction, target, beta: float) -> np.ndarray:
    """Residuals (identity, quadrature, excited) of int h p - target."""
    m0, m1, m2 = pointer_moments(h)
    a, b, c = target_coefficients(target)
    return np.array([m0 - a, beta * m1 - b, beta**2 * m2 - c])


@dataclass(frozen=True)
class ConstraintSolution:
    coefficients: tuple[float, ...]
    residuals: tuple[float, ...]
    pointer: PointerFunction = field(compare=False)

    @property
    def max_residual(self) -> float:
        return max(abs(r) for r in self.residuals)


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not 0 < beta <= 1:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    return beta


def rational_x_coefficient(eps: float, beta: float) -> float:
    """C1 = sqrt(2 pi) / (beta (sqrt(2 pi) - eps I(eps))), no quadrature."""
    denom = SQRT_2PI - eps * integral_I(eps)
    if abs(denom) < DEGENERATE_TOL:
        raise ConstraintError(f"x-constraint degenerate at eps={eps}: sqrt(2pi) - eps I(eps) = {denom:.3g}")
    return SQRT_2PI / (beta * denom)


def rational_z_coefficients(delta: float, beta: float) -> tuple[float, float]:
    """(D2, D3) of the unbiased z pointer, no quadrature."""
    i_d = integral_I(delta)
    denom = SQRT_2PI - (1.0 + delta) * i_d
    if abs(denom) < DEGENERATE_TOL:
        raise ConstraintError(
            f"z-constraint degenerate at delta={delta}: sqrt(2pi) - (1+delta) I(delta) = {denom:.3g}"
        )
    d2 = 2.0 * SQRT_2PI / (beta**2 * denom)
    d3 = -(SQRT_2PI + i_d * d2) / SQRT_2PI
    return d2, d3


def solve_unbiased_x(eps: float, beta: float = 1.0) -> ConstraintSolution:
    """Fix C1 (with C2 = C3 = 0) so that c1 y/(y^2+eps) is unbiased for sigma_x."""
    beta = _check_beta(beta)
    c1 = rational_x_coefficient(eps, beta)
    h = RationalX(c1, eps)
    res = unbiasedness_residuals(h, SIGMA_X, beta)
    return ConstraintSolution((c1, 0.0, 0.0), tuple(float(r) for r in res), h)


def d1_branch_root(lo: float = 1e-4, hi: float = 1e4, n: int = 2000) -> float | None:
    """Root of sqrt(2 pi) = delta I(delta) on [lo, hi], if any.

    Only at such a delta could the z-family carry a non-zero D1; a log grid
    scan finds no sign change (delta I(delta) < sqrt(2 pi) throughout).
    """
    grid = np.geomspace(lo, hi, n)
    vals = np.array([SQRT_2PI - d * integral_I(d) for d in grid])
    sign = np.nonzero(np.diff(np.sign(vals)))[0]
    if sign.size == 0:
        return None
    i = int(sign[0])
    return float(brentq(lambda d: SQRT_2PI - d * integral_I(d), grid[i], grid[i + 1]))


def solve_unbiased_z(delta: float, beta: float = 1.0) -> ConstraintSolution:
    """Fix (D1, D2, D3) = (0, D2, D3) so that the z family is unbiased for sigma_z."""
    beta = _check_beta(beta)
    d2, d3 = rational_z_coefficients(delta, beta)
    if log.isEnabledFor(logging.DEBUG):
        log.debug("D1 fixed at 0; alternative branch root of sqrt(2pi) = delta I(delta): %s", d1_branch_root())
    h = RationalZ(0.0, d2, d3, delta)
    res = unbiasedness_residuals(h, SIGMA_Z, beta)
    return ConstraintSolution((0.0, d2, d3), tuple(float(r) for r in res), h)


# --- preimages ---------------------------------------------------------------


def preimages_x(x: float, c1: float, eps: float) -> tuple[float, ...]:
    """All real y with c1 y / (y^2 + eps) = x, ascending.

    Empty when |x| exceeds c1 / (2 sqrt(eps)); a single (double) root
    sign(x) sqrt(eps) at the edge; {0} for x = 0.
    """
    if x == 0.0:
        return (0.0,)
    disc = c1 * c1 - 4.0 * x * x * eps
    if disc < 0.0:
        if disc > -1e-14 * c1 * c1:
            disc = 0.0
        else:
            return ()
    root = math.sqrt(disc)
    if root == 0.0:
        return (math.copysign(math.sqrt(eps), x * c1),)
    # q = (c1 + sign(c1) root) / 2 avoids cancellation; y+ y- = eps
    q = 0.5 * (c1 + math.copysign(root, c1))
    far = q / x
    near = eps / far
    return tuple(sorted((near, far)))


def preimages_z(x: float, d2: float, d3: float, delta: float) -> tuple[float, ...]:
    """All real y with d2 / (y^2 + delta) + d3 = x, ascending.

    ``x = d3`` is only reached as |y| -> infinity and returns ``()``.
    """
    if x == d3:
        return ()
    y2 = ((x - d3) * delta - d2) / (d3 - x)
    if y2 < 0.0:
        if y2 > -1e-14 * delta:
            y2 = 0.0
        else:
            return ()
    if y2 == 0.0:
        return (0.0,)
    r = math.sqrt(y2)
    return (-r, r)
