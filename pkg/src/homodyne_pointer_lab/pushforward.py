"""Densities of the pointer values h(Y_t) by the Frobenius-Perron
change of variables

    r(x) = sum over preimages y of  q(y) / |h'(y)|

for the x pointer (``density_r``) and the z pointer (``density_s``), plus the
figure-data grids.

Both densities have integrable inverse-square-root singularities where h'
vanishes: at x = +-c1/(2 sqrt(eps)) for r and at x = d3 + d2/delta for s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .endpoint import as_horizon, scalar_cdf_q, scalar_density_q
from .optimize import optimize_pointer_x, optimize_pointer_z
from .pointers import PointerFunction, RationalX, RationalZ, preimages_x, preimages_z
from .qubit import BlochVector
from .special import adaptive_quadrature

ENDPOINT_HALF_WIDTH = 6.0
DEFAULT_GRID_POINTS = 513

# Hurwitz zeta(1/2, 1/2) and zeta(-1/2, 1/2): midpoint-rule error constants of
# u^{-1/2} and u^{1/2} singular terms at an endpoint
_ZETA_HALF = -0.6048986434216303702
_ZETA_MINUS_HALF = 0.06088846558059492032


def density_r(x, c1: float, eps: float, horizon, rho: BlochVector):
    """Density of c1 y/(y^2 + eps) at ``x``; +inf exactly on the fold."""
    hz = as_horizon(horizon)
    x = np.asarray(x, dtype=float)
    xs = np.atleast_1d(x)
    out = np.zeros(xs.shape)
    disc = c1 * c1 - 4.0 * xs * xs * eps
    # same round-off allowance as preimages_x
    edge = 1e-14 * c1 * c1
    inside = disc > edge
    fold = (np.abs(disc) <= edge) & (xs != 0)
    out[fold] = np.inf

    xi = xs[inside]
    root = np.sqrt(disc[inside])
    qq = 0.5 * (c1 + np.copysign(root, c1))
    nz = xi != 0
    with np.errstate(divide="ignore", invalid="ignore"):
        far = np.where(nz, qq / np.where(nz, xi, 1.0), np.inf)
        near = np.where(nz, eps / far, 0.0)
    total = np.zeros(xi.shape)
    for y in (near, far):
        finite = np.isfinite(y)
        yf = np.where(finite, y, 0.0)
        y2 = yf * yf
        val = (y2 + eps) ** 2 * scalar_density_q(yf, hz, rho) / (abs(c1) * np.abs(y2 - eps))
        total += np.where(finite, val, 0.0)
    out[inside] = total
    return float(out[0]) if x.ndim == 0 else out.reshape(x.shape)


def density_s(x, d2: float, d3: float, delta: float, horizon, rho: BlochVector):
    """Density of d2/(y^2 + delta) + d3 at ``x``; +inf at the y = 0 fold."""
    hz = as_horizon(horizon)
    x = np.asarray(x, dtype=float)
    xs = np.atleast_1d(x)
    out = np.zeros(xs.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        y2 = ((xs - d3) * delta - d2) / (d3 - xs)
    inside = np.isfinite(y2) & (y2 > 0)
    out[np.isfinite(y2) & (y2 == 0)] = np.inf
    yy2 = y2[inside]
    r = np.sqrt(yy2)
    total = np.zeros(r.shape)
    for y in (r, -r):
        total += (yy2 + delta) ** 2 * scalar_density_q(y, hz, rho) / (2.0 * abs(d2) * r)
    out[inside] = total
    return float(out[0]) if x.ndim == 0 else out.reshape(x.shape)


def pointer_support(h: PointerFunction) -> tuple[float, float]:
    if isinstance(h, RationalX):
        return (-h.peak, h.peak)
    if isinstance(h, RationalZ):
        return h.support
    raise TypeError(f"no push-forward density for {type(h).__name__}")


def pointer_density(h: PointerFunction, x, horizon, rho: BlochVector):
    """Push-forward density of ``h(Y_t)`` for the rational families."""
    if isinstance(h, RationalX):
        return density_r(x, h.c1, h.eps, horizon, rho)
    if isinstance(h, RationalZ):
        return density_s(x, h.d2, h.d3, h.delta, horizon, rho)
    raise TypeError(f"no push-forward density for {type(h).__name__}")


def pointer_cdf(h: PointerFunction, x: float, horizon, rho: BlochVector) -> float:
    """P(h(Y_t) <= x) from the preimages of x and the closed-form CDF of q."""
    hz = as_horizon(horizon)
    lo, hi = pointer_support(h)
    if x < lo:
        return 0.0
    if x >= hi:
        return 1.0
    cdf = lambda y: float(scalar_cdf_q(y, hz, rho))  # noqa: E731
    if isinstance(h, RationalX):
        if x == 0.0:
            return cdf(0.0) if h.c1 > 0 else 1.0 - cdf(0.0)
        roots = preimages_x(x, h.c1, h.eps)
        a, b = roots[0], roots[-1]
        inside = cdf(b) - cdf(a)
        # between the preimages (c1 y - x (y^2 + eps)) has the sign of x
        return inside if x < 0 else 1.0 - inside
    roots = preimages_z(x, h.d2, h.d3, h.delta)
    # no preimage inside the support means x = d3, reached as |y| -> infinity
    r = abs(roots[0]) if roots else math.inf
    inside = cdf(r) - cdf(-r)
    # d2 < 0: h grows with |y|
    return inside if h.d2 < 0 else 1.0 - inside


def pushforward_expectation(
    g: Callable, h: PointerFunction, horizon, rho: BlochVector, tol: float = 1e-10
) -> float:
    """int g(x) r(x) dx over the support of h(Y_t).

    Substituting x = mid + half sin(theta) turns the endpoint singularities
    into smooth integrands.  Preimages lose about half their digits next to
    the fold, so tolerances much below 1e-10 are not reachable.
    """
    lo, hi = pointer_support(h)
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)

    def f(theta):
        x = mid + half * math.sin(theta)
        return g(x) * pointer_density(h, x, horizon, rho) * half * math.cos(theta)

    a = math.pi / 2
    return float(adaptive_quadrature(f, -a, a, tol=tol, rel_tol=tol).value)


def endpoint_expectation(g: Callable, horizon, rho: BlochVector, tol: float = 1e-10) -> float:
    """int g(y) q(y) dy over the real line."""
    hz = as_horizon(horizon)
    res = adaptive_quadrature(
        lambda y: g(y) * scalar_density_q(y, hz, rho), -np.inf, np.inf, tol=tol, rel_tol=tol
    )
    return float(res.value)


@dataclass(frozen=True)
class DensityGrid:
    """Density sampled at cell centres of an even partition of ``support``.

    ``singular`` flags the support ends where the density has an
    inverse-square-root singularity.
    """

    axis: np.ndarray
    values: np.ndarray
    support: tuple[float, float]
    singular: tuple[bool, bool] = (False, False)
    label: str = ""

    @property
    def spacing(self) -> float:
        return (self.support[1] - self.support[0]) / len(self.axis)

    def integral(self, weights=None) -> float:
        """Midpoint rule with a singular-endpoint correction.

        Near a flagged end the density behaves as A u^{-1/2} + B u^{1/2}
        (u the distance to the end); A and B are fitted from the two nearest
        cells and the generalised Euler-Maclaurin error terms of the midpoint
        rule are subtracted.
        """
        f = self.values if weights is None else self.values * np.asarray(weights)
        h = self.spacing
        total = h * float(np.sum(f))
        for end, flagged in enumerate(self.singular):
            if not flagged or len(f) < 2:
                continue
            f0, f1 = (f[0], f[1]) if end == 0 else (f[-1], f[-2])
            u0, u1 = 0.5 * h, 1.5 * h
            # f = A u^{-1/2} + B u^{1/2} at u0, u1
            m = np.array([[u0**-0.5, u0**0.5], [u1**-0.5, u1**0.5]])
            a, b = np.linalg.solve(m, np.array([f0, f1]))
            total -= _ZETA_HALF * a * h**0.5 + _ZETA_MINUS_HALF * b * h**1.5
        return total


def _cell_centres(lo: float, hi: float, n: int) -> np.ndarray:
    return lo + (np.arange(n) + 0.5) * (hi - lo) / n


def optimal_pointer(which: str, horizon) -> PointerFunction:
    """Minimax-optimal x or z pointer at the horizon's beta."""
    hz = as_horizon(horizon)
    if which == "x":
        res = optimize_pointer_x(hz.beta)
        return RationalX(res.coefficients[0], res.argmin)
    if which == "z":
        res = optimize_pointer_z(hz.beta)
        return RationalZ(*res.coefficients, res.argmin)
    raise ValueError("which must be 'x' or 'z'")


def figure_grid(which: str, rho: BlochVector, horizon, n: int = DEFAULT_GRID_POINTS, pointer=None) -> DensityGrid:
    """Figure data: ``which`` in {"endpoint", "pointer_x", "pointer_z"}.

    Pointer grids use the minimax-optimal pointer at the horizon unless
    ``pointer`` is given.
    """
    if n < 64:
        raise ValueError("n must be at least 64")
    hz = as_horizon(horizon)
    if which == "endpoint":
        lo, hi = -ENDPOINT_HALF_WIDTH, ENDPOINT_HALF_WIDTH
        axis = _cell_centres(lo, hi, n)
        return DensityGrid(axis, scalar_density_q(axis, hz, rho), (lo, hi), (False, False), which)
    if which not in ("pointer_x", "pointer_z"):
        raise ValueError(f"unknown density {which!r}")
    h = pointer if pointer is not None else optimal_pointer(which[-1], hz)
    lo, hi = pointer_support(h)
    axis = _cell_centres(lo, hi, n)
    values = pointer_density(h, axis, hz, rho)
    if isinstance(h, RationalX):
        singular = (True, True)
    else:
        singular = (h.d2 < 0, h.d2 > 0)
    return DensityGrid(axis, values, (lo, hi), singular, which)
