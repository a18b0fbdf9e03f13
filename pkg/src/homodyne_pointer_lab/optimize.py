"""Minimax search over the pointer-family parameter: minimise
max(d1, d2) over eps (x family) or delta (z family), and the flat-weighting
time for the naive pointers.

The objective is continuous but has a crease where d1 = d2, so the search is
derivative free: a log-grid pre-scan brackets the minimum and golden-section
search refines it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .pointers import rational_x_coefficient, rational_z_coefficients
from .quality import naive_quality_x, naive_quality_z, rational_x_d, rational_z_d

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

SCAN_LO = 1e-4
SCAN_HI = 50.0
SCAN_POINTS = 200


class BracketError(RuntimeError):
    def __init__(self, message: str, grid: np.ndarray, values: np.ndarray):
        super().__init__(message)
        self.grid = grid
        self.values = values


@dataclass(frozen=True)
class OptimizationResult:
    argmin: float
    objective: float
    d1: float
    d2: float
    iterations: int
    bracket: tuple[float, float]
    coefficients: tuple[float, ...] = field(default=())

    @property
    def sigma(self) -> float:
        return math.sqrt(self.objective)


def golden_section(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-8, max_iter: int = 500):
    """Minimise a unimodal ``f`` on ``[lo, hi]``; returns (x, f(x), iterations)."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while b - a > tol and it < max_iter:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
        it += 1
    x = c if fc <= fd else d
    return x, min(fc, fd), it


def bracket_minimum(f: Callable[[float], float], lo: float = SCAN_LO, hi: float = SCAN_HI, n: int = SCAN_POINTS):
    """Log-grid pre-scan; returns (lo, hi) around the best interior node."""
    grid = np.geomspace(lo, hi, n)
    values = np.array([f(x) for x in grid])
    i = int(np.nanargmin(values))
    if i == 0 or i == n - 1 or not np.isfinite(values[i]):
        raise BracketError(
            f"no interior minimum on [{lo}, {hi}] (best node {grid[i]:.6g})", grid, values
        )
    return float(grid[i - 1]), float(grid[i + 1])


def _minimax(d_of: Callable[[float], tuple[float, float]], tol: float):
    obj = lambda p: max(d_of(p))  # noqa: E731
    lo, hi = bracket_minimum(obj)
    x, fx, it = golden_section(obj, lo, hi, tol)
    d1, d2 = d_of(x)
    return x, max(d1, d2), d1, d2, it, (lo, hi)


def optimize_pointer_x(beta: float = 1.0, tol: float = 1e-8) -> OptimizationResult:
    """Optimal eps of the x family at the given beta."""
    if not 0 < beta <= 1:
        raise ValueError("beta must lie in (0, 1]")
    x, obj, d1, d2, it, br = _minimax(lambda e: rational_x_d(e, beta), tol)
    return OptimizationResult(x, obj, d1, d2, it, br, (rational_x_coefficient(x, beta),))


def optimize_pointer_z(beta: float = 1.0, tol: float = 1e-8) -> OptimizationResult:
    """Optimal delta of the z family at the given beta; coefficients (D1, D2, D3)."""
    if not 0 < beta <= 1:
        raise ValueError("beta must lie in (0, 1]")
    x, obj, d1, d2, it, br = _minimax(lambda d: rational_z_d(d, beta), tol)
    d2c, d3c = rational_z_coefficients(x, beta)
    return OptimizationResult(x, obj, d1, d2, it, br, (0.0, d2c, d3c))


def optimize_naive_time(which: str, tol: float = 1e-8) -> OptimizationResult:
    """Time minimising the naive quality, ``which`` in {"x", "z"}.

    The naive qualities are not of d1/d2 form; ``d1`` and ``d2`` both carry
    the objective.
    """
    f = {"x": naive_quality_x, "z": naive_quality_z}.get(which)
    if f is None:
        raise ValueError("which must be 'x' or 'z'")
    grid = np.linspace(0.05, 50.0, 1000)
    values = np.array([f(t) for t in grid])
    i = int(np.argmin(values))
    lo, hi = float(grid[max(i - 1, 0)]), float(grid[min(i + 1, len(grid) - 1)])
    t, val, it = golden_section(f, lo, hi, tol)
    return OptimizationResult(t, val, val, val, it, (lo, hi))
