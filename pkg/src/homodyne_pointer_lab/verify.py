"""Oracle suites: every closed form against an independent numerical route.

Each check returns a :class:`Check` naming the invariant, so a failure
report says which identity broke rather than which line raised.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .endpoint import (
    TimeHorizon,
    characteristic_matrix,
    matrix_density_p,
    ode_oracle_Fk,
    scalar_density_q,
)
from .pointers import Linear, Quadratic, RationalX, RationalZ, pointer_moments
from .pushforward import endpoint_expectation, optimal_pointer, pushforward_expectation
from .quality import heisenberg_check, naive_quality_x, path_moments, quality
from .qubit import (
    EXCITED,
    IDENTITY,
    SIGMA_X,
    SIGMA_Z,
    BlochVector,
    evolve_heisenberg,
    evolve_heisenberg_rk4,
    operator_norm,
)
from .special import (
    SQRT_2PI,
    adaptive_quadrature,
    integral_I,
    integral_I_quadrature,
    integral_J,
    integral_J_quadrature,
    integrals_identity_residual,
)

LEVELS = ("fast", "full")


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    threshold: float
    seconds: float = 0.0
    detail: str = ""
    at_least: bool = False


def _timed(name: str, threshold: float, fn: Callable[[], tuple[float, str]], higher_is_better: bool = False) -> Check:
    t0 = time.perf_counter()
    try:
        value, detail = fn()
    except (ArithmeticError, ValueError, RuntimeError, AssertionError) as exc:
        value, detail = math.nan, f"{type(exc).__name__}: {exc}"
    ok = value >= threshold if higher_is_better else value < threshold
    return Check(
        name, bool(ok and np.isfinite(value)), float(value), threshold,
        time.perf_counter() - t0, detail, higher_is_better,
    )


def random_bloch(rng: np.random.Generator, n: int) -> list[BlochVector]:
    """Uniform in the unit ball."""
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    v *= rng.random(n)[:, None] ** (1.0 / 3.0)
    return [BlochVector(*row) for row in v]


def log_grid(n: int = 100) -> np.ndarray:
    return np.geomspace(1e-3, 50.0, n)


# --- individual invariants ---------------------------------------------------


def integrals_identity(n: int = 100) -> Check:
    """2 eps J - (1 - eps) I = sqrt(2 pi) across the eps grid."""

    def run():
        res = max(abs(integrals_identity_residual(e)) for e in log_grid(n))
        return res, f"max residual over {n} eps in [1e-3, 50]"

    return _timed("integrals identity 2eJ - (1-e)I = sqrt(2pi)", 1e-9, run)


def integrals_vs_quadrature(n: int = 100) -> Check:
    def run():
        worst = 0.0
        for e in log_grid(n):
            worst = max(
                worst,
                abs(integral_I(e) / integral_I_quadrature(e).value - 1.0),
                abs(integral_J(e) / integral_J_quadrature(e).value - 1.0),
            )
        return worst, "max relative error of closed-form I, J"

    return _timed("closed-form I, J match quadrature", 1e-8, run)


def characteristic_vs_ode(steps: int = 500) -> Check:
    def run():
        worst = 0.0
        for k in (0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0, 5.0, -5.0):
            for t in (0.1, 1.0, 2.513, 8.0):
                worst = max(worst, np.max(np.abs(characteristic_matrix(k, t) - ode_oracle_Fk(k, t, steps))))
        return worst, "componentwise max over k, t"

    return _timed("characteristic function matches its ODE system", 1e-7, run)


def semigroup_vs_rk4() -> Check:
    def run():
        worst = 0.0
        for x in (IDENTITY, SIGMA_X, SIGMA_Z, EXCITED):
            for t in (0.3, 2.0, 7.0):
                worst = max(worst, np.max(np.abs(evolve_heisenberg(x, t) - evolve_heisenberg_rk4(x, t))))
        return worst, "closed-form exp(tL) vs RK4"

    return _timed("decay semigroup matches RK4", 1e-8, run)


def density_normalisation(n_states: int = 200, seed: int = 1) -> Check:
    rng = np.random.default_rng(seed)

    def run():
        y = np.linspace(-12.0, 12.0, 4801)
        hy = y[1] - y[0]
        worst = 0.0
        for t in (0.5, 2.0, TimeHorizon.infinite()):
            p = matrix_density_p(y, t)
            worst = max(worst, np.max(np.abs(np.trapezoid(p, dx=hy, axis=0) - IDENTITY)))
        for rho in random_bloch(rng, n_states):
            q = scalar_density_q(y, 1.3, rho)
            worst = max(worst, abs(np.trapezoid(q, dx=hy) - 1.0), max(0.0, -q.min()))
        return worst, "|int p - I|, |int q - 1| and negativity of q"

    return _timed("densities normalise and q >= 0", 1e-9, run)


def pointer_unbiasedness(n_states: int = 20, seed: int = 2) -> Check:
    rng = np.random.default_rng(seed)

    def run():
        hx, hz = optimal_pointer("x", TimeHorizon.infinite()), optimal_pointer("z", TimeHorizon.infinite())
        worst = 0.0
        for rho in random_bloch(rng, n_states):
            worst = max(
                worst,
                abs(endpoint_expectation(hx, TimeHorizon.infinite(), rho) - rho.px),
                abs(endpoint_expectation(hz, TimeHorizon.infinite(), rho) - rho.pz),
            )
        return worst, "|E h(Y) - P| for the optimal pointers"

    return _timed("optimal pointers are unbiased", 1e-8, run)


def limit_qualities() -> Check:
    def run():
        hz = TimeHorizon.infinite()
        ex = abs(quality(Linear(1.0), SIGMA_X, hz).sigma_sq - 2.0)
        ez = abs(quality(Quadratic(1.0), SIGMA_Z, hz).sigma_sq - 6.0)
        return max(ex, ez), "linear -> 2, quadratic -> 6"

    return _timed("limit qualities 2 and 6", 1e-8, run)


def naive_moments(steps: int = 1000) -> Check:
    def run():
        t = 2.513
        m = path_moments(2, t, "flat", steps)
        a = 2.0 - 2.0 * math.exp(-0.5 * t)
        second = m[2] / a**2
        expected = naive_quality_x(t)
        value = operator_norm(second - IDENTITY)
        return abs(value - expected), "moment ODE vs flat-weight closed form"

    return _timed("naive quality from the moment equations", 1e-8, run)


def frobenius_perron(n_states: int = 5, seed: int = 3) -> Check:
    rng = np.random.default_rng(seed)

    def run():
        hz = TimeHorizon.infinite()
        worst = 0.0
        for which in ("x", "z"):
            h = optimal_pointer(which, hz)
            for rho in random_bloch(rng, n_states):
                coeffs = rng.normal(size=4)
                g = lambda x, c=coeffs: np.polynomial.polynomial.polyval(x, c)  # noqa: E731
                lhs = pushforward_expectation(g, h, hz, rho)
                rhs = endpoint_expectation(lambda y, h=h, g=g: g(h(y)), hz, rho)
                mass = pushforward_expectation(lambda x: 1.0, h, hz, rho)
                worst = max(worst, abs(lhs - rhs), abs(mass - 1.0))
        return worst, "int g r dx vs int g(h(y)) q dy, and mass"

    return _timed("push-forward densities consistent", 1e-6, run)


def heisenberg_sweep(n: int = 20) -> Check:
    def run():
        hz = TimeHorizon.infinite()
        eps_grid = np.geomspace(0.05, 20.0, n)
        delta_grid = np.geomspace(0.05, 20.0, n)
        rx = [quality(RationalX.unbiased(e), SIGMA_X, hz) for e in eps_grid]
        rz = [quality(RationalZ.unbiased(d), SIGMA_Z, hz) for d in delta_grid]
        worst = min(heisenberg_check(a, b) for a in rx for b in rz)
        return worst, f"min sigma sigma~ over a {n}x{n} (eps, delta) grid"

    return _timed("joint-measurement bound sigma sigma~ >= 1", 1.0 - 1e-9, run, higher_is_better=True)


def monte_carlo(n: int = 100_000, seed: int = 11) -> Check:
    from .simulate import SimConfig, chi_square_against_q, sample_endpoints

    def run():
        rho = BlochVector(0.6, 0.0, 0.5)
        cfg = SimConfig(TimeHorizon.infinite(), n, seed)
        s = sample_endpoints(rho, cfg)
        return chi_square_against_q(s.y, cfg.horizon, rho).pvalue, f"chi-square p-value at n = {n}"

    return _timed("exact endpoint sampler follows q", 0.01, run, higher_is_better=True)


def moment_checks() -> Check:
    def run():
        h = optimal_pointer("x", TimeHorizon.infinite())
        m = pointer_moments(h)
        return abs(m[1] - 1.0) + abs(m[0]) + abs(m[2]), "E[h], E[h y] - 1, E[h (y^2 - 1)]"

    return _timed("x pointer satisfies its constraint integrals", 1e-9, run)


def gaussian_quadrature() -> Check:
    def run():
        a = adaptive_quadrature(lambda x: math.exp(-0.5 * x * x), -np.inf, np.inf).value
        b = adaptive_quadrature(lambda y: (y * y - 1) ** 2 * math.exp(-0.5 * y * y) / SQRT_2PI, -np.inf, np.inf).value
        return max(abs(a - SQRT_2PI), abs(b - 2.0)), "Gaussian normalisation and (y^2-1)^2 moment"

    return _timed("quadrature reproduces Gaussian moments", 1e-10, run)


SUITES: dict[str, list[Callable[[], Check]]] = {
    "fast": [
        gaussian_quadrature,
        integrals_identity,
        integrals_vs_quadrature,
        characteristic_vs_ode,
        semigroup_vs_rk4,
        density_normalisation,
        moment_checks,
        limit_qualities,
        lambda: frobenius_perron(n_states=2),
        lambda: heisenberg_sweep(n=6),
    ],
    "full": [
        gaussian_quadrature,
        integrals_identity,
        integrals_vs_quadrature,
        characteristic_vs_ode,
        semigroup_vs_rk4,
        lambda: density_normalisation(n_states=1000),
        moment_checks,
        pointer_unbiasedness,
        limit_qualities,
        naive_moments,
        frobenius_perron,
        heisenberg_sweep,
        monte_carlo,
    ],
}


def run_suite(level: str) -> list[Check]:
    if level not in SUITES:
        raise ValueError(f"level must be one of {LEVELS}")
    return [check() for check in SUITES[level]]


def format_checks(checks: list[Check]) -> str:
    lines = []
    for c in checks:
        verdict = "PASS" if c.passed else "FAIL"
        op = ">=" if c.at_least else "<"
        line = f"{verdict}  {c.name}: {c.value:.3e} ({op} {c.threshold:.0e}) [{c.seconds:.2f}s]"
        if not c.passed:
            line += f"\n      {c.detail}"
        lines.append(line)
    return "\n".join(lines)
