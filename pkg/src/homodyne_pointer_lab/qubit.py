"""Two-level atom algebra: Pauli and ladder operators, the decay generator
and its Heisenberg-picture semigroup.

Matrices are plain ``numpy`` arrays of shape ``(2, 2)`` and dtype complex.
The basis is ordered (excited, ground), so that

    sigma_minus = [[0, 0], [1, 0]]      sigma_plus = [[0, 1], [0, 0]]

and the excited-state projector ``sigma_plus @ sigma_minus`` equals
``diag(1, 0)`` = (I + sigma_z) / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-12

IDENTITY = np.eye(2, dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
#: sigma_plus @ sigma_minus, the excited-state projector diag(1, 0)
EXCITED = SIGMA_PLUS @ SIGMA_MINUS
#: sigma_minus + sigma_plus; numerically identical to SIGMA_X
QUADRATURE = SIGMA_MINUS + SIGMA_PLUS

for _m in (IDENTITY, SIGMA_MINUS, SIGMA_PLUS, SIGMA_X, SIGMA_Y, SIGMA_Z, EXCITED, QUADRATURE):
    _m.setflags(write=False)


def as_matrix(x) -> np.ndarray:
    """Return ``x`` as a complex 2x2 array (copy)."""
    m = np.array(x, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
    return m


def is_hermitian(x, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(x)
    return bool(np.max(np.abs(m - m.conj().T)) <= tol)


def as_hermitian(x, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate and return ``x`` as a Hermitian 2x2 matrix."""
    m = as_matrix(x)
    if not is_hermitian(m, tol):
        raise ValueError("matrix is not Hermitian")
    return m


@dataclass(frozen=True)
class BlochVector:
    """Qubit state rho = (I + px sigma_x + py sigma_y + pz sigma_z) / 2."""

    px: float
    py: float
    pz: float

    def __post_init__(self):
        for name in ("px", "py", "pz"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if self.norm_sq > 1.0 + 1e-12:
            raise ValueError(f"Bloch vector norm {math.sqrt(self.norm_sq):.6g} exceeds 1")

    @property
    def norm_sq(self) -> float:
        return self.px**2 + self.py**2 + self.pz**2

    @property
    def excited_population(self) -> float:
        """rho(sigma_plus sigma_minus) = (pz + 1) / 2."""
        return 0.5 * (self.pz + 1.0)

    def density_matrix(self) -> np.ndarray:
        return 0.5 * (IDENTITY + self.px * SIGMA_X + self.py * SIGMA_Y + self.pz * SIGMA_Z)

    @classmethod
    def from_density_matrix(cls, rho) -> "BlochVector":
        m = as_hermitian(rho, tol=1e-9)
        return cls(
            float(np.real(np.trace(m @ SIGMA_X))),
            float(np.real(np.trace(m @ SIGMA_Y))),
            float(np.real(np.trace(m @ SIGMA_Z))),
        )

    @classmethod
    def parse(cls, text: str) -> "BlochVector":
        """Parse ``"px,py,pz"``."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError(f"expected 'px,py,pz', got {text!r}")
        return cls(*(float(p) for p in parts))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.px, self.py, self.pz)


def lindblad_apply(x) -> np.ndarray:
    """Heisenberg-picture decay generator
    L(X) = -1/2 (s+ s- X + X s+ s-) + s+ X s-.
    """
    m = as_matrix(x)
    return -0.5 * (EXCITED @ m + m @ EXCITED) + SIGMA_PLUS @ m @ SIGMA_MINUS


def evolve_heisenberg(x, t: float) -> np.ndarray:
    """Closed-form ``exp(t L)(x)``.

    Writing ``x = x11 I + (x00 - x11) s+s- + off-diagonal part``, the identity
    is invariant, the off-diagonal (sigma_x, sigma_y) part decays as
    ``exp(-t/2)`` and the excited projector as ``exp(-t)``.
    """
    if t < 0:
        raise ValueError("evolution time must be non-negative")
    m = as_matrix(x)
    a = math.exp(-0.5 * t)
    b = math.exp(-t)
    ground = m[1, 1]
    return np.array(
        [[ground + (m[0, 0] - ground) * b, m[0, 1] * a], [m[1, 0] * a, ground]],
        dtype=complex,
    )


def evolve_heisenberg_rk4(x, t: float, steps: int = 1000) -> np.ndarray:
    """Fourth-order Runge-Kutta integration of dX/dt = L(X); oracle for
    :func:`evolve_heisenberg`."""
    if t < 0:
        raise ValueError("evolution time must be non-negative")
    m = as_matrix(x)
    h = t / steps
    for _ in range(steps):
        k1 = lindblad_apply(m)
        k2 = lindblad_apply(m + 0.5 * h * k1)
        k3 = lindblad_apply(m + 0.5 * h * k2)
        k4 = lindblad_apply(m + h * k3)
        m = m + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return m


def hermitian_eigenvalues(x) -> tuple[float, float]:
    """Eigenvalues (ascending) of a Hermitian 2x2 matrix from the quadratic
    formula.  The discriminant is formed as ``((a - d)/2)^2 + |b|^2`` so it is
    a sum of squares and never suffers cancellation."""
    m = np.asarray(x)
    a = float(np.real(m[0, 0]))
    d = float(np.real(m[1, 1]))
    mean = 0.5 * (a + d)
    radius = math.hypot(0.5 * (a - d), abs(m[0, 1]))
    return mean - radius, mean + radius


def operator_norm(x) -> float:
    """Operator norm of a Hermitian 2x2 matrix (largest |eigenvalue|)."""
    lo, hi = hermitian_eigenvalues(as_hermitian(x, tol=1e-9))
    return max(abs(lo), abs(hi))


def expectation(rho: BlochVector, x) -> float:
    """rho(X) = tr(rho X) for Hermitian X."""
    m = as_matrix(x)
    return float(np.real(np.trace(rho.density_matrix() @ m)))


def commutator(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    return a @ b - b @ a
