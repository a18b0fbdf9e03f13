"""Minimax pointer functions that read sigma_x and sigma_z off the homodyne
record of a decaying two-level atom.

The endpoint of the exponentially weighted photocurrent has the matrix
density p(y); pointers h(Y_t) unbiased for sigma_x or sigma_z are compared by
their worst-case added variance, optimised over rational families, pushed
forward to pointer-value densities and checked by Monte Carlo.
"""

__version__ = "0.1.0"

from .endpoint import TimeHorizon, matrix_density_p, scalar_density_q  # noqa: E402
from .optimize import optimize_naive_time, optimize_pointer_x, optimize_pointer_z  # noqa: E402
from .pointers import Linear, Quadratic, RationalX, RationalZ  # noqa: E402
from .quality import QualityReport, quality  # noqa: E402
from .qubit import QUADRATURE, SIGMA_X, SIGMA_Z, BlochVector  # noqa: E402

__all__ = [
    "__version__",
    "BlochVector",
    "Linear",
    "QUADRATURE",
    "Quadratic",
    "QualityReport",
    "RationalX",
    "RationalZ",
    "SIGMA_X",
    "SIGMA_Z",
    "TimeHorizon",
    "matrix_density_p",
    "optimize_naive_time",
    "optimize_pointer_x",
    "optimize_pointer_z",
    "quality",
    "scalar_density_q",
]
