"""Classical laboratory for filtered quantum phase estimation.

Builds spectral filter functions over Chebyshev and trigonometric bases,
exactly diagonalizes Fermi-Hubbard sectors, runs Krylov-subspace filter
design, and evaluates QPE/FQPE cost models and their theorem bounds.
"""

from .numerics import (
    EigenDecomposition,
    EmptySubspaceError,
    Tolerances,
    bessel_i0,
    bessel_j,
    find_root_bracketed,
    generalized_hermitian_eig,
    hermitian_eig,
    lambert_w0,
    require_hermitian,
)

__version__ = "0.1.0"
