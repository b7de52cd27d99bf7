"""Dense Hermitian linear algebra, root finding, and special functions.

Shared numerical kernel for the rest of the package. Everything here is
pure and reentrant; matrices are small (dim <= ~500) so robustness is
preferred over speed throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Tolerances",
    "EigenDecomposition",
    "EmptySubspaceError",
    "require_hermitian",
    "hermitian_eig",
    "generalized_hermitian_eig",
    "lambert_w0",
    "find_root_bracketed",
    "bessel_j",
    "bessel_j_array",
    "bessel_i0",
]


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared across modules. All strictly positive."""

    eig_residual: float = 1e-10
    root_tol: float = 1e-12
    supnorm_tol: float = 1e-10
    gevp_threshold: float = 1e-12

    def __post_init__(self) -> None:
        for name in ("eig_residual", "root_tol", "supnorm_tol", "gevp_threshold"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"tolerance {name} must be strictly positive")


DEFAULT_TOLERANCES = Tolerances()


class EmptySubspaceError(ValueError):
    """Raised when thresholding leaves no retained direction."""


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues ascending with matching (column) eigenvectors.

    For generalized problems, ``vectors`` are the back-transformed
    coefficient vectors (c^dag S c = 1) and ``retained_rank`` is the
    dimension surviving the overlap-matrix threshold.
    """

    values: np.ndarray
    vectors: np.ndarray
    retained_rank: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        object.__setattr__(self, "vectors", np.asarray(self.vectors, dtype=complex))


def require_hermitian(a, tol: float = 1e-12) -> np.ndarray:
    """Validate and return ``a`` as a dense complex Hermitian matrix.

    Asymmetry is measured relative to the max-magnitude entry; a clear
    diagnostic with the offending deviation is raised otherwise.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 1:
        raise ValueError("matrix dimension must be >= 1")
    scale = np.abs(a).max()
    asym = np.abs(a - a.conj().T).max()
    if asym > tol * max(scale, 1.0):
        raise ValueError(
            f"matrix is not Hermitian: max asymmetry {asym:.3e} "
            f"exceeds {tol:.1e} x max-entry {scale:.3e}"
        )
    return 0.5 * (a + a.conj().T)


def hermitian_eig(a, tol: float = 1e-12) -> EigenDecomposition:
    """Full eigendecomposition of a Hermitian matrix, values ascending.

    Backed by LAPACK (tridiagonalization + implicit-shift iteration),
    which is robust at the dimensions used here.
    """
    a = require_hermitian(a, tol=tol)
    values, vectors = np.linalg.eigh(a)
    return EigenDecomposition(values, vectors, retained_rank=a.shape[0])


def generalized_hermitian_eig(
    h, s, threshold: float = DEFAULT_TOLERANCES.gevp_threshold, tol: float = 1e-12
) -> EigenDecomposition:
    """Solve H c = S c E for Hermitian H and positive-semidefinite S.

    S is eigendecomposed; directions with eigenvalue <= threshold times
    the largest S eigenvalue are discarded; the remaining ones are
    whitened and the standard Hermitian problem is solved there. The
    returned coefficient vectors are back-transformed and normalized so
    c^dag S c = 1.
    """
    h = require_hermitian(h, tol=tol)
    s = require_hermitian(s, tol=tol)
    if h.shape != s.shape:
        raise ValueError(f"dimension mismatch: H is {h.shape}, S is {s.shape}")
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    s_vals, s_vecs = np.linalg.eigh(s)
    s_max = s_vals.max()
    keep = s_vals > threshold * s_max
    if s_max <= 0 or not keep.any():
        raise EmptySubspaceError(
            f"empty subspace: no overlap eigenvalue above {threshold:.1e} x {s_max:.3e}"
        )
    whiten = s_vecs[:, keep] / np.sqrt(s_vals[keep])
    reduced = whiten.conj().T @ h @ whiten
    values, y = np.linalg.eigh(0.5 * (reduced + reduced.conj().T))
    vectors = whiten @ y
    return EigenDecomposition(values, vectors, retained_rank=int(keep.sum()))


def lambert_w0(x: float) -> float:
    """Principal-branch Lambert W on [0, inf): w >= 0 with w * e^w = x.

    Bracketed Newton iteration with a bisection safeguard; initial
    bracket [0, max(1, log(1+x)) + 1].
    """
    x = float(x)
    if x < 0:
        raise ValueError("lambert_w0 is defined on [0, inf) only")
    if x == 0.0:
        return 0.0
    lo, hi = 0.0, max(1.0, math.log1p(x)) + 1.0
    w = math.log1p(x)  # decent starting point on both small and large x
    for _ in range(200):
        ew = math.exp(w)
        f = w * ew - x
        if f > 0:
            hi = w
        else:
            lo = w
        step = f / (ew * (1.0 + w))
        w_new = w - step
        if not (lo < w_new < hi):
            w_new = 0.5 * (lo + hi)
        if abs(w_new - w) <= 1e-16 * max(1.0, abs(w_new)):
            w = w_new
            break
        w = w_new
    return w


def find_root_bracketed(f, lo: float, hi: float, tol: float = 1e-12) -> float:
    """Root of f in [lo, hi] given a sign change, to |f| or width below tol.

    Illinois-damped regula falsi with a bisection fallback, so progress
    is monotone-safe regardless of the curvature of f.
    """
    lo, hi = float(lo), float(hi)
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise ValueError(
            f"no sign change on [{lo!r}, {hi!r}]: f(lo)={flo!r}, f(hi)={fhi!r}"
        )
    side = 0
    for _ in range(400):
        denom = fhi - flo
        if denom != 0.0:
            x = hi - fhi * (hi - lo) / denom
        else:
            x = 0.5 * (lo + hi)
        if not (lo < x < hi):
            x = 0.5 * (lo + hi)
        fx = f(x)
        if abs(fx) < tol or (hi - lo) < tol:
            return x
        if flo * fx < 0:
            hi, fhi = x, fx
            if side == -1:
                flo *= 0.5
            side = -1
        else:
            lo, flo = x, fx
            if side == +1:
                fhi *= 0.5
            side = +1
    return 0.5 * (lo + hi)


def bessel_j_array(k_max: int, t: float) -> np.ndarray:
    """J_0(t) .. J_{k_max}(t) via Miller's downward recurrence.

    Normalized with J_0 + 2 * sum_{m even} J_m = 1, accurate to ~1e-13
    absolute for the orders used here.
    """
    if k_max < 0:
        raise ValueError("order must be >= 0")
    t = float(t)
    sign = np.ones(k_max + 1)
    if t < 0:  # J_k(-t) = (-1)^k J_k(t)
        sign[1::2] = -1.0
        t = -t
    if t == 0.0:
        out = np.zeros(k_max + 1)
        out[0] = 1.0
        return out
    # start high enough that the downward recurrence has converged at k_max
    start = max(k_max, int(math.ceil(t))) + 20 + int(4.0 * math.sqrt(max(t, k_max, 1)))
    if start % 2:
        start += 1
    jn = np.zeros(start + 2)
    jn[start + 1] = 0.0
    jn[start] = 1e-300
    for m in range(start, 0, -1):
        jn[m - 1] = (2.0 * m / t) * jn[m] - jn[m + 1]
        if abs(jn[m - 1]) > 1e250:  # rescale to dodge overflow
            jn[: start + 2] /= 1e250
    norm = jn[0] + 2.0 * jn[2:start:2].sum()
    return sign * (jn[: k_max + 1] / norm)


def bessel_j(k: int, t: float) -> float:
    """Bessel function of the first kind J_k(t), k >= 0 integer."""
    if k < 0 or int(k) != k:
        raise ValueError("order must be a non-negative integer")
    return float(bessel_j_array(int(k), t)[int(k)])


_I0_SERIES_CUTOFF = 40.0


def bessel_i0(x: float) -> float:
    """Modified Bessel I_0(x): power series below |x|=40, asymptotic above."""
    x = abs(float(x))
    if x <= _I0_SERIES_CUTOFF:
        # all-positive terms, no cancellation
        total, term, k = 1.0, 1.0, 0
        q = 0.25 * x * x
        while True:
            k += 1
            term *= q / (k * k)
            total += term
            if term < 1e-18 * total:
                return total
    # asymptotic expansion e^x / sqrt(2 pi x) * sum_k a_k / x^k
    total, term = 1.0, 1.0
    for k in range(1, 25):
        term *= (2 * k - 1) ** 2 / (8.0 * k * x)
        total += term
        if term < 1e-18 * total:
            break
    return math.exp(x) / math.sqrt(2.0 * math.pi * x) * total
