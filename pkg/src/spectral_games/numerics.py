"""Dense scalar and matrix kernels shared by every other module.

Matrices are plain ``numpy`` arrays; :func:`as_matrix` returns a read-only
float64 copy so values handed around the package cannot be mutated in place.
Spectra are 1-d complex arrays in canonical order (descending real part, then
descending imaginary part).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, NonSquare

MAX_DIM = 4000


@dataclass(frozen=True)
class Tolerances:
    """Default tolerances referenced by the test and acceptance suites."""

    abs: float = 1e-10
    rel: float = 1e-10
    boundary: float = 1e-12
    pairing: float = 1e-9
    divergence: float = 1e12


TOL = Tolerances()


def as_matrix(M, *, square: bool = False) -> np.ndarray:
    A = np.array(M, dtype=float, copy=True)
    if A.ndim != 2:
        raise NonSquare(f"expected a 2-d matrix, got shape {A.shape}")
    if square and A.shape[0] != A.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    A.setflags(write=False)
    return A


def canonical_order(values) -> np.ndarray:
    z = np.asarray(values, dtype=complex).ravel()
    # lexsort sorts by the last key first
    idx = np.lexsort((-z.imag, -z.real))
    out = z[idx]
    out.setflags(write=False)
    return out


def eigenvalues(M) -> np.ndarray:
    """Eigenvalues of a real square matrix, with multiplicity, canonically ordered."""
    A = as_matrix(M, square=True)
    if A.shape[0] > MAX_DIM:
        raise ValueError(f"dimension {A.shape[0]} exceeds supported maximum {MAX_DIM}")
    if A.shape[0] == 0:
        return canonical_order([])
    try:
        w = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"eigenvalue iteration did not converge: {exc}") from exc
    return canonical_order(w)


def singular_values(M) -> np.ndarray:
    A = as_matrix(M)
    try:
        s = np.linalg.svd(A, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"SVD did not converge: {exc}") from exc
    s = np.sort(s)[::-1]
    s.setflags(write=False)
    return s


def vector_norm(v) -> float:
    """Euclidean norm that neither underflows below 1e-154 nor overflows above 1e154."""
    v = np.asarray(v, dtype=float)
    s = float(np.max(np.abs(v))) if v.size else 0.0
    if s == 0.0 or not math.isfinite(s):
        return s
    return s * float(np.linalg.norm(v / s))


def spectral_radius(M) -> float:
    w = eigenvalues(M)
    return float(np.max(np.abs(w))) if w.size else 0.0


def quadratic_roots(b: complex, c: complex) -> tuple[complex, complex]:
    """Roots of ``z**2 + b*z + c``, larger modulus first.

    Uses the cancellation-free pairing ``q = -(b + sign*sqrt(disc))/2``,
    ``roots = (q, c/q)``.
    """
    b = complex(b)
    c = complex(c)
    disc = cmath.sqrt(b * b - 4 * c)
    # pick the sign that avoids subtracting nearly equal numbers
    if (b.conjugate() * disc).real >= 0:
        q = -(b + disc) / 2
    else:
        q = -(b - disc) / 2
    if q == 0:
        return 0j, 0j
    z1, z2 = q, c / q
    if abs(z2) > abs(z1):
        z1, z2 = z2, z1
    return z1, z2


def is_conjugate_closed(values, tol: float = TOL.abs) -> bool:
    """True when every value's conjugate appears with equal multiplicity."""
    z = list(np.asarray(values, dtype=complex).ravel())
    while z:
        v = z.pop()
        if abs(v.imag) <= tol * (1 + abs(v)):
            continue
        target = v.conjugate()
        dists = [abs(u - target) for u in z]
        if not dists:
            return False
        j = int(np.argmin(dists))
        if dists[j] > tol * (1 + abs(v)):
            return False
        z.pop(j)
    return True
