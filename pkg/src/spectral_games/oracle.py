"""Brute-force minimax polynomials on sampled spectral shapes.

The oracle solves ``min max_i |p(z_i)|`` over real polynomials of degree at
most ``t`` with ``p(0) = 1`` by Lawson's iteratively reweighted least squares.
Polynomials are represented in an Arnoldi-orthogonalized basis built around
the grid's center, and ``p(0) = 1`` enters as a linear constraint. The basis
is O(1) on the grid and large at the origin, so minimax values far below
machine epsilon (``rho**t`` with ``t = 40``) are still resolved to full
relative accuracy; a basis anchored at the origin would compute them as
``1 + (sum close to -1)`` and lose everything below ``1e-16``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import DegenerateInput, SingularLeastSquares
from .numerics import is_conjugate_closed
from .shapes import Disc, Ellipse, ImagCross, Segment, SpectralShape

_BREAKDOWN = 1e-13


@dataclass(frozen=True)
class ConstrainedPolynomial:
    """``p(z) = sum_k d_k q_k(z) / sum_k d_k q_k(0)`` in a centered Arnoldi basis."""

    degree: int
    weights: np.ndarray  # d_k, real, length degree + 1
    hess: np.ndarray  # (degree + 1, degree) Arnoldi recurrence coefficients
    center: float  # q_k is a polynomial in z - center

    def basis(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex).ravel()
        w = z - self.center
        t = self.degree
        Q = np.empty((z.size, t + 1), dtype=complex)
        Q[:, 0] = 1.0
        for k in range(1, t + 1):
            # elementwise updates only, so a value never depends on its neighbours
            v = w * Q[:, k - 1]
            for j in range(k):
                v = v - self.hess[j, k - 1] * Q[:, j]
            Q[:, k] = v / self.hess[k, k - 1]
        return Q

    def _raw(self, z) -> np.ndarray:
        Q = self.basis(z)
        out = np.zeros(Q.shape[0], dtype=complex)
        for k in range(self.degree + 1):
            out = out + self.weights[k] * Q[:, k]
        return out

    def __call__(self, z) -> np.ndarray:
        # the same arithmetic at 0 gives x / x, so p(0) is exactly 1
        return self._raw(z) / self._raw(0.0)[0].real

    @property
    def coeffs(self) -> np.ndarray:
        """Monomial coefficients ``c_1..c_t`` of ``p(z) = 1 + sum c_k z**k``.

        Converting out of the orthogonal basis loses accuracy at high degree;
        use ``__call__`` for evaluation.
        """
        t = self.degree
        shift = np.array([-self.center, 1.0])
        polys = [np.array([1.0])]
        for k in range(1, t + 1):
            v = P.polymul(shift, polys[k - 1])
            for j in range(k):
                v = P.polysub(v, self.hess[j, k - 1] * polys[j])
            polys.append(v / self.hess[k, k - 1])
        total = np.zeros(t + 1)
        for d, q in zip(self.weights, polys):
            total[: q.size] += d * q
        total /= total[0]
        return total[1:]


@dataclass(frozen=True)
class OracleResult:
    poly: ConstrainedPolynomial
    max_abs: float
    acf_estimate: float
    grid_size: int
    iterations_used: int
    converged: bool
    history: list = field(default_factory=list, repr=False)
    objective: list = field(default_factory=list, repr=False)


def _lobatto(lo: float, hi: float, n: int) -> np.ndarray:
    if n == 1:
        return np.array([(lo + hi) / 2])
    k = np.arange(n)
    return lo + (hi - lo) * (1 - np.cos(np.pi * k / (n - 1))) / 2


def sample_boundary(K: SpectralShape, n: int) -> np.ndarray:
    """``n`` deterministic, conjugate-closed points on the boundary of ``K``.

    Curves use equally spaced angles; intervals use Chebyshev-Lobatto points,
    which include both end points and cluster where minimax errors peak.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if isinstance(K, Segment):
        return _lobatto(K.mu, K.L, n).astype(complex)
    if isinstance(K, Ellipse) and K.b == 0:
        return _lobatto(K.c - K.a, K.c + K.a, n).astype(complex)
    if isinstance(K, (Disc, Ellipse)):
        a, b = (K.r, K.r) if isinstance(K, Disc) else (K.a, K.b)
        theta = 2 * np.pi * np.arange(n) / n
        z = K.c + a * np.cos(theta) + 1j * b * np.sin(theta)
        # exact conjugate pairs, free of sin/cos rounding asymmetry
        half = (n - 1) // 2
        z[n - half:] = np.conj(z[1 : half + 1][::-1])
        z[0] = z[0].real
        if n % 2 == 0:
            z[n // 2] = z[n // 2].real
        return z
    if isinstance(K, ImagCross):
        if n % 2:
            raise ValueError("ImagCross sampling needs an even n")
        y = _lobatto(K.a, K.b, n // 2)
        return np.concatenate([1j * y, -1j * y])
    raise TypeError(f"unknown shape {K!r}")


def _arnoldi(z: np.ndarray, t: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Orthonormal basis of degree ``<= t`` polynomials in ``z - center`` on the grid.

    A breakdown at the last column means the grid has exactly ``t`` distinct
    points; the unnormalized residual (the node polynomial) is kept so the
    constrained solve can interpolate. Earlier breakdowns are rank failures.
    """
    n = z.size
    center = float(np.mean(z).real)
    w = z - center
    Q = np.empty((n, t + 1), dtype=complex)
    H = np.zeros((t + 1, t))
    Q[:, 0] = 1.0
    size = max(1.0, float(np.max(np.abs(w))))
    for k in range(1, t + 1):
        v = w * Q[:, k - 1]
        for _ in range(2):  # classical Gram-Schmidt, done twice for stability
            h = (Q[:, :k].conj().T @ v) / n
            v = v - Q[:, :k] @ h
            H[:k, k - 1] += h.real
        nrm = float(np.linalg.norm(v)) / math.sqrt(n)
        if nrm < _BREAKDOWN * size:
            if k < t:
                raise SingularLeastSquares(
                    f"grid supports degree < {k}; need at least t={t} distinct points"
                )
            H[k, k - 1] = 1.0
            Q[:, k] = v
        else:
            H[k, k - 1] = nrm
            Q[:, k] = v / nrm
    return Q, H, center


def _constrained_solve(B: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``argmin ||B d||`` over real ``d`` subject to ``v . d = 1``."""
    _, s, Vt = np.linalg.svd(B, full_matrices=False)
    g = Vt @ v
    null = np.flatnonzero(s <= _BREAKDOWN * s[0])
    if null.size:
        # an exact interpolant exists; put all weight on the null direction
        i = null[np.argmax(np.abs(g[null]))]
        if g[i] != 0:
            return Vt[i] / g[i]
    y = g / (s * s)
    return Vt.T @ (y / (g @ y))


def lawson_minimax(
    points,
    t: int,
    max_iters: int = 500,
    weight_floor: float = 1e-14,
) -> OracleResult:
    """Lawson IRLS for the best real ``p`` of degree ``<= t`` with ``p(0) = 1``.

    ``history`` lists the grid maximum after every weighted solve and
    ``objective`` the weighted 2-norm residual, which Lawson's update makes
    non-decreasing (it is a lower bound on the minimax value).
    """
    z = np.asarray(points, dtype=complex).ravel()
    if z.size == 0:
        raise DegenerateInput("no sample points")
    if t < 1:
        raise ValueError(f"degree must be at least 1, got {t}")
    if np.any(z == 0):
        raise DegenerateInput("sample points must exclude the origin")
    if not is_conjugate_closed(z, tol=1e-9):
        raise DegenerateInput("sample points must be conjugate-closed")
    n = z.size
    Q, H, center = _arnoldi(z, t)
    at_zero = ConstrainedPolynomial(t, np.zeros(t + 1), H, center).basis(0.0)[0].real
    A = np.vstack([Q.real, Q.imag])
    w = np.full(n, 1.0 / n)

    best_d, best_max = None, math.inf
    history, objective = [], []
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        sw = np.sqrt(np.concatenate([w, w]))
        d = _constrained_solve(A * sw[:, None], at_zero)
        r = np.abs(Q @ d)
        m = float(np.max(r))
        history.append(m)
        objective.append(float(np.sqrt(np.sum(w * r * r))))
        if m < best_max:
            best_max, best_d = m, d
        if m == 0.0:
            converged = True
            break
        if it > 10 and abs(history[-11] - m) <= 1e-9 * m:
            converged = True
            break
        wr = w * r
        w = np.maximum(wr / np.sum(wr), weight_floor)
        w /= np.sum(w)

    poly = ConstrainedPolynomial(degree=t, weights=best_d, hess=H, center=center)
    max_abs = float(np.max(np.abs(poly(z))))
    return OracleResult(
        poly=poly,
        max_abs=max_abs,
        acf_estimate=max_abs ** (1.0 / t),
        grid_size=n,
        iterations_used=it,
        converged=converged,
        history=history,
        objective=objective,
    )


def chebyshev_reference(mu: float, L: float, t: int) -> float:
    """``min max_{[mu, L]} |p|`` over degree-``t`` ``p`` with ``p(0) = 1``, i.e. ``1/T_t((L+mu)/(L-mu))``."""
    if not 0 < mu < L:
        raise ValueError(f"need 0 < mu < L, got mu={mu}, L={L}")
    y = t * math.acosh((L + mu) / (L - mu))
    e = math.exp(-y)
    return 2 * e / (1 + e * e)


def default_grid(t: int) -> int:
    return max(64, 50 * t)


def acf_estimate(K: SpectralShape, t: int, n: int | None = None, **kwargs) -> float:
    n = default_grid(t) if n is None else n
    return lawson_minimax(sample_boundary(K, n), t, **kwargs).acf_estimate
