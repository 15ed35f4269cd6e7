"""Linear games, their Jacobians, and the three field transformations.

A game is represented only through its vector field ``F``: the simultaneous
gradient of the players' losses. For the affine fields built here
``F(w) = J (w - w*)`` so the Jacobian is constant and known exactly.
Transformed fields evaluate lazily through the base field (which is what an
iterative method pays for) while also carrying the closed-form Jacobian
used for exact rate predictions.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .errors import DimensionMismatch, UnpairedComplexEigenvalue
from .numerics import TOL, as_matrix, canonical_order, eigenvalues, singular_values

# Per-purpose child streams of the game seed, so adding a consumer never
# shifts the draws of another.
STREAM_MATRIX = 0
STREAM_X_STAR = 1
STREAM_Y_STAR = 2
STREAM_OMEGA0 = 3
STREAM_CONJUGATION = 4


def rng_stream(seed: int, purpose: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(purpose,))))


class VectorField(Protocol):
    dim: int

    def eval(self, w: np.ndarray) -> np.ndarray: ...

    def jacobian_at_star(self) -> np.ndarray: ...

    def equilibrium(self) -> np.ndarray: ...


@dataclass(frozen=True, eq=False)
class LinearGame:
    """Affine field ``F(w) = A (w - w*)``.

    ``split`` marks where the first player's coordinates end; alternating
    methods update ``w[:split]`` before ``w[split:]``.
    """

    A: np.ndarray
    omega_star: np.ndarray
    split: int | None = None

    def __post_init__(self):
        A = as_matrix(self.A, square=True)
        w = np.array(self.omega_star, dtype=float).ravel()
        if A.shape[0] != w.size:
            raise DimensionMismatch(f"A is {A.shape} but omega_star has {w.size} entries")
        w.setflags(write=False)
        split = max(A.shape[0] // 2, 1) if self.split is None else int(self.split)
        if not 0 < split < max(A.shape[0], 2):
            raise DimensionMismatch(f"split {split} outside (0, {A.shape[0]})")
        object.__setattr__(self, "split", split)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "omega_star", w)

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def eval(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        if w.shape != (self.dim,):
            raise DimensionMismatch(f"expected a vector of length {self.dim}, got shape {w.shape}")
        return self.A @ (w - self.omega_star)

    def vjp(self, w, v) -> np.ndarray:
        """``J(w)^T v``."""
        return self.A.T @ np.asarray(v, dtype=float)

    def jacobian_at_star(self) -> np.ndarray:
        return self.A

    def equilibrium(self) -> np.ndarray:
        return self.omega_star


@dataclass(frozen=True, eq=False)
class BilinearGame:
    """``min_x max_y x^T A y - x^T A y* - x*^T A y`` with equilibrium ``(x*, y*)``.

    The induced field is ``(A (y - y*), -A^T (x - x*))``.
    """

    m: int
    payoff: np.ndarray
    x_star: np.ndarray
    y_star: np.ndarray
    omega0: np.ndarray | None = None
    seed: int | None = None

    @property
    def field(self) -> LinearGame:
        m = self.m
        J = np.zeros((2 * m, 2 * m))
        J[:m, m:] = self.payoff
        J[m:, :m] = -self.payoff.T
        return LinearGame(J, np.concatenate([self.x_star, self.y_star]), split=m)

    @property
    def singular_bounds(self) -> tuple[float, float]:
        s = singular_values(self.payoff)
        return float(s[-1]), float(s[0])


def bilinear_with_singular_values(sv, seed: int) -> BilinearGame:
    """Bilinear game whose payoff has exactly the singular values ``sv``.

    The payoff is ``P diag(sv) Q`` with random signed permutations ``P, Q``,
    so the singular values hold bitwise rather than to rounding. Rates at the
    edge of a momentum region depend on the square root of any eigenvalue
    error, which makes exactness worth having in tests.
    """
    sv = np.asarray(sv, dtype=float).ravel()
    m = sv.size
    rng = rng_stream(seed, STREAM_MATRIX)
    rows = rng.permutation(m)
    cols = rng.permutation(m)
    signs = rng.choice([-1.0, 1.0], size=m)
    A = np.zeros((m, m))
    A[rows, cols] = signs * sv
    return _finish_bilinear(m, A, seed)


def _finish_bilinear(m: int, A: np.ndarray, seed: int) -> BilinearGame:
    x_star = rng_stream(seed, STREAM_X_STAR).standard_normal(m)
    y_star = rng_stream(seed, STREAM_Y_STAR).standard_normal(m)
    omega0 = rng_stream(seed, STREAM_OMEGA0).standard_normal(2 * m)
    for v in (A, x_star, y_star, omega0):
        v.setflags(write=False)
    return BilinearGame(m=m, payoff=A, x_star=x_star, y_star=y_star, omega0=omega0, seed=seed)


def make_bilinear(m: int, cond: float, seed: int) -> BilinearGame:
    """Random bilinear game with ``sigma_max / sigma_min == cond``.

    Entries are standard normal; the singular values are then mapped affinely
    onto ``[sigma_max / cond, sigma_max]``, keeping the original largest one.
    """
    if m < 2:
        raise ValueError(f"need m >= 2, got {m}")
    if not cond >= 1:
        raise ValueError(f"need cond >= 1, got {cond}")
    G = rng_stream(seed, STREAM_MATRIX).standard_normal((m, m))
    U, s, Vt = np.linalg.svd(G)
    smax, smin = s[0], s[-1]
    lo = smax / cond
    if smax > smin:
        s_new = lo + (s - smin) * (smax - lo) / (smax - smin)
    else:
        s_new = np.full_like(s, smax)
    s_new[0], s_new[-1] = smax, lo
    A = (U * s_new) @ Vt
    return _finish_bilinear(m, A, seed)


def _pair_spectrum(eigs) -> tuple[list[float], list[complex]]:
    z = list(canonical_order(eigs))
    reals, pairs = [], []
    while z:
        v = z.pop(0)
        if abs(v.imag) <= TOL.pairing * (1 + abs(v)):
            reals.append(float(v.real))
            continue
        target = v.conjugate()
        dists = [abs(u - target) for u in z]
        if not dists or min(dists) > TOL.pairing * (1 + abs(v)):
            raise UnpairedComplexEigenvalue(f"{v} has no conjugate partner")
        z.pop(int(np.argmin(dists)))
        pairs.append(complex(v.real, abs(v.imag)))
    return reals, pairs


def matrix_with_spectrum(eigs, seed: int | None = None) -> np.ndarray:
    """Real block-diagonal matrix with prescribed conjugate-closed spectrum.

    Pairs become ``[[Re, -Im], [Im, Re]]`` blocks and real values ``1x1``
    blocks. With ``seed``, the result is conjugated by a random orthogonal
    matrix (still normal, spectrum unchanged).
    """
    reals, pairs = _pair_spectrum(eigs)
    d = len(reals) + 2 * len(pairs)
    M = np.zeros((d, d))
    i = 0
    for lam in pairs:
        M[i : i + 2, i : i + 2] = [[lam.real, -lam.imag], [lam.imag, lam.real]]
        i += 2
    for x in reals:
        M[i, i] = x
        i += 1
    if seed is not None:
        Q, _ = np.linalg.qr(rng_stream(seed, STREAM_CONJUGATION).standard_normal((d, d)))
        M = Q @ M @ Q.T
    return M


@dataclass(frozen=True, eq=False)
class TransformedField:
    """A lazily evaluated transform of a base field with a closed-form Jacobian."""

    base: LinearGame
    kind: str
    param: float

    @property
    def dim(self) -> int:
        return self.base.dim

    def eval(self, w) -> np.ndarray:
        F = self.base.eval
        w = np.asarray(w, dtype=float)
        if self.kind == "real":
            f = F(w)
            return (F(w - self.param * f) - f) / self.param
        if self.kind == "eg":
            return F(w - self.param * F(w))
        if self.kind == "consensus":
            f = F(w)
            return f + self.param * self.base.vjp(w, f)
        raise ValueError(f"unknown transform {self.kind}")

    def jacobian_at_star(self) -> np.ndarray:
        J = self.base.jacobian_at_star()
        if self.kind == "real":
            return -(J @ J)
        if self.kind == "eg":
            return J - self.param * (J @ J)
        return J + self.param * (J.T @ J)

    def equilibrium(self) -> np.ndarray:
        return self.base.equilibrium()

    def as_linear(self) -> LinearGame:
        return LinearGame(self.jacobian_at_star(), self.equilibrium(), split=self.base.split)


def transform_real(F: LinearGame, eta: float) -> TransformedField:
    """Finite-difference field ``(F(w - eta F(w)) - F(w)) / eta`` with Jacobian ``-J**2``."""
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    return TransformedField(F, "real", float(eta))


def transform_eg(F: LinearGame, eta: float) -> TransformedField:
    """Extrapolated field ``F(w - eta F(w))`` with Jacobian ``J - eta J**2``."""
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    return TransformedField(F, "eg", float(eta))


def transform_consensus(F: LinearGame, tau: float) -> TransformedField:
    """``F + tau J^T F`` with Jacobian ``J + tau J^T J``."""
    if not tau >= 0:
        raise ValueError(f"tau must be non-negative, got {tau}")
    return TransformedField(F, "consensus", float(tau))


def augmented_jacobian(J, p) -> np.ndarray:
    """Jacobian of the two-step momentum map on the stacked state ``(w_t, w_{t-1})``."""
    J = as_matrix(J, square=True)
    d = J.shape[0]
    eye = np.eye(d)
    top = np.hstack([(1 + p.beta) * eye - p.alpha * J, -p.beta * eye])
    bottom = np.hstack([eye, np.zeros((d, d))])
    return np.vstack([top, bottom])


def game_spectrum(F) -> np.ndarray:
    return eigenvalues(F.jacobian_at_star())


def consensus_bounds(J) -> tuple[float, float, float]:
    """``(gamma, mu, L)``: smallest singular value, smallest eigenvalue of the
    symmetric part (floored at 0), and largest singular value of ``J``."""
    J = as_matrix(J, square=True)
    s = singular_values(J)
    sym = np.linalg.eigvalsh((J + J.T) / 2)
    return float(s[-1]), max(float(sym[0]), 0.0), float(s[0])


def monotone_matrix(d: int, mu: float, L: float, seed: int) -> np.ndarray:
    """Random non-normal matrix with Hermitian part ``>= mu I`` and norm ``<= L``."""
    if not 0 < mu <= L:
        raise ValueError(f"need 0 < mu <= L, got mu={mu}, L={L}")
    rng = rng_stream(seed, STREAM_MATRIX)
    G = rng.standard_normal((d, d))
    S = G @ G.T
    S = mu * np.eye(d) + S / np.linalg.norm(S, 2) * (L - mu) / 2
    K = rng.standard_normal((d, d))
    K = K - K.T
    # the skew part leaves the Hermitian part alone; the triangle inequality bounds the norm
    return S + K / np.linalg.norm(K, 2) * (L - np.linalg.norm(S, 2))
