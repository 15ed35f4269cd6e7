"""Spectral shapes and the closed-form rates attached to them.

A shape is a compact set of the complex plane, symmetric about the real axis
and excluding the origin, meant to contain every Jacobian eigenvalue of a
family of games. Four variants are supported:

* :class:`Segment` -- the real interval ``[mu, L]`` (strongly convex minimization);
* :class:`Disc` -- ``|z - c| <= r`` (worst case for strongly monotone fields);
* :class:`Ellipse` -- ``((Re z - c)/a)**2 + (Im z/b)**2 <= 1``, with ``0/0 = 0``
  so that ``b = 0`` is the segment ``[c - a, c + a]``;
* :class:`ImagCross` -- ``i[a, b]`` together with ``-i[a, b]`` (bilinear games).

The ellipse formulas are evaluated in rationalized form. With
``s = sqrt(b**2 + c**2 - a**2)``::

    rho   = (a + b) / (c + s)
    alpha = 2 / (c + s)
    beta  = (a**2 - b**2) / (c + s)**2

which agree algebraically with the textbook expressions
``(c - s)/(a - b)`` and ``2c(c - s)/(a**2 - b**2) - 1`` but involve no
cancellation: they stay accurate when ``a`` is close to ``b`` or both are
small against ``c``, and reduce to ``a/c``, ``1/c``, ``0`` at ``a = b``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import (
    DegenerateInput,
    InadmissibleTau,
    InvalidPerturbation,
    InvalidShape,
    NotConvergent,
    UnrepresentableEllipse,
    UnsupportedShape,
)
from .numerics import TOL

# Shrink factor for the left end of both covering ellipses (mu_bar = x / M_COVER).
M_COVER = 2.0


@dataclass(frozen=True)
class Segment:
    mu: float
    L: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.L)) or not 0 < self.mu <= self.L:
            raise InvalidShape(f"Segment needs 0 < mu <= L, got mu={self.mu}, L={self.L}")


@dataclass(frozen=True)
class Disc:
    c: float
    r: float

    def __post_init__(self):
        if not 0 < self.r < self.c:
            raise InvalidShape(f"Disc needs 0 < r < c, got c={self.c}, r={self.r}")


@dataclass(frozen=True)
class Ellipse:
    a: float
    b: float
    c: float

    def __post_init__(self):
        if self.a < 0 or self.b < 0 or (self.a == 0 and self.b == 0):
            raise InvalidShape(f"Ellipse needs a, b >= 0 and (a, b) != 0, got a={self.a}, b={self.b}")
        if not self.c > self.a:
            raise InvalidShape(f"Ellipse needs c > a so that 0 is excluded, got a={self.a}, c={self.c}")

    @property
    def mu(self) -> float:
        """Left end of the real axis of the ellipse."""
        return self.c - self.a

    @property
    def L(self) -> float:
        return self.c + self.a


@dataclass(frozen=True)
class ImagCross:
    a: float
    b: float

    def __post_init__(self):
        if not 0 < self.a < self.b:
            raise InvalidShape(f"ImagCross needs 0 < a < b, got a={self.a}, b={self.b}")


SpectralShape = Union[Segment, Disc, Ellipse, ImagCross]


@dataclass(frozen=True)
class MomentumParams:
    alpha: float
    beta: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not -1 < self.beta <= 1:
            raise ValueError(f"beta must lie in (-1, 1], got {self.beta}")


@dataclass(frozen=True)
class ConvergenceRegion:
    """The set of eigenvalues on which momentum ``(alpha, beta)`` contracts at rate ``rho``."""

    alpha: float
    beta: float
    rho: float

    def __post_init__(self):
        if not 0 < self.rho < 1:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho}")
        if abs(self.beta) > self.rho**2 * (1 + 1e-12):
            raise ValueError(f"|beta| > rho**2 gives an empty region (beta={self.beta}, rho={self.rho})")

    def as_ellipse(self) -> Ellipse:
        """Center and semiaxes of the region."""
        c = (1 + self.beta) / self.alpha
        a = (self.rho + self.beta / self.rho) / self.alpha
        b = max(self.rho - self.beta / self.rho, 0.0) / self.alpha
        return Ellipse(a=a, b=b, c=c)


def membership(K: SpectralShape, lam: complex, tol: float = TOL.boundary) -> bool:
    lam = complex(lam)
    x, y = lam.real, lam.imag
    if isinstance(K, Segment):
        scale = tol * max(1.0, K.L)
        return abs(y) <= scale and K.mu - scale <= x <= K.L + scale
    if isinstance(K, Disc):
        return abs(lam - K.c) <= K.r + tol * max(1.0, K.c)
    if isinstance(K, Ellipse):
        if K.b == 0:
            scale = tol * max(1.0, K.c)
            return abs(y) <= scale and abs(x - K.c) <= K.a + scale
        u = (x - K.c) / K.a if K.a > 0 else (0.0 if abs(x - K.c) <= tol * max(1.0, K.c) else math.inf)
        v = y / K.b
        return u * u + v * v <= 1 + tol
    if isinstance(K, ImagCross):
        scale = tol * max(1.0, K.b)
        return abs(x) <= scale and K.a - scale <= abs(y) <= K.b + scale
    raise UnsupportedShape(f"unknown shape {K!r}")


def _ellipse_root(E: Ellipse) -> float:
    rad = E.b**2 + E.c**2 - E.a**2
    if rad < 0:
        raise UnrepresentableEllipse(f"a**2 > b**2 + c**2 for {E}")
    return math.sqrt(rad)


def acf(K: SpectralShape) -> float:
    """Asymptotic convergence factor of ``K`` in closed form."""
    if isinstance(K, Segment):
        sl, sm = math.sqrt(K.L), math.sqrt(K.mu)
        return (sl - sm) / (sl + sm)
    if isinstance(K, Disc):
        return K.r / K.c
    if isinstance(K, Ellipse):
        s = _ellipse_root(K)
        # degenerate ellipses share the segment and disc formulas exactly
        if K.b == 0:
            return acf(Segment(K.c - K.a, K.c + K.a))
        if K.a == K.b:
            return K.a / K.c
        rho = (K.a + K.b) / (K.c + s)
        if rho >= 1:
            raise NotConvergent(f"rho = {rho} >= 1 for {K}")
        return rho
    if isinstance(K, ImagCross):
        return math.sqrt((K.b - K.a) / (K.b + K.a))
    raise UnsupportedShape(f"unknown shape {K!r}")


def optimal_momentum(K: SpectralShape) -> MomentumParams:
    if isinstance(K, Segment):
        sl, sm = math.sqrt(K.L), math.sqrt(K.mu)
        return MomentumParams(alpha=4 / (sm + sl) ** 2, beta=((sl - sm) / (sl + sm)) ** 2)
    if isinstance(K, Disc):
        return MomentumParams(alpha=1 / K.c, beta=0.0)
    if isinstance(K, Ellipse):
        s = _ellipse_root(K)
        acf(K)  # raises NotConvergent when appropriate
        if K.b == 0:
            return optimal_momentum(Segment(K.c - K.a, K.c + K.a))
        if K.a == K.b:
            return MomentumParams(alpha=1 / K.c, beta=0.0)
        cs = K.c + s
        return MomentumParams(alpha=2 / cs, beta=(K.a - K.b) * (K.a + K.b) / (cs * cs))
    if isinstance(K, ImagCross):
        raise UnsupportedShape("ImagCross has no direct momentum parameters; map it to the real axis first")
    raise UnsupportedShape(f"unknown shape {K!r}")


def momentum_root_radius(lam: complex, p: MomentumParams) -> float:
    """Largest root modulus of ``z**2 - (1 - alpha*lam + beta) z + beta``.

    The discriminant is evaluated in the factored form
    ``((1 - r)**2 - alpha*lam) * ((1 + r)**2 - alpha*lam)`` with ``r = sqrt(beta)``,
    which keeps double roots (segment end points) accurate to rounding level
    instead of ``sqrt(eps)``.
    """
    lam = complex(lam)
    alpha, beta = p.alpha, p.beta
    r = complex(math.sqrt(beta)) if beta >= 0 else 1j * math.sqrt(-beta)
    al = alpha * lam
    s = 1 + beta - al
    disc = ((1 - r) ** 2 - al) * ((1 + r) ** 2 - al)
    sq = np.sqrt(complex(disc))
    z = (s + sq) / 2 if (s.conjugate() * sq).real >= 0 else (s - sq) / 2
    if z == 0:
        return 0.0
    return float(max(abs(z), abs(beta / z)))


def region_membership(lam: complex, R: ConvergenceRegion) -> bool:
    return momentum_root_radius(lam, MomentumParams(R.alpha, R.beta)) <= R.rho + TOL.boundary


def ellipse_as_region(E: Ellipse) -> ConvergenceRegion:
    p = optimal_momentum(E)
    return ConvergenceRegion(alpha=p.alpha, beta=p.beta, rho=acf(E))


def perturbed_ellipse(mu: float, L: float, eps: float) -> Ellipse:
    """The segment ``[mu, L]`` thickened to imaginary half-width ``eps``."""
    if not 0 < mu < L:
        raise InvalidPerturbation(f"need 0 < mu < L, got mu={mu}, L={L}")
    if not 0 <= eps < (L - mu) / 2:
        raise InvalidPerturbation(f"need 0 <= eps < (L - mu)/2 = {(L - mu) / 2}, got eps={eps}")
    return Ellipse(a=(L - mu) / 2, b=eps, c=(L + mu) / 2)


def perturbed_acf_asymptotic(mu: float, L: float, theta: float) -> float:
    """Leading-order convergence factor of ``perturbed_ellipse(mu, L, L*(mu/L)**theta)``."""
    if not 0 < mu < L:
        raise InvalidPerturbation(f"need 0 < mu < L, got mu={mu}, L={L}")
    if not theta > 0:
        raise InvalidPerturbation(f"theta must be positive, got {theta}")
    t = mu / L
    if theta > 0.5:
        return 1 - 2 * math.sqrt(t)
    if theta == 0.5:
        return 1 - 2 * (math.sqrt(2) - 1) * math.sqrt(t)
    return 1 - t ** (1 - theta)


def perturbed_error_order(mu: float, L: float, theta: float) -> float:
    """Order of the neglected term in :func:`perturbed_acf_asymptotic`."""
    t = mu / L
    if theta > 0.5:
        return t ** min(theta, 1.0)
    if theta == 0.5:
        return t
    return t ** min(1.0, 2 - 3 * theta)


def eg_cover_ellipse(a: float, b: float) -> tuple[float, Ellipse]:
    """Extrapolation step and an ellipse covering the extragradient image of ``ImagCross(a, b)``.

    The image of ``+-i[a, b]`` under ``z -> z - eta*z**2`` is the curve
    ``eta*s**2 +- i*s`` for ``s`` in ``[a, b]``. The ellipse is centered at
    ``eta*b**2`` with imaginary half-width ``b`` (so ``eta*b**2 + i*b`` sits on
    its boundary) and left end ``eta*a**2 / 2``.

    With this ``eta`` the half-width satisfies ``b**2 = 2 * mu_bar * L_bar``.
    """
    if not 0 < a < b:
        raise DegenerateInput(f"need 0 < a < b, got a={a}, b={b}")
    eta = b / (a * math.sqrt(2 * b * b - a * a / M_COVER))
    mu_bar = eta * a * a / M_COVER
    L_bar = 2 * eta * b * b - mu_bar
    return eta, Ellipse(a=(L_bar - mu_bar) / 2, b=b, c=(mu_bar + L_bar) / 2)


def consensus_q(gamma: float, mu: float, tau: float) -> float:
    """Bound on ``|Im z| / Re z`` over the consensus-transformed spectrum."""
    return gamma / (mu + tau * gamma * gamma)


def consensus_admissible(gamma: float, mu: float, L: float, tau: float) -> bool:
    """Whether ``tau`` passes the aperture test ``q <= sqrt(3/2) sqrt(lo/hi)``."""
    if not (tau > 0 and 0 < gamma <= L and mu >= 0):
        return False
    lo = mu + tau * gamma * gamma
    hi = L + tau * L * L
    if tau * gamma * gamma < mu * (1 - 1e-12):
        return False
    return consensus_q(gamma, mu, tau) <= math.sqrt(1.5) * math.sqrt(lo / hi)


def minimal_admissible_tau(gamma: float, mu: float, L: float, rtol: float = 1e-10) -> float:
    """Smallest admissible ``tau`` (to ``rtol``), found by doubling then bisection."""
    hi = max(mu / gamma**2, 1e-300) if mu > 0 else 1.0 / L
    while not consensus_admissible(gamma, mu, L, hi):
        hi *= 2
    lo = hi / 2
    if consensus_admissible(gamma, mu, L, lo):
        # shrink until the lower end fails
        while consensus_admissible(gamma, mu, L, lo) and lo > 1e-300:
            hi, lo = lo, lo / 2
    while hi - lo > rtol * hi:
        mid = (lo + hi) / 2
        if consensus_admissible(gamma, mu, L, mid):
            hi = mid
        else:
            lo = mid
    return hi


def consensus_cover_ellipse(gamma: float, mu: float, L: float, tau: float) -> Ellipse:
    """Ellipse covering the trapezoid that holds the spectrum of ``J + tau J^T J``.

    The trapezoid has real extent ``[mu + tau*gamma**2, L + tau*L**2]`` and
    aperture ``|Im z| <= q * Re z``. The ellipse is centered at the right
    end, its left end is half the trapezoid's left end, and its imaginary
    half-width is ``max(sqrt(mu_bar*L_bar), q*(L + tau*L**2))`` so the top
    corners are always inside.
    """
    if not 0 < gamma <= L:
        raise InadmissibleTau(f"need 0 < gamma <= L, got gamma={gamma}, L={L}")
    if mu < 0:
        raise InadmissibleTau(f"mu must be non-negative, got {mu}")
    if tau <= 0 or tau * gamma * gamma < mu * (1 - 1e-12):
        raise InadmissibleTau(f"need tau*gamma**2 >= mu (tau={tau}, gamma={gamma}, mu={mu})")
    lo = mu + tau * gamma * gamma
    hi = L + tau * L * L
    q = consensus_q(gamma, mu, tau)
    if not consensus_admissible(gamma, mu, L, tau):
        raise InadmissibleTau(
            f"tau={tau} too small: q={q:.6g} exceeds sqrt(3/2)*sqrt({lo:.6g}/{hi:.6g})"
        )
    mu_bar = lo / M_COVER
    L_bar = 2 * hi - mu_bar
    eps = max(math.sqrt(mu_bar * L_bar), q * hi)
    return Ellipse(a=(L_bar - mu_bar) / 2, b=eps, c=(mu_bar + L_bar) / 2)


def consensus_corners(gamma: float, mu: float, L: float, tau: float) -> list[complex]:
    lo = mu + tau * gamma * gamma
    hi = L + tau * L * L
    q = consensus_q(gamma, mu, tau)
    return [(1 + 1j * q) * lo, (1 - 1j * q) * lo, (1 + 1j * q) * hi, (1 - 1j * q) * hi]


def small_polynomial_slack(x, m: float = M_COVER):
    """``1 - ((1 - x)**2 / (1 - x/m)**2 + x)``; non-negative on ``[0, 1]`` for ``m >= 2``."""
    x = np.asarray(x, dtype=float)
    return 1 - ((1 - x) ** 2 / (1 - x / m) ** 2 + x)
