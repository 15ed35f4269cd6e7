"""First-order game solvers, their parameters, and their exact linear rates.

Every method is the same loop run on a different effective field: momentum
``w - alpha G(w) + beta (w - w_prev)`` where ``G`` is ``F`` itself, the
extrapolated field, the finite-difference ``-J**2`` field or the consensus
field. Gradient-type methods are the ``beta = 0`` case. Optimistic mirror
descent and alternating negative momentum keep extra state and are handled
separately.

For linear games the local rate is the spectral radius of the iteration
matrix, which :func:`predicted_rate` computes exactly.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import shapes
from .errors import DimensionMismatch, NonPositiveDistance
from .games import (
    BilinearGame,
    LinearGame,
    augmented_jacobian,
    transform_consensus,
    transform_eg,
    transform_real,
)
from .numerics import TOL, eigenvalues, spectral_radius, vector_norm


class Family(enum.Enum):
    GRADIENT = "gradient"
    MOMENTUM = "momentum"
    EXTRAGRADIENT = "extragradient"
    EG_MOMENTUM = "eg_momentum"
    BILINEAR_ACCEL = "bilinear_accel"
    CONSENSUS = "consensus"
    CONSENSUS_MOMENTUM = "consensus_momentum"
    NEG_MOMENTUM_ALT = "neg_momentum_alt"
    OMD = "omd"
    HGD = "hgd"


# Consensus counts one field evaluation plus one Jacobian-vector product.
F_EVALS = {
    Family.GRADIENT: 1,
    Family.MOMENTUM: 1,
    Family.OMD: 1,
    Family.NEG_MOMENTUM_ALT: 1,
    Family.EXTRAGRADIENT: 2,
    Family.EG_MOMENTUM: 2,
    Family.BILINEAR_ACCEL: 2,
    Family.HGD: 2,
    Family.CONSENSUS: 2,
    Family.CONSENSUS_MOMENTUM: 2,
}

# Families that step with momentum on a transformed field.
_MOMENTUM_FAMILIES = {
    Family.MOMENTUM,
    Family.EG_MOMENTUM,
    Family.BILINEAR_ACCEL,
    Family.CONSENSUS_MOMENTUM,
}


@dataclass(frozen=True)
class MethodSpec:
    family: Family
    hyper: dict

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        hyper = {k: float(v) for k, v in dict(self.hyper).items()}
        for k, v in hyper.items():
            if not math.isfinite(v):
                raise ValueError(f"hyperparameter {k}={v} is not finite")
        object.__setattr__(self, "hyper", hyper)

    @property
    def f_evals_per_iter(self) -> int:
        return F_EVALS[self.family]

    def __getitem__(self, key: str) -> float:
        return self.hyper[key]


@dataclass(frozen=True)
class IterateTrace:
    distances: np.ndarray
    method: MethodSpec
    game_id: str = ""
    seed: int | None = None
    diverged: bool = False
    extra: dict = field(default_factory=dict, repr=False)


def _ab(bounds: dict) -> tuple[float, float]:
    if "a" in bounds and "b" in bounds:
        return float(bounds["a"]), float(bounds["b"])
    raise ValueError("this family needs spectral bounds a (sigma_min) and b (sigma_max)")


def _norm_bound(bounds: dict) -> float:
    for key in ("b", "L"):
        if key in bounds:
            return float(bounds[key])
    raise ValueError("this family needs a norm bound b (or L)")


def _shape_from(bounds: dict):
    if "shape" in bounds:
        return bounds["shape"]
    if "mu" in bounds and "L" in bounds:
        return shapes.Segment(float(bounds["mu"]), float(bounds["L"]))
    raise ValueError("this family needs a shape or (mu, L)")


def derive_params(family, **bounds) -> MethodSpec:
    """Default hyperparameters for ``family`` from spectral bounds.

    Bounds are keyword arguments: ``a, b`` (singular value range of a
    bilinear game), ``mu, L`` or ``shape`` (eigenvalue region), and
    ``gamma, mu, L`` for the consensus families. Explicit hyperparameters
    (``eta``, ``alpha``, ``beta``, ``tau``) override the derived ones.
    """
    fam = Family(family)
    overrides = {k: bounds.pop(k) for k in ("eta", "alpha", "beta", "tau") if k in bounds}
    hyper: dict = {}
    if fam is Family.GRADIENT:
        if "eta" not in overrides:
            K = _shape_from(bounds)
            if isinstance(K, shapes.Segment):
                hyper["eta"] = 2 / (K.mu + K.L)
            elif isinstance(K, (shapes.Disc, shapes.Ellipse)):
                hyper["eta"] = 1 / K.c
            else:
                raise shapes.UnsupportedShape("gradient step needs a shape with positive real part")
    elif fam is Family.MOMENTUM:
        if not {"alpha", "beta"} <= overrides.keys():
            p = shapes.optimal_momentum(_shape_from(bounds))
            hyper.update(alpha=p.alpha, beta=p.beta)
    elif fam is Family.EXTRAGRADIENT:
        hyper["eta"] = 1 / (2 * _norm_bound(bounds))
    elif fam is Family.OMD:
        # fastest isotropic rate (1/sqrt(2)); unstable beyond about 0.577/b
        hyper["eta"] = 1 / (2 * _norm_bound(bounds))
    elif fam is Family.HGD:
        hyper["eta"] = 1 / _norm_bound(bounds) ** 2
    elif fam is Family.NEG_MOMENTUM_ALT:
        # contracts at 0.85 on an isotropic game with margin to the stability edge
        hyper.update(eta=1 / _norm_bound(bounds), beta=-0.3)
    elif fam is Family.BILINEAR_ACCEL:
        a, b = _ab(bounds)
        hyper.update(alpha=4 / (a + b) ** 2, beta=((b - a) / (b + a)) ** 2, eta=1 / b)
    elif fam is Family.EG_MOMENTUM:
        a, b = _ab(bounds)
        eta, E = shapes.eg_cover_ellipse(a, b)
        p = shapes.optimal_momentum(E)
        hyper.update(eta=eta, alpha=p.alpha, beta=p.beta)
    elif fam in (Family.CONSENSUS, Family.CONSENSUS_MOMENTUM):
        gamma, mu, L = float(bounds["gamma"]), float(bounds.get("mu", 0.0)), float(bounds["L"])
        if "tau" in overrides:
            tau = float(overrides["tau"])
        else:
            # L / gamma**2 unless that fails the aperture test (gamma close to L)
            tau = L / gamma**2
            if fam is Family.CONSENSUS_MOMENTUM and not shapes.consensus_admissible(gamma, mu, L, tau):
                tau = shapes.minimal_admissible_tau(gamma, mu, L) * 1.01
        hyper["tau"] = tau
        if fam is Family.CONSENSUS:
            hyper["alpha"] = 1 / (L + tau * L * L)
        else:
            p = shapes.optimal_momentum(shapes.consensus_cover_ellipse(gamma, mu, L, tau))
            hyper.update(alpha=p.alpha, beta=p.beta)
    hyper.update(overrides)
    return MethodSpec(fam, hyper)


def effective_field(method: MethodSpec, game: LinearGame):
    """The field that ``method`` steps along, or ``game`` itself."""
    fam, h = method.family, method.hyper
    if fam in (Family.EXTRAGRADIENT, Family.EG_MOMENTUM):
        return transform_eg(game, h["eta"])
    if fam is Family.BILINEAR_ACCEL:
        return transform_real(game, h["eta"])
    if fam in (Family.CONSENSUS, Family.CONSENSUS_MOMENTUM):
        return transform_consensus(game, h["tau"])
    return game


def _step_and_beta(method: MethodSpec) -> tuple[float, float]:
    h = method.hyper
    if method.family in _MOMENTUM_FAMILIES:
        return h["alpha"], h["beta"]
    if method.family is Family.CONSENSUS:
        return h["alpha"], 0.0
    return h["eta"], 0.0


def _as_linear(game) -> LinearGame:
    return game.field if isinstance(game, BilinearGame) else game


def run(method: MethodSpec, game, omega0=None, iters: int = 1000, *, game_id: str = "", seed=None) -> IterateTrace:
    """Iterate ``method`` from ``omega0`` and record distances to the equilibrium.

    Two-step methods start with zero velocity (``w_1 = w_0``). A distance
    above the divergence threshold stops the run and sets ``diverged``.
    """
    if isinstance(game, BilinearGame):
        omega0 = game.omega0 if omega0 is None else omega0
        seed = game.seed if seed is None else seed
    game = _as_linear(game)
    if omega0 is None:
        raise ValueError("omega0 is required")
    w = np.array(omega0, dtype=float)
    if w.shape != (game.dim,):
        raise DimensionMismatch(f"omega0 has shape {w.shape}, game dimension is {game.dim}")
    if iters < 0:
        raise ValueError("iters must be non-negative")
    star = game.equilibrium()
    fam, h = method.family, method.hyper
    dist = np.empty(iters + 1)
    dist[0] = vector_norm(w - star)
    w_prev = w.copy()
    F = game.eval
    diverged = False

    if fam is Family.OMD:
        eta = h["eta"]
        f_prev = F(w)
    elif fam is Family.HGD:
        eta = h["eta"]
    elif fam is Family.NEG_MOMENTUM_ALT:
        eta, beta, s = h["eta"], h["beta"], game.split
        A, ws = game.A, star
    else:
        G = effective_field(method, game).eval
        step, beta = _step_and_beta(method)

    n = iters
    for t in range(1, iters + 1):
        if fam is Family.OMD:
            f = F(w)
            w_new = w - 2 * eta * f + eta * f_prev
            f_prev = f
        elif fam is Family.HGD:
            w_new = w - eta * game.vjp(w, F(w))
        elif fam is Family.NEG_MOMENTUM_ALT:
            w_new = w.copy()
            fx = A[:s] @ (w - ws)
            w_new[:s] = w[:s] - eta * fx + beta * (w[:s] - w_prev[:s])
            fy = A[s:] @ (w_new - ws)
            w_new[s:] = w[s:] - eta * fy + beta * (w[s:] - w_prev[s:])
        else:
            w_new = w - step * G(w)
            if beta != 0.0:
                w_new += beta * (w - w_prev)
        w_prev, w = w, w_new
        d = vector_norm(w - star)
        dist[t] = d
        if not d <= TOL.divergence:
            diverged = True
            n = t
            break
    return IterateTrace(distances=dist[: n + 1], method=method, game_id=game_id, seed=seed, diverged=diverged)


def iteration_matrix(method: MethodSpec, game) -> np.ndarray:
    """Exact linear map of one iteration on the (possibly stacked) error state."""
    game = _as_linear(game)
    J = game.A
    d = game.dim
    eye = np.eye(d)
    fam, h = method.family, method.hyper
    if fam is Family.OMD:
        eta = h["eta"]
        return np.block([[eye - 2 * eta * J, eta * J], [eye, np.zeros((d, d))]])
    if fam is Family.HGD:
        return eye - h["eta"] * (J.T @ J)
    if fam is Family.NEG_MOMENTUM_ALT:
        eta, beta, s = h["eta"], h["beta"], game.split
        # state (x, y, x_prev, y_prev); first update x, then y using the new x
        M1 = np.eye(2 * d)
        M1[:s, :] = 0
        M1[:s, :d] = -eta * J[:s]
        M1[:s, :s] += (1 + beta) * np.eye(s)
        M1[:s, d : d + s] = -beta * np.eye(s)
        M1[d : d + s, :] = 0
        M1[d : d + s, :s] = np.eye(s)
        M2 = np.eye(2 * d)
        r = d - s
        M2[s:d, :] = 0
        M2[s:d, :d] = -eta * J[s:]
        M2[s:d, s:d] += (1 + beta) * np.eye(r)
        M2[s:d, d + s :] = -beta * np.eye(r)
        M2[d + s :, :] = 0
        M2[d + s :, s:d] = np.eye(r)
        return M2 @ M1
    Jeff = effective_field(method, game).jacobian_at_star()
    step, beta = _step_and_beta(method)
    if fam in _MOMENTUM_FAMILIES:
        return augmented_jacobian(Jeff, shapes.MomentumParams(step, beta))
    return eye - step * Jeff


def _spectrum(M: np.ndarray) -> np.ndarray:
    # symmetric matrices get exactly real eigenvalues, which matters at the
    # double roots that optimal momentum places on segment end points
    if np.linalg.norm(M - M.T, 1) <= 1e-14 * max(np.linalg.norm(M, 1), 1e-300):
        return np.linalg.eigvalsh((M + M.T) / 2).astype(complex)
    return eigenvalues(M)


def effective_spectrum(method: MethodSpec, game) -> np.ndarray:
    """Eigenvalues of the effective Jacobian, via spectral mapping where it applies."""
    game = _as_linear(game)
    fam, h = method.family, method.hyper
    J = game.A
    if fam in (Family.CONSENSUS, Family.CONSENSUS_MOMENTUM):
        return _spectrum(J + h["tau"] * (J.T @ J))
    if fam is Family.BILINEAR_ACCEL:
        JJ = -(J @ J)
        if np.linalg.norm(JJ - JJ.T, 1) <= 1e-14 * max(np.linalg.norm(JJ, 1), 1e-300):
            return _spectrum(JJ)
        lam = eigenvalues(J)
        return -lam * lam
    lam = _spectrum(J)
    if fam in (Family.EXTRAGRADIENT, Family.EG_MOMENTUM):
        return lam - h["eta"] * lam * lam
    return lam


def predicted_rate(method: MethodSpec, game) -> float:
    """Spectral radius of the iteration matrix of ``method`` on a linear game.

    Momentum families are evaluated eigenvalue by eigenvalue through the
    characteristic quadratic of the augmented operator, which equals the
    augmented spectral radius but stays accurate at its double roots.
    """
    game = _as_linear(game)
    fam = method.family
    if fam in (Family.OMD, Family.NEG_MOMENTUM_ALT):
        return spectral_radius(iteration_matrix(method, game))
    if fam is Family.HGD:
        J = game.A
        ev = np.linalg.eigvalsh(J.T @ J)
        return float(np.max(np.abs(1 - method.hyper["eta"] * ev)))
    lam = effective_spectrum(method, game)
    step, beta = _step_and_beta(method)
    if fam in _MOMENTUM_FAMILIES:
        p = shapes.MomentumParams(step, beta)
        return max(shapes.momentum_root_radius(z, p) for z in lam)
    return float(np.max(np.abs(1 - step * lam)))


def per_evaluation_rate(method: MethodSpec, game) -> float:
    return predicted_rate(method, game) ** (1.0 / method.f_evals_per_iter)


def fit_rate(trace, window: tuple[int, int] | None = None) -> float:
    """``exp`` of the least-squares slope of ``log distance`` against iteration."""
    d = np.asarray(trace.distances if hasattr(trace, "distances") else trace, dtype=float)
    start, end = (0, d.size - 1) if window is None else window
    if not 0 <= start < end <= d.size - 1:
        raise ValueError(f"window {window} outside trace of length {d.size}")
    seg = d[start : end + 1]
    if np.any(seg <= 0):
        raise NonPositiveDistance("distance reached zero inside the fit window; shrink the window")
    t = np.arange(start, end + 1)
    slope = np.polyfit(t, np.log(seg), 1)[0]
    return float(math.exp(slope))


def step_size_asymptotics(a: float, b: float) -> tuple[float, float, float]:
    """EG-momentum parameters normalized by their small-``a/b`` leading terms.

    Returns ``(eta a sqrt 2, alpha b**2 / (2 sqrt 2 a), (1 - beta) b / (2 sqrt 3 a))``.
    """
    spec = derive_params(Family.EG_MOMENTUM, a=a, b=b)
    eta, alpha, beta = spec["eta"], spec["alpha"], spec["beta"]
    return (
        eta * a * math.sqrt(2),
        alpha * b * b / (2 * math.sqrt(2) * a),
        (1 - beta) * b / (2 * math.sqrt(3) * a),
    )
