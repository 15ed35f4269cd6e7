"""Spectral analysis of first-order methods on smooth games.

Shapes in the complex plane bound the Jacobian spectrum of a game; their
convergence factors give the best rate any oblivious first-order method can
achieve, and the optimal momentum parameters achieve it. The package also
builds linear games, runs the solvers and checks predicted rates against
measured ones.
"""
from .errors import SpectralGamesError
from .games import (
    BilinearGame,
    LinearGame,
    augmented_jacobian,
    bilinear_with_singular_values,
    game_spectrum,
    make_bilinear,
    matrix_with_spectrum,
    transform_consensus,
    transform_eg,
    transform_real,
)
from .methods import (
    Family,
    IterateTrace,
    MethodSpec,
    derive_params,
    fit_rate,
    iteration_matrix,
    predicted_rate,
    run,
    step_size_asymptotics,
)
from .oracle import acf_estimate, chebyshev_reference, lawson_minimax, sample_boundary
from .shapes import (
    ConvergenceRegion,
    Disc,
    Ellipse,
    ImagCross,
    MomentumParams,
    Segment,
    acf,
    consensus_cover_ellipse,
    eg_cover_ellipse,
    ellipse_as_region,
    membership,
    momentum_root_radius,
    optimal_momentum,
    perturbed_acf_asymptotic,
    perturbed_ellipse,
    region_membership,
)

__version__ = "0.1.0"

__all__ = [
    "SpectralGamesError",
    "BilinearGame",
    "LinearGame",
    "augmented_jacobian",
    "bilinear_with_singular_values",
    "game_spectrum",
    "make_bilinear",
    "matrix_with_spectrum",
    "transform_consensus",
    "transform_eg",
    "transform_real",
    "Family",
    "IterateTrace",
    "MethodSpec",
    "derive_params",
    "fit_rate",
    "iteration_matrix",
    "predicted_rate",
    "run",
    "step_size_asymptotics",
    "acf_estimate",
    "chebyshev_reference",
    "lawson_minimax",
    "sample_boundary",
    "ConvergenceRegion",
    "Disc",
    "Ellipse",
    "ImagCross",
    "MomentumParams",
    "Segment",
    "acf",
    "consensus_cover_ellipse",
    "eg_cover_ellipse",
    "ellipse_as_region",
    "membership",
    "momentum_root_radius",
    "optimal_momentum",
    "perturbed_acf_asymptotic",
    "perturbed_ellipse",
    "region_membership",
]
