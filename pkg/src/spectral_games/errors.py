"""Exception hierarchy.

Every numeric failure derives from :class:`SpectralGamesError`, so callers
(and the CLI) can tell a violated mathematical precondition apart from a
programming error.
"""


class SpectralGamesError(Exception):
    """Base class for numeric failures raised by this package."""


class NonSquare(SpectralGamesError, ValueError):
    pass


class ConvergenceFailure(SpectralGamesError):
    pass


class InvalidShape(SpectralGamesError, ValueError):
    pass


class UnrepresentableEllipse(SpectralGamesError, ValueError):
    """Ellipse with a**2 > b**2 + c**2: no momentum region matches it."""


class NotConvergent(SpectralGamesError, ValueError):
    """Computed convergence factor is >= 1."""


class UnsupportedShape(SpectralGamesError, TypeError):
    pass


class InvalidPerturbation(SpectralGamesError, ValueError):
    pass


class DegenerateInput(SpectralGamesError, ValueError):
    pass


class InadmissibleTau(SpectralGamesError, ValueError):
    """Consensus weight too small for the covering-ellipse argument."""


class SingularLeastSquares(SpectralGamesError):
    pass


class UnpairedComplexEigenvalue(SpectralGamesError, ValueError):
    pass


class DimensionMismatch(SpectralGamesError, ValueError):
    pass


class NonPositiveDistance(SpectralGamesError, ValueError):
    pass
