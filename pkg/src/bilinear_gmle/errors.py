"""Exception and warning types raised by the package."""


class BilinearError(Exception):
    """Base class for all package errors."""


class InvalidLength(BilinearError, ValueError):
    pass


class NonStationaryParams(BilinearError, ValueError):
    pass


class UnsupportedQuadrature(BilinearError, ValueError):
    pass


class InsufficientHistory(BilinearError, ValueError):
    pass


class NonPositiveVariance(BilinearError, ArithmeticError):
    pass


class SingularDesign(BilinearError, ArithmeticError):
    """Weighted design matrix of the (mu, phi) regression is singular."""


class ZeroDenominator(BilinearError, ArithmeticError):
    pass


class SingularSigma(BilinearError, ArithmeticError):
    """Estimated Hessian-type matrix is not positive definite."""


class BoundaryCase(BilinearError, ValueError):
    pass


class DegenerateSigma44(BilinearError, ValueError):
    pass


class OmegaClippedWarning(UserWarning):
    """Negative eigenvalues of the score long-run covariance were clipped."""
