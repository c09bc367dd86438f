"""Exception types shared across the package."""


class WeylcharError(Exception):
    """Base class for all package-specific errors."""


class NotInAlgebraA(WeylcharError):
    """A symbol pair violates the step-2 parity compatibility."""


class NotElliptic(WeylcharError):
    """Leading term (or Schwartz part) of a symbol is not invertible."""


class FockTruncationTooSmall(WeylcharError):
    """Fock compression does not stabilize under doubling of the cutoff."""


class DepthTooShallow(WeylcharError):
    """Expansion depth does not reach the term required by the operation."""


class MissingClosure(WeylcharError):
    """Operation needs a pointwise evaluator the symbol does not carry."""


class NonConvergentRemainder(WeylcharError):
    """Heat-remainder fit did not converge to the requested tolerance."""


class NonzeroResidue(WeylcharError):
    """Regularized trace requested in strict mode for a symbol with Res != 0."""


class QuadratureNotConverged(WeylcharError):
    """Adaptive quadrature failed to stabilize."""


class BoundaryStencil(WeylcharError):
    """Finite-difference stencil would read outside the chart grid."""


class ChartOverlapMismatch(WeylcharError):
    """Partition-of-unity weights are inconsistent on a chart overlap."""


class NotSymplecticLieAlgebra(WeylcharError):
    """Matrix fails phi^T Omega + Omega phi = 0."""


class NotUnitary(WeylcharError):
    """Matrix-valued map is not unitary at some node."""


class ConfigError(WeylcharError):
    """CLI configuration is malformed."""
