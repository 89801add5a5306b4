"""Exception hierarchy shared by the compute modules and the CLI.

Configuration problems map to CLI exit code 2; every subclass of
:class:`RegimeError` maps to exit code 3.
"""


class KondoWalkError(Exception):
    """Base class for all package errors."""


class ConfigError(KondoWalkError, ValueError):
    """Invalid or unknown configuration input."""


class LatticeRangeError(KondoWalkError, IndexError):
    """A lattice position or internal label lies outside the valid range."""


class RegimeError(KondoWalkError, ArithmeticError):
    """A numerical routine was asked to work outside its valid regime."""


class SingularParameterError(RegimeError):
    """A closed-form denominator or linear system is singular."""


class BulkRegimeError(RegimeError):
    """The phase lies inside a continuum band where transfer eigenvalues are complex."""


class UnsupportedParameterError(RegimeError):
    """The requested parameter combination has no implemented closed form."""


class DimensionCapError(RegimeError):
    """A dense matrix would exceed the configured dimension cap."""


class FitQualityError(RegimeError):
    """An exponential fit did not reach the required coefficient of determination."""


class EigensolverError(RegimeError):
    """The dense eigensolver failed or produced inaccurate eigenpairs."""


class BranchAmbiguityWarning(UserWarning):
    """A principal-branch square root was taken exactly on its branch cut."""
