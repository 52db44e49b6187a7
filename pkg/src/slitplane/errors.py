"""Exception types shared across the package.

The CLI maps these onto exit codes (see ``slitplane.cli``).
"""


class UsageError(ValueError):
    """Malformed input or mismatched arguments."""


class DomainError(ValueError):
    """Argument outside the domain of a series operation (e.g. log of c0 != 1)."""


class ComputationError(RuntimeError):
    """Two independent computation routes disagreed. Always a bug."""


class PrecisionError(ArithmeticError):
    """Numeric classification or residual check failed at the working precision."""
