"""Exception types shared across the package."""


class NCTripleError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(NCTripleError, ValueError):
    """Invalid grid, parameter set or configuration file."""


class DomainError(NCTripleError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ShapeError(NCTripleError, ValueError):
    """Objects sampled on incompatible grids."""


class PrecisionError(NCTripleError, ArithmeticError):
    """An iterative evaluation failed to reach its tolerance."""
