"""Exception types shared across the toolkit."""


class SomitokitError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(SomitokitError, ValueError):
    """A field does not match the grid it is evaluated on."""


class ConfigError(SomitokitError, ValueError):
    """Invalid or incomplete configuration (bad key, missing parameter, ...).

    ``key`` names the offending configuration entry when known.
    """

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class DomainError(SomitokitError, ValueError):
    """A parameter/state combination left the mathematical domain of a model."""


class DivergenceError(SomitokitError, ArithmeticError):
    """Time integration produced a non-finite or runaway value.

    Carries the time, species and cell of the first offending entry plus the
    partial raster recorded up to that point (may be None for single steps).
    """

    def __init__(self, message, *, t, species, cell, partial=None):
        super().__init__(message)
        self.t = t
        self.species = species
        self.cell = cell
        self.partial = partial


class DegenerateContourError(SomitokitError, ValueError):
    """A nullcline component is identically zero on the requested window."""


class StabilityWarning(UserWarning):
    """Explicit-Euler diffusion number exceeds the stable range."""
