"""Exception types shared across the package.

All validation failures raise a subclass of ``ValueError`` so that callers
can catch one base type; the CLI maps them onto exit codes.
"""


class ShapeError(ValueError):
    """Vector/matrix dimensions are inconsistent or empty where forbidden."""


class DataError(ValueError):
    """Ill-formed dataset content (CSV parsing, never-observed coordinate)."""


class ConfigError(ValueError):
    """Invalid configuration: parameters, schedules, mechanism specs."""


class BandwidthError(ValueError):
    """The bandwidth heuristic is undefined for the given dataset."""


class UnsupportedMechanismError(ValueError):
    """Requested a per-point conditional law from a mechanism that has none."""


class NumericalError(RuntimeError):
    """A numerical routine produced non-finite results."""
