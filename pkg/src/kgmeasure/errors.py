"""Exception types shared across the package."""


class KGMeasureError(Exception):
    """Base class for all package errors."""


class GeometryError(KGMeasureError, ValueError):
    """A point or region violates lattice bounds or a causal precondition."""


class SolverError(KGMeasureError, ValueError):
    """A field solve cannot be carried out on the given grid."""


class SectorError(KGMeasureError, TypeError):
    """Algebra elements or states from incompatible phase spaces were mixed."""


class CompositionError(KGMeasureError, ValueError):
    """Probe couplings cannot be causally ordered as requested."""


class ConditioningError(KGMeasureError, ValueError):
    """Attempted to condition on an outcome of (numerically) zero probability."""


class ConfigError(KGMeasureError, ValueError):
    """A scenario configuration file is malformed or inconsistent."""
