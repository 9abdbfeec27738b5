"""Error types raised by the library."""


class RealEntError(Exception):
    """Base class for library errors."""


class ConfigurationError(RealEntError, ValueError):
    """Invalid parameters (for example mu == 0 or mu * t < 0)."""


class SingularInputError(RealEntError, ValueError):
    """Evaluation requested at or too close to a critical point."""


class DomainError(RealEntError, ValueError):
    """Argument outside the domain an operation supports."""


class DegenerateMapError(RealEntError, ValueError):
    """The requested map collapses to a lower degree."""


class UnsupportedModalityError(RealEntError, ValueError):
    """Operation requires a unimodal map but the parameter is not unimodal."""
