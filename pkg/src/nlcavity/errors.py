"""Exception types shared across the package."""


class DimensionMismatch(ValueError):
    """Operands live on incompatible spaces (or a mode index is invalid)."""


class ConfigError(ValueError):
    """Scenario configuration is malformed; message is path-qualified."""


class NumericalError(RuntimeError):
    """A numerical procedure failed (step-size underflow, degenerate
    null space, non-physical covariance)."""


class InvariantViolation(RuntimeError):
    """A runtime invariant (trace, positivity, truncation) was violated
    beyond its configured bound."""
