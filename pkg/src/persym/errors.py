"""Exception hierarchy shared by all persym modules."""


class PersymError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(PersymError):
    """Invalid run configuration, CLI flags, or input file."""


class IncompatibleGrids(PersymError):
    """Two grids cover domains of different total length."""


class GridMismatch(PersymError):
    """Operands must live on the same grid (same cell count and domain)."""


class OutOfDomain(PersymError):
    """Point lies outside the domain of an interval grid."""


class NegativeValue(PersymError):
    """Step functions must be nonnegative; pass inputs through absolute_value first."""


class NotPeriodic(PersymError):
    """Operation requires a periodic grid."""


class NotInterval(PersymError):
    """Operation requires a non-periodic (interval) grid."""


class NotIndicator(PersymError):
    """Set operations require values in {0, 1}."""


class NotNormalized(PersymError):
    """Cost function must satisfy J(0) = 0 for this operation."""


class UnknownCost(PersymError):
    """Unrecognized name in the convex cost library."""


class SigmaOutOfRange(PersymError):
    """Kernel exponent must lie in (0, 1)."""


class StepFunctionDivergence(PersymError):
    """The requested functional is genuinely infinite on piecewise-constant inputs."""


class NonpositiveTime(PersymError):
    """Heat-kernel diffusion time must be positive."""


class RangeTooWide(PersymError):
    """Quadrature rule cannot meet its tolerance within the node budget."""


class ToleranceNotMet(PersymError):
    """Adaptive integration exhausted its budget before reaching the target accuracy."""


class DivergentTail(PersymError):
    """Energy over an unbounded region diverges unless J(0) = 0."""


class KernelNotMonotone(PersymError):
    """Equality-case analysis requires a kernel decreasing away from the origin."""


class BudgetExceeded(PersymError):
    """Exhaustive enumeration would exceed the configured instance budget."""
