"""Exception types raised by the solver and its diagnostics."""


class SpecRescaleError(Exception):
    """Base class for all package errors."""


class NonHermitianInput(SpecRescaleError, ValueError):
    pass


class InvalidAxis(SpecRescaleError, ValueError):
    pass


class GridMismatch(SpecRescaleError, ValueError):
    pass


class EmptyInnerShell(SpecRescaleError, ArithmeticError):
    pass


class StepUnderflow(SpecRescaleError, ArithmeticError):
    """Adaptive step fell below ``dt_min``; usually a near-singular state."""


class NonFiniteState(SpecRescaleError, ArithmeticError):
    pass


class ZeroGradient(SpecRescaleError, ArithmeticError):
    pass


class ExtentTooLarge(SpecRescaleError, ValueError):
    pass


class SizeMismatch(SpecRescaleError, ValueError):
    pass


class CycleDegenerate(SpecRescaleError, ArithmeticError):
    pass


class NonGridSeparation(SpecRescaleError, ValueError):
    pass


class InconsistentTables(SpecRescaleError, ValueError):
    pass


class NonPositiveValues(SpecRescaleError, ValueError):
    pass


class InsufficientPoints(SpecRescaleError, ValueError):
    pass


class EmptySeries(SpecRescaleError, ValueError):
    pass


class ConfigError(SpecRescaleError, ValueError):
    pass


class MissingCheckpoint(SpecRescaleError, FileNotFoundError):
    pass


class CheckpointFormatError(SpecRescaleError, ValueError):
    pass
