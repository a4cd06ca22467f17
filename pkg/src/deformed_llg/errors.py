"""Exception hierarchy shared by all modules."""


class DeformedLLGError(Exception):
    """Base class for every error raised by this package."""


class NumericalError(DeformedLLGError, ArithmeticError):
    """A computation could not produce a finite, trustworthy result."""


class PoleError(NumericalError, ZeroDivisionError):
    """The argument sits on a pole of the function being evaluated."""


class BranchCutError(NumericalError, ValueError):
    """A real-valued result was requested on or across a branch cut."""


class DomainError(NumericalError, ValueError):
    """The argument lies outside the supported domain."""


class ConvergenceError(NumericalError):
    """A series or iteration did not meet its stopping rule."""


class StepError(NumericalError, ValueError):
    """The step size violates the integrator's accuracy or stability bound."""


class ConfigError(DeformedLLGError):
    """Invalid command line configuration."""


class ParseError(ConfigError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class ValidationError(ConfigError):
    def __init__(self, key: str, constraint: str):
        self.key = key
        self.constraint = constraint
        super().__init__(f"{key!r}: {constraint}")
