"""Exception types shared across the package."""


class KfieldError(Exception):
    """Base class for all library errors."""


class ExprSyntaxError(KfieldError):
    """Malformed expression text; carries the byte offset of the failure."""

    def __init__(self, message, offset, expected=None):
        self.offset = offset
        self.expected = expected
        hint = f" (expected {expected})" if expected else ""
        super().__init__(f"{message} at offset {offset}{hint}")


class UnknownFunctionError(KfieldError):
    def __init__(self, name, offset):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown function '{name}' at offset {offset}")


class UnboundVariableError(KfieldError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"unbound variable '{name}'")


class DomainError(KfieldError):
    """Evaluation left the real domain (log of nonpositive, x/0, 0^negative, ...)."""


class SchemaError(KfieldError):
    """System JSON violates the documented schema."""


class FreeVariableError(KfieldError):
    def __init__(self, names, context=""):
        self.names = tuple(sorted(names))
        where = f" in {context}" if context else ""
        super().__init__(f"unknown variable(s) {', '.join(self.names)}{where}")


class FormalismError(KfieldError):
    """Expression/field structure contradicts the declared formalism."""


class DimensionMismatchError(KfieldError):
    pass


class ShapeMismatchError(KfieldError):
    pass


class NoUniqueReebError(KfieldError):
    pass


class SingularHessianError(KfieldError):
    pass


class NoConvergenceError(KfieldError):
    def __init__(self, iterations, residual):
        self.iterations = iterations
        self.residual = residual
        super().__init__(f"no convergence after {iterations} iterations (residual {residual:.3e})")


class GridTooSmallError(KfieldError):
    pass


class MissingFieldError(KfieldError):
    pass


class CflViolationError(KfieldError):
    pass


class NonFiniteError(KfieldError):
    pass


class StepFailureError(KfieldError):
    pass


class UnknownEntryError(KfieldError):
    pass


class BadParamError(KfieldError):
    pass


class UnknownSolutionError(KfieldError):
    pass
