"""Exception hierarchy.

Input problems derive from :class:`InputError` (a ``ValueError``); failures of
an otherwise valid computation derive from :class:`ComputationError`.  The CLI
maps the two families to distinct exit codes.
"""


class InputError(ValueError):
    pass


class ParseError(InputError):
    def __init__(self, message, position=None, line=None):
        self.position = position
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if position is not None:
            where.append(f"position {position}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class ComputationError(ArithmeticError):
    pass


class PoleError(ComputationError, ZeroDivisionError):
    """A rational function was evaluated at a zero of its denominator."""

    def __init__(self, message, t=None, entry=None):
        self.t = t
        self.entry = entry
        super().__init__(message)


class ReconstructionFailure(ComputationError):
    """The multimodular route could not certify a rational result."""


class FitError(ComputationError):
    pass


class InconsistentSamples(FitError):
    pass


class SingularSystem(FitError):
    pass


class NonConvergence(ComputationError):
    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)
