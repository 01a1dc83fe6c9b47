"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class MpecError(Exception):
    exit_code = 1


class InputError(MpecError, ValueError):
    """Malformed arguments: dimension mismatch, bad file, bad flag."""

    exit_code = 4


class ProblemFormatError(InputError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations) or "invalid problem")


class PreconditionError(InputError):
    """Inputs are well-formed but violate an operation's precondition."""


class SizeError(InputError):
    pass


class UnknownBuiltinError(InputError, LookupError):
    pass


class UnsupportedError(MpecError):
    """Feature outside what the kit can handle (nonconvex Q, non-orthant cone, ...)."""

    exit_code = 5


class MonotonicityError(UnsupportedError):
    pass


class InfeasibleError(MpecError):
    exit_code = 2


class UnboundedError(MpecError):
    exit_code = 3
