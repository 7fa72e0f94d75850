"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class LaproxError(Exception):
    exit_code = 3


class UsageError(LaproxError, ValueError):
    exit_code = 1


class GraphParseError(LaproxError, ValueError):
    exit_code = 2

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class GraphTooSmallError(GraphParseError):
    pass


class NumericError(LaproxError, ArithmeticError):
    exit_code = 3


class WalkLimitError(NumericError):
    """A walk exceeded the step safety valve (corrupted or disconnected input)."""


class OracleCapError(LaproxError):
    exit_code = 4
