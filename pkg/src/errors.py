"""
Exception hierarchy shared by the library and the CLI
"""

# Exit codes used by src/cli.py
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class B2DTError(Exception):
    """Base class for data errors (exit code 2)"""
    exit_code = EXIT_DATA


class OutOfBoundsError(B2DTError, IndexError):
    pass


class NotFoundError(B2DTError, LookupError):
    pass


class ParseError(B2DTError, ValueError):
    """Input could not be parsed; carries the 1-based line number when known"""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ContainerFormatError(B2DTError, ValueError):
    pass


class ConfigError(B2DTError, ValueError):
    exit_code = EXIT_USAGE


class HopBudgetExceeded(B2DTError, RuntimeError):
    pass


class UsageError(Exception):
    exit_code = EXIT_USAGE
