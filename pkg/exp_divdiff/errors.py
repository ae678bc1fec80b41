"""
Exception hierarchy for the expdd package.

Every error raised on purpose by the library derives from `ExpddError` and
carries the process exit code the command-line interface maps it to:

- `ArgumentError`    : invalid parameters (exit code 2).
- `ParseError`       : node lists or node files that cannot be parsed (exit code 2).
- `DomainError`      : non-finite nodes or scales (exit code 3).
- `RangeError`       : values whose logarithm cannot be represented (exit code 3).
- `ConvergenceError` : series or Taylor recurrences hitting their term cap (exit code 3).
"""


class ExpddError(Exception):
    """Base class for all expdd errors."""
    exit_code = 3


class ArgumentError(ExpddError, ValueError):
    """Raised when an argument is outside the documented range."""
    exit_code = 2


class ParseError(ArgumentError):
    """Raised when a node token or node file cannot be parsed."""


class DomainError(ExpddError, ValueError):
    """Raised for non-finite nodes, scales or parameters."""


class RangeError(ExpddError, ArithmeticError):
    """Raised when a result overflows the representable range."""


class ConvergenceError(ExpddError, ArithmeticError):
    """Raised when a series does not converge within its term cap."""
