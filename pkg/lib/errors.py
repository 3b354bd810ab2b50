"""
Error types for the multiquadratic toolkit.

Library code raises these; the command layer in ``api/commands.py`` maps
them onto process exit codes.
"""


class MultiquadError(Exception):
    """Base class for every error raised by the library"""


class InvalidInputError(MultiquadError, ValueError):
    """Malformed arguments: bad indices, permutations, radicands or windows"""


class FactorizationError(InvalidInputError):
    """An integer exceeds what trial division up to the configured bound can certify"""


class SizeLimitError(MultiquadError):
    """Requested dimension is beyond the configured cap"""


class BudgetExceededError(MultiquadError):
    """A precheck estimated more work than the configured budget allows"""

    def __init__(self, what: str, estimate: float, budget: float):
        self.what = what
        self.estimate = estimate
        self.budget = budget
        super().__init__(f"{what}: estimated {estimate:.3g} exceeds budget {budget:.3g}")


class ConfigError(MultiquadError):
    """Experiment or command configuration is invalid"""


class InvariantViolation(MultiquadError):
    """A self-check found two computations that should agree but do not"""
