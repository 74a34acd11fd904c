"""Shared exception types.

ValidationError: bad arguments / contract violations detected before any
numerics run (CLI exit code 2). NumericalError: a computation started but
failed to converge or lost a root (CLI exit code 1).
"""


class ValidationError(ValueError):
    pass


class NumericalError(RuntimeError):
    pass
