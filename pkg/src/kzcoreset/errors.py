"""Exception types shared across the package.

The CLI maps these onto exit codes: InputError and DomainError exit with 2,
InvariantError with 3.
"""


class InputError(ValueError):
    """Malformed or out-of-contract input (bad file, bad parameter, bad ref)."""


class DomainError(ValueError):
    """Input is well formed but the requested quantity is undefined on it."""


class InvariantError(RuntimeError):
    """An internal consistency check failed; indicates a bug, not bad input."""
