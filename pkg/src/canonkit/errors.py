"""Exception hierarchy shared by all canonkit modules.

The CLI maps these onto stable exit codes: InputError -> 2,
DegeneracyError (and subclasses) -> 3, ConstraintViolationError
(and subclasses) -> 4.
"""


class CanonkitError(Exception):
    """Base class for all canonkit errors."""


class InputError(CanonkitError):
    """Malformed or inconsistent input data."""


class DegeneracyError(CanonkitError):
    """A matrix block that the analysis requires to be regular is singular.

    Usually signals a misclassification or a tolerance failure.
    """


class DivergenceError(DegeneracyError):
    """A group-averaging or Gaussian integral diverges (e.g. double projection)."""


class ConstraintViolationError(CanonkitError):
    """Canonical data violates a constraint required by the requested operation."""


class InconsistentBoundaryError(ConstraintViolationError):
    """Boundary data incompatible with a holonomic or boundary-data constraint."""


class InternalError(CanonkitError):
    """An internal cross-check failed; indicates a bug or a tolerance problem."""
