"""Exception types shared across the package."""


class OracleBoundError(Exception):
    """Base class for every domain error raised by this package."""


class SpaceValidationError(OracleBoundError):
    """A state-space descriptor violates its range or ordering invariants."""


class MatrixBuildError(OracleBoundError):
    """Correctness records are missing, duplicated, or reference unknown ids."""


class CascadeConsistencyError(OracleBoundError):
    """A nested-failure vector is not monotone, so the inputs contradict
    each other (for example a dependency coefficient too large for the
    accuracies it is paired with)."""


class FileFormatError(OracleBoundError):
    """An input file does not match its documented schema."""
