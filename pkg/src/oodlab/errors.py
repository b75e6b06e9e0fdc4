"""Exception hierarchy shared by every oodlab module."""


class OodLabError(Exception):
    """Base class for all oodlab errors."""


class DomainParameterError(OodLabError, ValueError):
    """A probability, prior or mixture weight is outside its valid range."""


class EvaluationError(OodLabError, ValueError):
    """A hypothesis or ranker cannot be evaluated against a domain."""


class SpaceSizeError(OodLabError):
    """An enumeration would exceed the desk-scale cap."""


class EmptySpaceError(OodLabError, ValueError):
    """An optimisation was requested over an empty collection."""


class LabelRangeError(OodLabError, ValueError):
    """Labels fall outside the range an operation requires."""


class ShapeError(OodLabError, ValueError):
    """Network or input dimensions are inconsistent."""


class RelationError(OodLabError, ValueError):
    """Two architectures do not satisfy the required ordering."""


class RealizabilityError(OodLabError):
    """A constrained learner found no feasible member."""


class NoCounterexampleError(OodLabError):
    """A counterexample search exhausted its candidates without success."""


class LabFileError(OodLabError):
    """A configuration or data file is malformed."""
