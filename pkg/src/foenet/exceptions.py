"""Exception hierarchy.

Every error raised deliberately by the package derives from ``FoenetError``.
Errors that are really bad arguments also derive from ``ValueError`` so that
callers written against the scikit-learn conventions keep working.
"""


class FoenetError(Exception):
    pass


class InvalidParameter(FoenetError, ValueError):
    pass


class DimensionMismatch(FoenetError, ValueError):
    pass


# data
class EmptyEnrollment(FoenetError, ValueError):
    pass


class InsufficientSpeakers(FoenetError, ValueError):
    pass


class BothSidesAbsent(FoenetError, ValueError):
    pass


class TooFewTrials(FoenetError, ValueError):
    pass


class SchemaError(FoenetError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class VersionMismatch(FoenetError):
    pass


# model / training
class BatchTooSmall(FoenetError, ValueError):
    pass


class NonFiniteError(FoenetError, FloatingPointError):
    pass


class CacheMismatch(FoenetError, ValueError):
    pass


class EmptyDataset(FoenetError, ValueError):
    pass


class DegenerateValidation(FoenetError, ValueError):
    pass


# baselines
class ZeroVector(FoenetError, ValueError):
    pass


class MissingCalibration(FoenetError, ValueError):
    pass


class DegenerateCalibration(FoenetError, ValueError):
    pass


# evaluation
class DegenerateClasses(FoenetError, ValueError):
    pass


class NoImposterTrials(DegenerateClasses):
    pass


class NoTargetTrials(DegenerateClasses):
    pass


class MismatchedTrialSets(FoenetError, ValueError):
    pass
