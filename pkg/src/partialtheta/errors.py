"""Exception hierarchy.

Every error carries a CLI exit code so the command layer can map failures
without knowing about individual exception types.
"""


class PartialThetaError(Exception):
    exit_code = 4


class PreconditionError(PartialThetaError, ValueError):
    exit_code = 3


class UnsupportedType(PreconditionError):
    pass


class GroupTooLarge(PreconditionError):
    pass


class ModeMismatch(PreconditionError):
    pass


class StokesHyperplane(PreconditionError):
    pass


class PoleTooClose(PreconditionError):
    pass


class ContourThroughPole(PreconditionError):
    pass


class SineSingularity(PreconditionError):
    pass


class NumericError(PartialThetaError, ArithmeticError):
    exit_code = 4


class NonConvergent(NumericError):
    pass


class QuadratureBudgetExceeded(NumericError):
    pass


class TailBoundTooLarge(NumericError):
    pass


class SingularEvaluationFailed(NumericError):
    pass


class NoConvergence(NumericError):
    pass


class InternalInconsistency(PartialThetaError, AssertionError):
    exit_code = 5
