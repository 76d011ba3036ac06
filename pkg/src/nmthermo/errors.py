"""Exception hierarchy.

``ValidationError`` subclasses signal bad inputs (CLI exit status 2),
``NumericalError`` subclasses signal a failure during computation (exit 3).
"""


class ValidationError(ValueError):
    pass


class NumericalError(ArithmeticError):
    pass


class BlochOutOfBall(ValidationError):
    pass


class ParameterOutOfRange(ValidationError):
    pass


class ScheduleOutOfRange(ValidationError):
    pass


class IntegrandDivergence(ValidationError):
    pass


class InfiniteRelativeEntropy(NumericalError):
    pass


class SingularMap(NumericalError):
    pass


class SingularRate(NumericalError):
    pass


class PureStateSingularity(NumericalError):
    pass


class GridTooCoarse(NumericalError):
    pass


class MaxSubdivisions(NumericalError):
    pass


class StepUnderflow(NumericalError):
    pass
