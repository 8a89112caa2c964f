"""Exception hierarchy.

Every domain error derives from :class:`ManevError`, so callers (and the CLI)
can separate model violations from programming errors with one ``except``.
"""


class ManevError(ValueError):
    """Base class for domain errors raised by this package."""


class NonPositiveParameter(ManevError):
    pass


class RegimeViolation(ManevError):
    pass


class DegenerateCoefficients(ManevError):
    pass


class TripleCollisionInput(ManevError):
    pass


class DoubleCollisionInput(ManevError):
    pass


class CollisionManifoldPoint(ManevError):
    pass


class InconsistentStart(ManevError):
    pass


class StepFailure(ManevError):
    pass


class OutsideWindow(ManevError):
    pass


class MotionImpossible(ManevError):
    pass


class NotPeriodic(ManevError):
    pass


class IoFailure(ManevError):
    pass
