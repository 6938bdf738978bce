"""Exception hierarchy shared by the library and the command-line front end."""


class SuslovError(Exception):
    """Base class for all errors raised by suslov_hk."""


class PoleError(SuslovError):
    """The birational step map has a pole at the current state."""


class DegenerateStep(PoleError):
    """The step denominator vanishes (up to the determinant tolerance)."""


class SingularStepMatrix(PoleError):
    """The n-dimensional step matrix is singular or too badly conditioned."""


class DegenerateInertia(SuslovError):
    """I13 = I23 = 0, so the planar change of coordinates is not invertible."""


class LevelOutOfRange(SuslovError):
    """The first-integral level lies outside (0, I1*I2/eps**2)."""


class FixedPointState(SuslovError):
    """The state lies on the steady-state line and has no hyperbolic orbit."""


class StepBudgetExceeded(SuslovError):
    pass


class DegenerateFit(SuslovError):
    """Errors are too small to fit a convergence slope."""


class ConfigError(SuslovError):
    pass


class UnknownFigure(ConfigError):
    pass


class PoleAbort(SuslovError):
    """A run stopped at a pole; ``summary`` describes the partial output."""

    def __init__(self, message, summary=None):
        super().__init__(message)
        self.summary = summary
