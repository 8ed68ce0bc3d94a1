"""Exception hierarchy shared by the solvers and the command line."""


class DTTorqueError(Exception):
    """Base class for all errors raised by :mod:`dt_torque`."""


class DomainError(DTTorqueError, ValueError):
    """An argument lies outside the domain of a function (negative radius, ...)."""


class PreconditionError(DTTorqueError, ValueError):
    """Parameters violate the constraint a formula was derived under."""


class PoleError(DTTorqueError, ArithmeticError):
    """A closed-form expression is evaluated at (or numerically on) one of its poles.

    The general linear solve has no such restriction; use
    :func:`dt_torque.steady.solve_general` instead.
    """


class SingularSystemError(DTTorqueError, ArithmeticError):
    """The 4x4 steady-state system has no unique solution at the given point."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = dict(point or {})


class DegenerateBasisError(DTTorqueError, ValueError):
    """Bright/dark states are undefined because a coupling vanishes."""


class UnsupportedClassificationError(DTTorqueError, ValueError):
    """Regime labels are only defined for equal control amplitudes."""


class SingularAxisError(DomainError):
    """Phase gradients diverge on the vortex core r = 0."""


class ConvergenceTimeout(DTTorqueError, RuntimeError):
    """Time integration did not reach steady state before ``t_max``.

    Attributes
    ----------
    t : float
        Time reached when integration stopped.
    state : CoherenceState
        Last state of the integration.
    metric : float
        Convergence metric at ``t``.
    """

    def __init__(self, message, t, state, metric):
        super().__init__(message)
        self.t = t
        self.state = state
        self.metric = metric
