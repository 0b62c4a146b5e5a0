"""Exception hierarchy shared by every module."""


class NcHodgeError(Exception):
    """Base class for all errors raised by the package."""


class UsageError(NcHodgeError, ValueError):
    """A precondition on the arguments was violated."""


class DomainError(NcHodgeError, ValueError):
    """An argument lies outside the analytic domain (poles, branch cuts)."""


class TransportError(NcHodgeError, RuntimeError):
    """Adaptive integration gave up (step-size underflow or step budget).

    ``position`` is the path parameter in [0, 1] of the segment being
    integrated and ``point`` the corresponding complex coordinate.
    """

    def __init__(self, message, position=None, point=None):
        super().__init__(message)
        self.position = position
        self.point = point


class NotConvertibleError(NcHodgeError, ValueError):
    """Descent data violating the acyclicity conditions."""


class DegenerationError(NcHodgeError, RuntimeError):
    """A lifting problem in the BV machinery has no solution at some order."""


class GaugeAdjustmentError(DegenerationError):
    """The gauge selection could not remove the u-dependence of a class."""


class SelfCheckError(NcHodgeError, RuntimeError):
    """A startup constant disagrees with its independent oracle."""


class WindowOverflowError(UsageError):
    """A formal series would leave the supported truncation window.

    ``required`` is the ``(u_min, u_max)`` window the computation needs.
    """

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required
