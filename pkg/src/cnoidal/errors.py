"""Exception types raised across the package."""


class DomainError(ValueError):
    """Argument outside the region where a function is defined or convergent."""


class SingularCharacteristicError(DomainError):
    """The pole of the third-kind integrand lies on the integration path."""


class RecurrenceSingularityError(ArithmeticError):
    """A three-term recurrence hit a vanishing leading coefficient."""


class RootCoincidenceError(ArithmeticError):
    """Two closed-form roots coincide and the amplitude weights blow up."""


class UnresolvedBranchError(RuntimeError):
    """No candidate reading of a closed form reproduced the direct integration."""


class IntegrationError(RuntimeError):
    """Step-size underflow or excessive norm drift in the amplitude integrator."""


class GridMismatchError(ValueError):
    """Two trajectories were compared on different sample grids."""
