"""Exception hierarchy shared across the package."""


class SignedReservoirError(Exception):
    """Base class for all package errors."""


class SpecError(SignedReservoirError, ValueError):
    """Invalid parameters or experiment spec."""


class ZeroVarianceError(SignedReservoirError, ValueError):
    pass


class DivergenceError(SignedReservoirError, ArithmeticError):
    """A signal integration produced a non-finite state."""

    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


class ConstructionError(SignedReservoirError):
    pass


class CapacityError(SignedReservoirError, ValueError):
    pass


class NormalizationError(SignedReservoirError, ArithmeticError):
    pass


class InputLengthError(SignedReservoirError, ValueError):
    pass


class ReservoirInstabilityError(SignedReservoirError, ArithmeticError):
    """Reservoir state became non-finite.

    ``context`` carries whatever the caller knows about the network (for
    example the flip fraction) so sweep logs can say which realization failed.
    """

    def __init__(self, message: str, step: int, context: dict | None = None):
        super().__init__(message)
        self.step = step
        self.context = dict(context or {})
