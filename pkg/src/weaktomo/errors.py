"""Exception types raised by weaktomo."""


class WeakTomoError(ValueError):
    """Base class for all library errors."""


class InvalidDimensionError(WeakTomoError):
    pass


class DimensionMismatchError(WeakTomoError):
    pass


class InvalidStateError(WeakTomoError):
    """Amplitudes that do not describe a normalized state."""


class SingularPostSelectionError(WeakTomoError):
    """Post-selection (nearly) orthogonal to the state, or a vanishing overlap component."""


class InconsistentWeakValuesError(WeakTomoError):
    """Weak values violating the sum rule."""


class DegenerateInputError(WeakTomoError):
    pass


class GeometryDomainError(WeakTomoError):
    """Point outside the domain of the weak-value chart."""


class StepAdjustmentError(WeakTomoError):
    """Finite-difference step could not be adjusted to a stable derivative."""


class QuadratureError(WeakTomoError):
    pass


class InvalidInitError(WeakTomoError):
    pass


class UnsupportedError(WeakTomoError):
    pass
