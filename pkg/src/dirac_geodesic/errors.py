"""Exception hierarchy shared by all modules."""


class DiracGeodesicError(Exception):
    """Base class for all library errors."""


class InputShapeError(DiracGeodesicError, ValueError):
    pass


class DomainError(DiracGeodesicError, ValueError):
    pass


class ConfigurationError(DiracGeodesicError, ValueError):
    pass


class ProjectionSingularityError(DiracGeodesicError, ValueError):
    """Raised when a point sits in the singular set of a closest-point map."""


class IntegrityError(DiracGeodesicError, ValueError):
    """Raised when a field violates its geometric invariant (on-manifold, tangency, same base)."""


class NoHarmonicSpinorError(DiracGeodesicError, ValueError):
    pass


class StepSizeError(DiracGeodesicError, ValueError):
    pass


class ChartDomainError(DiracGeodesicError, ValueError):
    pass


class ResourceError(DiracGeodesicError, MemoryError):
    pass


class BlowupError(DiracGeodesicError, FloatingPointError):
    """Raised when a flow produces non-finite values or sup F exceeds the blowup threshold.

    Carries the last valid state and the diagnostics recorded up to the failure.
    """

    def __init__(self, message, last_state=None, trajectory=None):
        super().__init__(message)
        self.last_state = last_state
        self.trajectory = trajectory if trajectory is not None else []
