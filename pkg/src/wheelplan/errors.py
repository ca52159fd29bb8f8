"""Domain error types shared across the package."""


class WheelplanError(Exception):
    """Base class for all domain errors."""


class ContractViolation(WheelplanError):
    """An operation was called outside its documented preconditions."""


class ParseError(WheelplanError):
    """Malformed input file. Carries the byte offset where parsing failed."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class InvalidScene(WheelplanError):
    """Scene description cannot be rendered (e.g. camera inside an obstacle)."""


class NoFreeSpace(WheelplanError):
    """No Free cell available for snapping or sampling."""


class NoPathFound(WheelplanError):
    """Planner exhausted its search without connecting start and goal."""


class InsufficientSamples(WheelplanError):
    """Too few valid samples to fit a model (fewer than 3)."""


class DegenerateFit(WheelplanError):
    """Plane fit is rank-deficient; carries the a1=0 fallback fit."""

    def __init__(self, message: str, fit=None):
        super().__init__(message)
        self.fit = fit


class FrameGap(WheelplanError):
    """Intermediate-goal walk hit a waypoint that is neither visible nor in range."""
