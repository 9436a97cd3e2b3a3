"""Exception types raised across the planner."""


class QuavError(Exception):
    """Base class for all planner errors."""


# geometry / projection
class OutOfBounds(QuavError, ValueError):
    pass


class ZoneMismatch(UserWarning):
    """Longitude lies far from the requested zone's central meridian."""


class DegeneratePolygon(QuavError, ValueError):
    pass


# graph planning
class ResolutionTooCoarse(QuavError, ValueError):
    pass


class NoPathExists(QuavError):
    pass


class DegenerateStep(QuavError, ValueError):
    pass


class ZeroDistance(QuavError, ValueError):
    pass


# cost
class EmptyPath(QuavError, ValueError):
    pass


# simulation / optimisation
class TooManyQubits(QuavError, ValueError):
    pass


class IndexOutOfRange(QuavError, IndexError):
    pass


class DimensionMismatch(QuavError, ValueError):
    pass


class NoFeasibleSample(QuavError):
    """Every sampled bitstring decoded to an infeasible path.

    ``best`` holds the best-scoring (infeasible) decode so callers can repair it.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


# baselines
class StartInObstacle(QuavError, ValueError):
    pass


class EndInObstacle(QuavError, ValueError):
    pass


class MaxIterationsExceeded(QuavError):
    pass


# harness
class ScenarioParseError(QuavError, ValueError):
    pass


class ScenarioValidationError(QuavError, ValueError):
    pass


class PipelineError(QuavError):
    """Failure inside ``run_quav``, tagged with the stage that raised."""

    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
