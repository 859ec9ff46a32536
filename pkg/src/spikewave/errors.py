"""Exception types raised by the solvers."""


class SpikewaveError(Exception):
    """Base class for all toolkit errors."""


class NoDecayingBranch(SpikewaveError):
    pass


class ToleranceNotReached(SpikewaveError):
    pass


class DegenerateGroundState(SpikewaveError):
    pass


class QuadratureStall(SpikewaveError):
    pass


class InvalidDecayClass(SpikewaveError):
    pass


class InvalidCase(SpikewaveError):
    pass


class NoGroundState(SpikewaveError):
    pass


class DegenerateUpsilon(SpikewaveError):
    pass


class PeaksTooClose(SpikewaveError):
    pass


class SingularLinearization(SpikewaveError):
    pass


class EigensolverFailure(SpikewaveError):
    pass


class HypothesisViolation(SpikewaveError):
    pass


class InvalidExponent(SpikewaveError):
    pass


class ScheduleViolated(SpikewaveError):
    pass


class NoSignChange(SpikewaveError):
    pass


class GridMismatch(SpikewaveError):
    pass


class MaxIterations(SpikewaveError):
    pass


class JacobianSingular(SpikewaveError):
    pass


class NoInteriorPeak(SpikewaveError):
    pass


class ConfigError(SpikewaveError):
    pass


class PositivityLost(SpikewaveError):
    pass
