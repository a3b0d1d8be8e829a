"""Exception hierarchy.

Every error carries the CLI exit code it maps to, so the command line front
end can translate failures without a lookup table.
"""


class MarginForgeError(Exception):
    """Base class for all package errors."""

    exit_code = 6


class NumericalFailure(MarginForgeError):
    exit_code = 6


class ParseError(MarginForgeError):
    exit_code = 2


class RangeError(ParseError):
    pass


# rational
class PoleEvaluation(NumericalFailure):
    pass


class NonConvergence(NumericalFailure):
    pass


class InvalidPolynomial(MarginForgeError, ValueError):
    exit_code = 2


class BoundaryPoleZero(MarginForgeError):
    exit_code = 2


class NonSimpleRoots(MarginForgeError):
    exit_code = 2


class StablePlant(MarginForgeError):
    exit_code = 3


class NotNonnegative(NumericalFailure):
    pass


# regions / weights
class InvalidGain(MarginForgeError, ValueError):
    exit_code = 2


class DegenerateRegion(MarginForgeError, ValueError):
    exit_code = 2


class ShiftInvalid(MarginForgeError):
    exit_code = 4


class ShiftHitsCut(ShiftInvalid):
    pass


class ShiftHitsRegion(ShiftInvalid):
    pass


class ShiftBlocksProperness(ShiftInvalid):
    pass


# outer
class QuadratureFailure(NumericalFailure):
    pass


# pick
class DuplicateNodes(MarginForgeError, ValueError):
    exit_code = 2


class Infeasible(MarginForgeError):
    exit_code = 5


class InfeasibleAtZero(Infeasible):
    pass


class IllConditioned(NumericalFailure):
    pass


# approx
class InfeasibleDegree(NumericalFailure):
    pass


class SingularSystem(NumericalFailure):
    pass


class ZeroCountOverflow(NumericalFailure):
    pass


class ReductionFailure(NumericalFailure):
    pass


# margin / synthesis
class NoUnstablePole(StablePlant):
    pass


class UnstableT(NumericalFailure):
    pass


class CancellationFailure(NumericalFailure):
    pass


class HypothesisViolated(MarginForgeError):
    exit_code = 4
