"""Exception hierarchy.

``HypothesisViolation`` covers inputs that break a standing assumption of the
theory (degenerate index, inadmissible ray, ...). The CLI maps it to exit
status 2; everything else is an internal failure.
"""


class HypothesisViolation(ValueError):
    pass


class DegenerateIndexError(HypothesisViolation):
    pass


class InvalidIndexError(HypothesisViolation):
    pass


class InadmissibleMuError(HypothesisViolation):
    pass


class FullPlaneConeError(HypothesisViolation):
    pass


class ZeroOnContourError(ArithmeticError):
    pass


class WindingConvergenceError(ArithmeticError):
    pass


class RootRefinementError(ArithmeticError):
    pass


class ConservationError(ArithmeticError):
    pass


class CertificateError(RuntimeError):
    pass


class CoverageError(ValueError):
    pass
