"""Exception hierarchy.

Errors split in two families: ``HypothesisViolation`` covers inputs that break
a mathematical standing assumption (map not a self-map, domain not convex,
...), everything else is a computational failure.  The CLI maps the first
family to exit code 2 and the rest to exit code 1.
"""


class HoloError(Exception):
    """Base class for every error raised by holokit."""

    @property
    def name(self):
        return type(self).__name__


class HypothesisViolation(HoloError):
    """An input violates a standing hypothesis of the computation."""


class ParseError(HoloError):
    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class PoleError(HoloError):
    """A denominator fell below the hard pole floor."""


class EvaluationError(HoloError):
    """Non-finite value produced during evaluation."""


class DomainEscapeError(HoloError):
    def __init__(self, message, point=None, step=None):
        self.point = point
        self.step = step
        super().__init__(message)


class OutsideDomainError(HoloError):
    pass


class UnboundedDomainError(HypothesisViolation):
    pass


class SamplingError(HoloError):
    pass


class DegeneracyError(HoloError):
    pass


class NotSelfMapError(HypothesisViolation):
    def __init__(self, message, point=None):
        self.point = point
        super().__init__(message)


class NotCompactlyContainedError(HypothesisViolation):
    pass


class ConvexityRequiredError(HypothesisViolation):
    pass


class PreconditionError(HypothesisViolation):
    pass


class NotARetractionError(HypothesisViolation):
    pass


class NotAGroupError(HypothesisViolation):
    pass


class NonConvergenceError(HoloError):
    def __init__(self, message, best=None, residual=None, iterations=None):
        self.best = best
        self.residual = residual
        self.iterations = iterations
        super().__init__(message)


class InfeasibleDiscError(HoloError):
    pass


class EmptyFixSetSuspected(HoloError):
    pass


class MobiusFitError(HoloError):
    pass


class NoStabilizationError(HoloError):
    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)
