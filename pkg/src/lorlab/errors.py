"""Exception hierarchy shared by all lorlab modules."""


class LorlabError(Exception):
    """Base class for every error raised by lorlab."""


class SizeBoundViolation(LorlabError, ValueError):
    """A side length reaches or exceeds the finite diameter of the model space."""


class NotRealisable(LorlabError, ValueError):
    """No comparison configuration exists for the given data."""


class NotCausallyRelated(LorlabError, ValueError):
    """Two (comparison) points are not causally related."""


class DegenerateTriangle(LorlabError, ValueError):
    """A (sub-)triangle collapses, e.g. a split point coincides with a vertex."""


class NoPath(LorlabError, ValueError):
    """A realiser was requested for a pair that is not causally related."""


class ParseError(LorlabError, ValueError):
    """A file could not be parsed into the expected structure."""


class ConsistencyError(LorlabError, ValueError):
    """Stored data contradicts itself (cycles, tau mismatch, ...)."""


class NotMonotone(LorlabError, ValueError):
    """A proposed time function is not strictly increasing along the causal relation."""


class NoAdmissiblePairs(LorlabError, ValueError):
    """An angle probe found no timelike related pairs at any scale."""


class ResolutionExhausted(LorlabError, RuntimeError):
    """A discrete construction ran out of points before it could continue."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class CoverInvalid(LorlabError, ValueError):
    """A diamond cover misses a point of the diamond it should cover."""


class Empty(LorlabError, ValueError):
    """A restriction produced a space without any timelike pair."""


class NotDistinguishing(LorlabError, ValueError):
    """Two distinct points have identical time-separation profiles."""

    def __init__(self, message, pair):
        super().__init__(message)
        self.pair = pair


class TooLargeForExact(LorlabError, ValueError):
    """Exact Gromov-Hausdorff enumeration was requested for spaces that are too large."""


class PreconditionFailed(LorlabError, ValueError):
    """An operation's documented precondition does not hold."""


class ManifestError(LorlabError, ValueError):
    """An experiment manifest failed validation."""

    def __init__(self, message, path=""):
        super().__init__(message)
        self.path = path
