"""Exception hierarchy shared across the package."""


class SynthesisError(Exception):
    """Base class for every error raised by qsynth."""


class SizeError(SynthesisError, ValueError):
    """Matrix or circuit dimensions do not agree or exceed the supported range."""


class ValidationError(SynthesisError, ValueError):
    """An input value violates a documented invariant."""


class ArityError(SynthesisError, ValueError):
    """A parameter vector has the wrong length."""


class ConfigurationError(SynthesisError, ValueError):
    """A configuration object is unusable (empty edge set, zero budget, ...)."""


class DepthLimitError(SynthesisError):
    """Search ran out of candidates before reaching the distance threshold.

    The best node seen so far is attached so callers can still emit a
    best-effort circuit.
    """

    def __init__(self, message, best=None, report=None):
        super().__init__(message)
        self.best = best
        self.report = report
