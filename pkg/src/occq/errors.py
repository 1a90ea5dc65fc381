"""Shared exception types for the engine."""


class EngineError(Exception):
    """Base class for all engine errors."""


class DomainError(EngineError, ValueError):
    """An argument is outside the range on which the operation is defined."""


class UnsupportedError(EngineError, ValueError):
    """The requested quantity does not exist for this model (e.g. an
    infinite-mean service law where a finite mean is required)."""


class DegenerateError(EngineError, ValueError):
    """Conditioning on a zero-probability event or an empty population."""


class InfeasibleError(EngineError, ValueError):
    """A problem setup whose defining equation has no admissible solution."""


class ConvergenceError(EngineError, RuntimeError):
    """Sampler failed its convergence check. Carries the chain traces and
    diagnostics so the failure can be inspected."""

    def __init__(self, message, traces=None, diagnostics=None):
        super().__init__(message)
        self.traces = traces
        self.diagnostics = diagnostics
