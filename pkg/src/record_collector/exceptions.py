"""Exception hierarchy shared by all modules."""


class RecordCollectorError(ValueError):
    """Base class for every error raised by this package."""


class InvalidDistributionError(RecordCollectorError):
    """A probability vector violates positivity, normalization or support size."""


class InfeasibleTargetError(RecordCollectorError):
    """Asked for more distinct records than the support holds."""


class ResourceLimitError(RecordCollectorError):
    """A computation would exceed its configured work or memory cap."""

    def __init__(self, message, *, cap=None, estimated=None):
        super().__init__(message)
        self.cap = cap
        self.estimated = estimated


class DivergentSeriesError(RecordCollectorError):
    """The requested quantity is infinite for the given exponent."""


class InsufficientReplicatesError(RecordCollectorError):
    """Fewer than two Monte-Carlo replicates were requested."""


class RunawaySimulationError(RecordCollectorError):
    """A single replicate exceeded the hard draw ceiling."""
