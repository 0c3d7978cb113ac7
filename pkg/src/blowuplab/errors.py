"""Exception types shared across the laboratory."""


class BlowupLabError(Exception):
    """Base class for all blowuplab errors."""


class HypothesisNotMet(BlowupLabError):
    """A criterion's hypothesis fails on the sampled window.

    Carries enough detail to turn the failure into a report row instead of
    aborting a batch sweep.
    """

    def __init__(self, criterion: str, reason: str):
        super().__init__(f"{criterion}: {reason}")
        self.criterion = criterion
        self.reason = reason


class OrderingViolated(BlowupLabError):
    """Sturm comparison called with Q1 < Q2 somewhere on the sampled span."""


class NonMonotoneTimes(BlowupLabError):
    """Gap-sum input times are not strictly increasing."""


class NonpositiveF(BlowupLabError):
    """A diagnostic needs f > 0 on the whole window and it is not."""


class EndpointNonzero(BlowupLabError):
    """A variation field declared endpoint-vanishing does not vanish there."""


class ZeroVorticity(BlowupLabError):
    """Vorticity-aligned diagnostics are undefined when the point vorticity is zero."""


class ConfigError(BlowupLabError):
    """A harness config file is malformed or inconsistent."""
