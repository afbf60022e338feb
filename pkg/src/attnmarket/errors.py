"""Exception types shared across the package."""


class AttnMarketError(Exception):
    """Base class for all library errors."""


class UnknownComponent(AttnMarketError):
    """A component index is outside the environment's range."""


class ZeroMassEvent(AttnMarketError):
    """Conditioning on an event with zero prior probability."""


class ZeroProbabilityMessage(AttnMarketError):
    """Updating on a message with zero probability under the current belief."""


class AssumptionViolated(AttnMarketError):
    """The attention cost exceeds some residual information value."""


class ConditionNotVerified(AttnMarketError):
    """An equilibrium construction was requested without the structural
    conditions holding (pass ``force=True`` to build the profile anyway)."""

    def __init__(self, message, reports=None):
        super().__init__(message)
        self.reports = reports or {}


class SubsetSpaceTooLarge(AttnMarketError):
    """Exhaustive subset enumeration was requested for too many senders."""


class NonAoNPolicy(AttnMarketError):
    """A computation requires all senders to follow all-or-nothing tables."""


class RoundLimitExceeded(AttnMarketError):
    """An episode exceeded the round cap (non-terminating policy profile)."""


class BudgetExceeded(AttnMarketError):
    """Exact enumeration would exceed the configured state budget."""


class DegenerateCurve(AttnMarketError):
    """A curve is unusable for fitting (zero or too few entries)."""


class ScenarioError(AttnMarketError):
    """A scenario file failed validation."""
