"""Exception types shared across the package."""


class SivGripError(Exception):
    """Base class for all package errors."""


class ConfigurationError(SivGripError):
    """Invalid or inconsistent configuration.

    Carries a list of individual violation messages when several fields
    are wrong at once.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ContractViolationError(SivGripError):
    """A caller broke an interface contract (bad action, empty mask, ...)."""


class NumericFaultError(SivGripError):
    """A learning update produced a non-finite value; abort the episode."""


class EndOfStreamError(SivGripError):
    """A replayed source was sampled past the end of its log."""
