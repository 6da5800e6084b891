"""Exception types shared across the package."""


class EmptySetError(ValueError):
    """A signature was requested for an empty set."""


class EmptyRowError(RuntimeError):
    """The counter row selected for a signature query holds no elements.

    Can happen for the level-sampled counter sketch when the selected row is
    sparsely populated; callers are expected to record the frequency of this
    error rather than fall back silently.
    """


class IllegalStreamError(ValueError):
    """A legal-stream-only structure received a non-legal update."""


class RecoveryError(RuntimeError):
    """The recovery provider failed while rebuilding a sketch."""


class BandingInfeasibleError(ValueError):
    """No (bands, rows) pair satisfies the requested constraints."""
