"""Exception hierarchy shared by all modules."""


class ReactionModelError(Exception):
    """Base class for errors raised by this package."""


class InvalidDistanceError(ReactionModelError, ValueError):
    def __init__(self, d):
        super().__init__(f"code distance must be an odd integer >= 3, got {d!r}")
        self.distance = d


class InvalidRoundsError(ReactionModelError, ValueError):
    def __init__(self, r):
        super().__init__(f"number of syndrome rounds must be an integer >= 1, got {r!r}")
        self.rounds = r


class InfeasibleCommunicationError(ReactionModelError):
    """The per-injection time budget is already spent on communication alone."""


class InfeasibleBudgetError(ReactionModelError):
    """No architecture meets the logical error budget."""


class DistanceCapError(InfeasibleBudgetError):
    """The code-distance search hit its ceiling before meeting the budget."""


class DeadlockError(ReactionModelError):
    """A job waits on dependencies that can never complete."""


class ConfigError(ReactionModelError, ValueError):
    """Configuration failed schema validation or referenced an unknown preset."""
