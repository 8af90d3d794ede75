"""Exception types shared across the package."""


class CycleError(ValueError):
    """The edge set contains a directed cycle, so it is not a strict partial order."""


class NotInSet(KeyError):
    """A job was expected to be a member of the given job set."""


class InvalidInput(ValueError):
    """A schedule or system handed to a conversion does not meet its precondition."""


class CapacityDeficit(ValueError):
    """The capacity profile cannot hold the given number of jobs."""


class TooLarge(ValueError):
    """Instance exceeds the configured limit of the exact oracle."""


class NoSolution(RuntimeError):
    """The horizon search failed even at the trivially sufficient horizon."""


class InvalidOverride(ValueError):
    """A parameter override violates the structural constraints."""


class GuessExhausted(RuntimeError):
    """A guess vector ran out of entries before the split loop finished.

    Signals an inconsistent guess; enumerating callers treat it as a prune.
    """


class PrecongruenceViolated(ValueError):
    """Schedule fed to the final conversion does not satisfy the canonical order
    conditions."""


class BudgetExceeded(RuntimeError):
    """The solver used more search nodes than the configured budget."""

    def __init__(self, nodes: int, limit: int) -> None:
        super().__init__(f"search budget exceeded: {nodes} nodes > limit {limit}")
        self.nodes = nodes
        self.limit = limit


class BadParams(ValueError):
    """Invalid arguments to an instance generator."""


class Infeasible(RuntimeError):
    """Every solver branch returned no schedule (should be unreachable)."""
