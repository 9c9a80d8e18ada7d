"""Exception hierarchy shared by all modules."""


class FilippovError(Exception):
    """Base class for library errors."""


class MaxOrderExceeded(FilippovError):
    """All Lie derivatives up to ``max_order`` vanish (possible infinite-order contact)."""


class NonIsolatedEquilibria(FilippovError):
    pass


class HypothesisViolation(FilippovError):
    """A standing hypothesis (finite equilibria, isolated pseudo-equilibria,
    at most one tangency per field) fails for the given system."""


class DegenerateSwitching(FilippovError):
    pass


class DegenerateA12(FilippovError):
    pass


class NotSlidingOrEscaping(FilippovError):
    pass


class StiffnessFailure(FilippovError):
    pass


class DeadEnd(FilippovError):
    pass


class BudgetExceeded(FilippovError):
    pass


class ProbeBudgetExceeded(BudgetExceeded):
    pass


class NotChaoticConfiguration(FilippovError):
    pass


class ParseError(FilippovError):
    pass


class SchemaError(FilippovError):
    pass


class UnknownScenario(FilippovError):
    pass


class IoError(FilippovError):
    pass
