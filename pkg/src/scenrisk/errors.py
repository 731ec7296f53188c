"""Exception types shared across the package."""


class ScenRiskError(Exception):
    """Base class for all scenrisk errors."""


class SpaceMismatchError(ScenRiskError):
    """Operands live on different probability spaces."""


class UnsupportedSpaceError(ScenRiskError):
    """The operation needs a space shape (e.g. uniform atoms) that is not given."""


class SpaceTooCoarseError(ScenRiskError):
    """Atoms are too heavy to realize the requested construction tolerance."""


class CoercivityError(ScenRiskError):
    """No minimizing bracket found: the cash-additive hull objective is unbounded below."""


class UnresolvedConjugateError(ScenRiskError):
    """A conjugate value is only available as a lower bound, not a certified value."""


class InvalidOrliczError(ScenRiskError):
    """A scalar function violates the required shape axioms."""
