"""Exception types shared across the package."""


class CosetTopoError(Exception):
    """Base class for all package errors."""


class GroupConstructionError(CosetTopoError):
    """A recipe or table failed the group axioms or a size guard."""


class GroupAxiomError(GroupConstructionError):
    """An explicit table violates a group axiom (identity, Latin square, inverses, associativity)."""


class BudgetExceeded(CosetTopoError):
    """A simplex, chain or rewriting budget ran out before completion."""

    def __init__(self, message: str, used: int | None = None):
        super().__init__(message)
        self.used = used


class InvariantViolation(CosetTopoError):
    """An internal consistency check failed (signals a bug or corrupt input)."""


class TruncationError(CosetTopoError):
    """A complex was truncated too shallowly for the requested computation."""


class PruningRefused(CosetTopoError):
    """A proposed poset pruning could not be certified homotopy-preserving."""

    def __init__(self, message: str, offending: int):
        super().__init__(message)
        self.offending = offending
