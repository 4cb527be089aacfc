"""Exception types shared across the package."""


class CqaError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(CqaError):
    """A text input failed to parse. Carries optional line/column info."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        prefix = ""
        if line is not None:
            prefix = f"line {line}: " if column is None else f"line {line}, col {column}: "
        super().__init__(prefix + message)


class UnsafeVariable(FormatError):
    """A comparison variable does not occur in any database atom."""


class UnsafeQuery(CqaError):
    """A query has a free variable not bound by a positive atom."""


class SchemaMismatch(CqaError):
    """A tuple, atom, or change refers to a relation or position incompatibly."""


class ChangeTargetMissing(CqaError):
    """A change operation refers to a tuple absent at application time."""


class DeleteTargetMissing(CqaError):
    """A delete operation refers to a tuple absent at application time."""


class BudgetExceeded(CqaError):
    """A solver or search was asked to exceed its configured budget."""


class ForcedOut(CqaError):
    """The conditioned vertex lies in a singleton hyperedge, so no
    independent set can contain it."""


class BaseInconsistent(CqaError):
    """The incremental path requires a consistent base instance."""


class NoRepair(CqaError):
    """No attribute-change map over the candidate values restores consistency."""


class UnsupportedQueryClass(CqaError):
    """The requested fast path does not cover this query class."""


class UnsupportedUpdateSequence(CqaError):
    """The update sequence contains operations outside the supported class."""
