"""Exception types shared across the package."""


class SeqStarError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(SeqStarError):
    """Operands or weights do not agree in shape."""


class EmptyStarError(SeqStarError):
    """A star's predicate polytope is infeasible.

    Public operations never return empty stars; hitting this means either a
    caller constructed an infeasible predicate by hand or an internal
    invariant broke.
    """


class UnboundedStarError(SeqStarError):
    """A range query hit an unbounded direction, i.e. a malformed predicate."""


class PredicateMismatchError(SeqStarError):
    """Shared-variable operations require structurally identical predicates."""


class SplitBudgetError(SeqStarError):
    """Exact case splitting would exceed the configured star budget."""


class ModelFormatError(SeqStarError):
    """A model or dataset file failed parsing, schema, or dimension checks."""


class IncompatibleModeError(SeqStarError):
    """The requested analysis mode cannot be applied to this network."""
