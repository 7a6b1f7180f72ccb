"""Exception hierarchy shared by all annodis modules."""


class AnnodisError(Exception):
    """Base class for all errors raised by this package."""


class EmptyAnnotations(AnnodisError):
    """An operation that needs at least one annotation got none."""


class SchemaMismatch(AnnodisError):
    """A label token does not belong to the active label schema."""

    def __init__(self, token, row=None):
        self.token = token
        self.row = row
        loc = f" (row {row})" if row is not None else ""
        super().__init__(f"unknown label token {token!r}{loc}")


class MalformedRow(AnnodisError):
    """An input row is structurally broken (missing text, bad split, ...)."""

    def __init__(self, reason, row=None):
        self.row = row
        loc = f" (row {row})" if row is not None else ""
        super().__init__(f"{reason}{loc}")


class UnknownAnnotator(AnnodisError):
    """An annotator id is not known to the model or corpus."""


class ConditioningMismatch(AnnodisError):
    """Annotator given to an unconditioned model, or missing for a conditioned one."""


class EmptySplit(AnnodisError):
    """A corpus split required for training or evaluation is empty."""


class InvalidSelection(AnnodisError):
    """Ensemble selection size outside the allowed [3, n_records] range."""


class EmptyVotes(AnnodisError):
    """Vote aggregation got an empty vote list."""


class TemplateError(AnnodisError):
    """A prompt template is missing a required placeholder."""


class Unparseable(AnnodisError):
    """A model completion could not be mapped to a unique schema label."""


class DimensionMismatch(AnnodisError):
    """Two distributions of different lengths were compared."""


class AlignmentError(AnnodisError):
    """Predictions and test samples could not be aligned by sample id."""


class DomainError(AnnodisError):
    """A statistical function was called outside its domain."""


class InvalidRequest(AnnodisError):
    """A survey bundle request that cannot be satisfied."""


class DuplicateResponse(AnnodisError):
    """A participant already answered this survey item."""


class UnknownItem(AnnodisError):
    """A survey response references an item not in the active bundle."""
