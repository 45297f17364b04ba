"""Exception and warning taxonomy shared across the pipeline."""


class GenMetricError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(GenMetricError):
    """A manifest or record violated a schema invariant.

    ``kind`` is a stable machine-readable tag (e.g. ``"ProbSumError"``,
    ``"OffGridCoordinate"``, ``"DuplicateClass"``); ``field`` names the
    offending field when one can be singled out.
    """

    def __init__(self, kind: str, message: str, field: str | None = None):
        super().__init__(f"{kind}: {message}")
        self.kind = kind
        self.field = field


class IngestAbort(GenMetricError):
    """Strict-mode ingestion stopped at the first invalid line."""

    def __init__(self, source: str, line_no: int, cause: ValidationError):
        super().__init__(f"{source}:{line_no}: {cause}")
        self.source = source
        self.line_no = line_no
        self.cause = cause


class EmptyCellError(GenMetricError):
    """A cell had no test records where at least one was required."""


class NoSamplesForClassError(GenMetricError):
    """Error rate requested for a class with zero samples."""


class EmptyMetricsError(GenMetricError):
    """Cell statistics requested over an empty list of class metrics."""


class EmptyFeasibleSetError(GenMetricError):
    """Trade-off bounds excluded every grid cell."""


class SliceUnavailableError(GenMetricError):
    """The fixing level of the requested 2D slice is not on the axis."""


class InsufficientKeysError(GenMetricError):
    """Fewer than two common weight counts; no pairs to sign-compare."""


class InfeasiblePlantError(GenMetricError):
    """The synthesis profile cannot make the planted cell the unique optimum."""


class GenMetricWarning(UserWarning):
    """Base class for non-fatal diagnostics."""


class NoSliceWarning(GenMetricWarning):
    """Neither the SSIM=1 nor the zero-shot=0 slice exists on the axes."""


class DuplicateSampleWarning(GenMetricWarning):
    """Repeated sample_id within one cell and split (legitimate retrials)."""


class MissingCellsWarning(GenMetricWarning):
    """Marginal sums cover unequal cell counts across levels."""


class UnknownFieldWarning(GenMetricWarning):
    """A record carried fields outside the schema (ignored when lenient)."""
