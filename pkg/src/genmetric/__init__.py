"""Practical generalization benchmarking over a 3D sweep grid.

The pipeline: prediction records (per sample, per sweep condition) are
validated and grouped into grid cells; each cell condenses per-class
error-rate and kappa-diversity distributions into six statistics; the
trade-off point is the constrained objective minimum over the grid; the
no-noise and no-zero-shot slices are compared against externally computed
complexity measures via pairwise sign errors.
"""

from .classmetrics import (
    ClassMetrics,
    ConfusionCounts,
    assign_rule,
    cell_class_metrics,
    confusion_counts,
    generalization_gap,
    kappa,
    per_class_error_rate,
    rule_assignments,
)
from .consistency import (
    ComplexityTable,
    ConsistencyEntry,
    ConsistencyReport,
    Slice,
    SliceMarginal,
    available_slices,
    consistency_report,
    read_complexity_csv,
    sign_error,
    slice_marginal,
)
from .errors import (
    DuplicateSampleWarning,
    EmptyCellError,
    EmptyFeasibleSetError,
    EmptyMetricsError,
    GenMetricError,
    GenMetricWarning,
    InfeasiblePlantError,
    IngestAbort,
    InsufficientKeysError,
    MissingCellsWarning,
    NoSamplesForClassError,
    NoSliceWarning,
    SliceUnavailableError,
    UnknownFieldWarning,
    ValidationError,
)
from .gridstats import (
    CellStats,
    Dimension,
    MarginalSet,
    StatGrid,
    build_grid,
    cell_stats,
    marginals,
    nearest_rank_p10,
    read_grid_csv,
    write_grid_csv,
)
from .ingest import (
    CellStore,
    CoverageEntry,
    IngestSummary,
    coverage_report,
    ingest_files,
    ingest_stream,
)
from .records import (
    CellKey,
    GridAxes,
    KappaThresholds,
    Manifest,
    PredictionRecord,
    load_manifest,
    manifest_from_obj,
    manifest_to_json,
    parse_record_line,
    record_to_json_line,
    validate_manifest,
    validate_record,
    write_records_jsonl,
)
from .synth import ConflictProfile, ErrorProfile, SynthSpec, generate, load_spec
from .tradeoff import (
    TradeOffConfig,
    TradeOffPoint,
    feasible_set,
    find_tradeoff,
    objective,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
