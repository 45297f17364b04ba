"""Cell statistics over the 3D sweep grid and per-dimension marginals.

Each populated cell condenses its per-class error-rate (g) and kappa (k)
distributions into mean, population standard deviation and the
nearest-rank 10th percentile. Marginals along one dimension are plain
sums of a statistic over all cells sharing that level.
"""

from __future__ import annotations

import csv
import enum
import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .classmetrics import ClassMetrics, cell_class_metrics
from .errors import EmptyCellError, EmptyMetricsError, MissingCellsWarning
from .formats import fmt_level, sig6
from .ingest import CellStore
from .records import CellKey, GridAxes, Manifest

STAT_NAMES = ("m_g", "sd_g", "p10_g", "m_k", "sd_k", "p10_k")

GRID_CSV_COLUMNS = (
    "zero_shot_pct",
    "ssim",
    "weight_num",
    *STAT_NAMES,
    "n_classes",
)


class Dimension(str, enum.Enum):
    ZERO_SHOT = "zero_shot"
    SSIM = "ssim"
    WEIGHT_NUM = "weight_num"

    def of(self, key: CellKey):
        if self is Dimension.ZERO_SHOT:
            return key.zero_shot_pct
        if self is Dimension.SSIM:
            return key.ssim
        return key.weight_num

    def levels(self, axes: GridAxes) -> tuple:
        if self is Dimension.ZERO_SHOT:
            return axes.zero_shot_levels
        if self is Dimension.SSIM:
            return axes.ssim_levels
        return axes.weight_nums


@dataclass(frozen=True)
class CellStats:
    key: CellKey
    m_g: float
    sd_g: float
    p10_g: float
    m_k: float
    sd_k: float
    p10_k: float
    n_classes: int

    def stat(self, name: str) -> float:
        if name not in STAT_NAMES:
            raise KeyError(name)
        return getattr(self, name)


@dataclass(frozen=True)
class StatGrid:
    axes: GridAxes
    cells: Mapping[CellKey, CellStats]
    skipped: tuple[CellKey, ...] = ()

    def sorted_cells(self) -> list[CellStats]:
        return [self.cells[k] for k in sorted(self.cells)]


@dataclass(frozen=True)
class MarginalSet:
    dimension: Dimension
    levels: tuple
    m_g: tuple[float, ...]
    sd_g: tuple[float, ...]
    p10_g: tuple[float, ...]
    m_k: tuple[float, ...]
    sd_k: tuple[float, ...]
    p10_k: tuple[float, ...]
    n_cells: tuple[int, ...]
    normalized: bool = False

    def series(self, name: str) -> tuple[float, ...]:
        if name not in STAT_NAMES:
            raise KeyError(name)
        return getattr(self, name)


def nearest_rank_p10(values: Sequence[float]) -> float:
    """The ceil(n/10)-th smallest value (integer arithmetic, no interpolation)."""
    n = len(values)
    if n == 0:
        raise EmptyMetricsError("p10 of an empty distribution")
    rank = (n + 9) // 10  # == ceil(0.10 * n), exactly
    return sorted(values)[rank - 1]


def _summarize(values: Sequence[float]) -> tuple[float, float, float]:
    arr = np.asarray(values, dtype=float)
    return float(arr.mean()), float(arr.std()), nearest_rank_p10(values)


def cell_stats(
    metrics: Sequence[ClassMetrics], key: CellKey, g_source: str = "gap"
) -> CellStats:
    """Condense one cell's class metrics into the six statistics.

    g_source selects what feeds the g distribution: "gap" (test minus
    train error, falling back to the test error for classes without train
    samples) or "test_error" (always the plain test error).
    """
    if not metrics:
        raise EmptyMetricsError(f"cell {key} has no class metrics")
    if g_source == "gap":
        g_values = [m.gap for m in metrics]
    elif g_source == "test_error":
        g_values = [m.error_rate_test for m in metrics]
    else:
        raise ValueError(f"unknown g_source {g_source!r}")
    k_values = [m.kappa for m in metrics]
    m_g, sd_g, p10_g = _summarize(g_values)
    m_k, sd_k, p10_k = _summarize(k_values)
    return CellStats(key, m_g, sd_g, p10_g, m_k, sd_k, p10_k, len(metrics))


def build_grid(
    cell_grid: Mapping[CellKey, CellStore],
    manifest: Manifest,
    empty_cell: str = "skip",
    g_source: str = "gap",
) -> StatGrid:
    """Compute CellStats for every populated cell of the full grid.

    empty_cell="skip" records cells without test data in StatGrid.skipped;
    empty_cell="fail" raises EmptyCellError on the first one.
    """
    if empty_cell not in ("skip", "fail"):
        raise ValueError(f"unknown empty_cell policy {empty_cell!r}")
    axes = manifest.axes
    cells: dict[CellKey, CellStats] = {}
    skipped: list[CellKey] = []
    for x in axes.zero_shot_levels:
        for y in axes.ssim_levels:
            for z in axes.weight_nums:
                key = CellKey(x, y, z)
                store = cell_grid.get(key)
                if store is None or not store.test_records:
                    if empty_cell == "fail":
                        raise EmptyCellError(f"cell {key} has no test records")
                    skipped.append(key)
                    continue
                metrics = cell_class_metrics(store, manifest)
                cells[key] = cell_stats(metrics, key, g_source=g_source)
    return StatGrid(axes=axes, cells=cells, skipped=tuple(skipped))


def marginals(
    grid: StatGrid, dimension: Dimension, normalize: bool = False
) -> MarginalSet:
    """Per-level sums of each statistic over the other two dimensions.

    With normalize=True each sum is divided by the number of cells summed
    (display convenience only; the trade-off objective always consumes raw
    cell statistics). Unequal cell counts across levels trigger
    MissingCellsWarning since raw sums are then not comparable.
    """
    dimension = Dimension(dimension)
    levels = dimension.levels(grid.axes)
    if not levels:
        raise EmptyMetricsError(f"axis {dimension.value} has no levels")
    series: dict[str, list[float]] = {name: [] for name in STAT_NAMES}
    n_cells: list[int] = []
    ordered = grid.sorted_cells()
    for level in levels:
        chosen = [cs for cs in ordered if dimension.of(cs.key) == level]
        n_cells.append(len(chosen))
        for name in STAT_NAMES:
            total = float(sum(cs.stat(name) for cs in chosen))
            if normalize and chosen:
                total /= len(chosen)
            series[name].append(total)
    if len(set(n_cells)) > 1:
        warnings.warn(
            f"uneven cell counts across {dimension.value} levels: {n_cells}; "
            "marginal sums are not directly comparable",
            MissingCellsWarning,
            stacklevel=2,
        )
    return MarginalSet(
        dimension=dimension,
        levels=tuple(levels),
        n_cells=tuple(n_cells),
        normalized=normalize,
        **{name: tuple(values) for name, values in series.items()},
    )


# ---------------------------------------------------------------------------
# CSV wire format for StatGrid.


def write_grid_csv(grid: StatGrid, fp) -> None:
    """One row per cell, sorted by key; statistics at 6 significant digits."""
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(GRID_CSV_COLUMNS)
    for cs in grid.sorted_cells():
        writer.writerow(
            [
                fmt_level(cs.key.zero_shot_pct),
                fmt_level(cs.key.ssim),
                str(cs.key.weight_num),
                *[sig6(cs.stat(name)) for name in STAT_NAMES],
                str(cs.n_classes),
            ]
        )


def read_grid_csv(fp, model_ids: Mapping[int, str] | None = None) -> StatGrid:
    """Load a StatGrid from its CSV form; axes are derived from the rows."""
    reader = csv.DictReader(fp)
    missing = [c for c in GRID_CSV_COLUMNS if c not in (reader.fieldnames or [])]
    if missing:
        raise ValueError(f"grid CSV is missing columns {missing}")
    cells: dict[CellKey, CellStats] = {}
    for row in reader:
        key = CellKey(
            float(row["zero_shot_pct"]), float(row["ssim"]), int(row["weight_num"])
        )
        cells[key] = CellStats(
            key=key,
            **{name: float(row[name]) for name in STAT_NAMES},
            n_classes=int(row["n_classes"]),
        )
    if not cells:
        raise ValueError("grid CSV contains no cells")
    axes = GridAxes(
        zero_shot_levels=tuple(sorted({k.zero_shot_pct for k in cells})),
        ssim_levels=tuple(sorted({k.ssim for k in cells})),
        weight_nums=tuple(sorted({k.weight_num for k in cells})),
        model_ids=dict(model_ids or {}),
    )
    return StatGrid(axes=axes, cells=cells)


def write_marginals_csv(marginal: MarginalSet, fp) -> None:
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(["level", *STAT_NAMES, "n_cells"])
    for i, level in enumerate(marginal.levels):
        level_text = (
            str(int(level))
            if marginal.dimension is Dimension.WEIGHT_NUM
            else fmt_level(level)
        )
        writer.writerow(
            [
                level_text,
                *[sig6(marginal.series(name)[i]) for name in STAT_NAMES],
                str(marginal.n_cells[i]),
            ]
        )
