"""Sign-error agreement between practical error marginals and complexity measures.

Two 2D slices of the grid are comparable against externally computed
complexity measures: the no-noise slice (SSIM fixed at 1) and the
no-zero-shot slice (zero-shot fraction fixed at 0). Each slice is reduced
to a per-weight-count marginal dtr of an error statistic; the empirical
sign error of a complexity measure C is then, over unordered pairs of
weight counts {w, w'},

    SE = mean of (1 - sgn(dtr(w) - dtr(w')) * sgn(C(w) - C(w'))) / 2

with sgn(0) = 0, so a tie in either quantity contributes exactly 0.5.
Concordant orderings give 0, anti-concordant give 1; values above 0.5
flag a mismatch between the measure and the practical marginal.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from itertools import combinations
from typing import IO, Mapping

from .errors import InsufficientKeysError, SliceUnavailableError
from .formats import sig6
from .gridstats import StatGrid

ERROR_STATISTICS = ("m_g", "sd_g", "p10_g")


class Slice(str, enum.Enum):
    NO_NOISE = "no_noise"  # SSIM = 1.0, zero-shot varies
    NO_ZERO_SHOT = "no_zero_shot"  # zero-shot = 0.0, SSIM varies


@dataclass(frozen=True)
class ComplexityTable:
    """Externally computed complexity values, keyed measure -> weight -> value."""

    measures: Mapping[str, Mapping[int, float]]
    source_note: str = ""


@dataclass(frozen=True)
class SliceMarginal:
    slice: Slice
    statistic: str
    values: Mapping[int, float]  # weight_num -> dtr


@dataclass(frozen=True)
class ConsistencyEntry:
    measure: str
    slice: Slice
    statistic: str
    se_g: float
    n_pairs: int
    n_tie_pairs: int


@dataclass(frozen=True)
class ConsistencyReport:
    entries: tuple[ConsistencyEntry, ...]
    skipped: tuple[tuple[str, str, str, str], ...]  # (measure, slice, statistic, reason)

    @property
    def mismatch_fraction(self) -> float:
        """Fraction of entries whose sign error exceeds 0.5."""
        if not self.entries:
            return 0.0
        return sum(1 for e in self.entries if e.se_g > 0.5) / len(self.entries)


def available_slices(grid: StatGrid) -> list[Slice]:
    out = []
    if 1.0 in grid.axes.ssim_levels:
        out.append(Slice.NO_NOISE)
    if 0.0 in grid.axes.zero_shot_levels:
        out.append(Slice.NO_ZERO_SHOT)
    return out


def slice_marginal(grid: StatGrid, slice_kind: Slice, statistic: str) -> SliceMarginal:
    """Per-weight-count sums of one error statistic over a slice's free axis.

    Only weight counts with at least one populated cell in the slice
    appear in the result.
    """
    slice_kind = Slice(slice_kind)
    if statistic not in ERROR_STATISTICS:
        raise KeyError(f"statistic must be one of {ERROR_STATISTICS}, got {statistic!r}")
    if slice_kind is Slice.NO_NOISE:
        if 1.0 not in grid.axes.ssim_levels:
            raise SliceUnavailableError("SSIM=1.0 is not on the axis")
        selected = [cs for cs in grid.sorted_cells() if cs.key.ssim == 1.0]
    else:
        if 0.0 not in grid.axes.zero_shot_levels:
            raise SliceUnavailableError("zero-shot=0.0 is not on the axis")
        selected = [cs for cs in grid.sorted_cells() if cs.key.zero_shot_pct == 0.0]
    values: dict[int, float] = {}
    for cs in selected:
        z = cs.key.weight_num
        values[z] = values.get(z, 0.0) + cs.stat(statistic)
    return SliceMarginal(slice=slice_kind, statistic=statistic, values=values)


def _sgn(x: float) -> int:
    return (x > 0) - (x < 0)


def sign_error(
    dtr: Mapping[int, float], complexity: Mapping[int, float]
) -> tuple[float, int, int]:
    """Empirical sign error over unordered pairs of common weight counts.

    Returns (se, n_pairs, n_tie_pairs); n_tie_pairs counts pairs where at
    least one of the two differences is exactly zero.
    """
    common = sorted(set(dtr) & set(complexity))
    if len(common) < 2:
        raise InsufficientKeysError(
            f"need at least 2 common weight counts, got {len(common)}"
        )
    total = 0.0
    ties = 0
    n_pairs = 0
    for w, w2 in combinations(common, 2):
        s1 = _sgn(dtr[w] - dtr[w2])
        s2 = _sgn(complexity[w] - complexity[w2])
        if s1 == 0 or s2 == 0:
            ties += 1
        total += 0.5 * (1 - s1 * s2)
        n_pairs += 1
    return total / n_pairs, n_pairs, ties


def consistency_report(grid: StatGrid, table: ComplexityTable) -> ConsistencyReport:
    """Sign errors for every (measure, available slice, error statistic).

    Entries that cannot be computed (too few common weight counts) are
    skipped with a reason instead of aborting the whole report.
    """
    slices = available_slices(grid)
    if not slices:
        raise SliceUnavailableError(
            "neither SSIM=1.0 nor zero-shot=0.0 is on the axes"
        )
    marginals = {
        (s, stat): slice_marginal(grid, s, stat)
        for s in slices
        for stat in ERROR_STATISTICS
    }
    entries: list[ConsistencyEntry] = []
    skipped: list[tuple[str, str, str, str]] = []
    for measure in sorted(table.measures):
        values = table.measures[measure]
        for s in slices:
            for stat in ERROR_STATISTICS:
                dtr = marginals[(s, stat)].values
                try:
                    se, n_pairs, n_ties = sign_error(dtr, values)
                except InsufficientKeysError as exc:
                    skipped.append((measure, s.value, stat, str(exc)))
                    continue
                entries.append(
                    ConsistencyEntry(measure, s, stat, se, n_pairs, n_ties)
                )
    return ConsistencyReport(entries=tuple(entries), skipped=tuple(skipped))


def pair_data(
    grid: StatGrid, table: ComplexityTable
) -> list[tuple[str, str, str, int, int, float, float, float, float, float]]:
    """Scatter-plot export: one row per (measure, slice, statistic, pair).

    Columns: measure, slice, statistic, w, w2, dtr(w), dtr(w2), C(w),
    C(w2), pair error term.
    """
    rows = []
    for s in available_slices(grid):
        for stat in ERROR_STATISTICS:
            dtr = slice_marginal(grid, s, stat).values
            for measure in sorted(table.measures):
                values = table.measures[measure]
                common = sorted(set(dtr) & set(values))
                for w, w2 in combinations(common, 2):
                    term = 0.5 * (
                        1 - _sgn(dtr[w] - dtr[w2]) * _sgn(values[w] - values[w2])
                    )
                    rows.append(
                        (measure, s.value, stat, w, w2,
                         dtr[w], dtr[w2], values[w], values[w2], term)
                    )
    return rows


# ---------------------------------------------------------------------------
# Wire formats.


def read_complexity_csv(fp) -> ComplexityTable:
    """CSV with header measure_name, weight_num, value."""
    reader = csv.DictReader(fp)
    required = {"measure_name", "weight_num", "value"}
    if not required.issubset(reader.fieldnames or []):
        raise ValueError(
            f"complexity CSV needs columns {sorted(required)}, got {reader.fieldnames}"
        )
    measures: dict[str, dict[int, float]] = {}
    for row in reader:
        name = row["measure_name"].strip()
        measures.setdefault(name, {})[int(row["weight_num"])] = float(row["value"])
    return ComplexityTable(measures=measures)


def write_consistency_csv(report: ConsistencyReport, fp: IO[str]) -> None:
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(["measure_name", "slice", "statistic", "se_g", "n_pairs", "n_tie_pairs"])
    for e in report.entries:
        writer.writerow(
            [e.measure, e.slice.value, e.statistic, sig6(e.se_g),
             str(e.n_pairs), str(e.n_tie_pairs)]
        )


def write_pair_csv(rows, fp: IO[str]) -> None:
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(
        ["measure_name", "slice", "statistic", "w", "w2",
         "dtr_w", "dtr_w2", "c_w", "c_w2", "pair_error"]
    )
    for measure, s, stat, w, w2, d1, d2, c1, c2, term in rows:
        writer.writerow(
            [measure, s, stat, str(w), str(w2),
             sig6(d1), sig6(d2), sig6(c1), sig6(c2), sig6(term)]
        )
