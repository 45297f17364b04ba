"""Trade-off point search over the statistics grid.

Stage 1 minimizes the six-statistic objective over the cells that satisfy
the bounds (zero-shot fraction at least its minimum, SSIM at least its
minimum, weight count at most its maximum) by exact enumeration; the grid
is finite, so enumeration is globally optimal and needs no solver. Cells
within objective_tolerance of the minimum form the tie set. Stage 2
breaks ties by pushing toward high zero-shot, low SSIM and small models:
it minimizes the squared norm of (1 - x, y, z / z_max), where z_max is
the largest weight count on the axis so all three components are
comparable fractions. Any remaining ties fall to the lexicographic rule
(highest x, then lowest y, then lowest z).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import IO

from .errors import EmptyFeasibleSetError
from .formats import fmt_weight, sig6
from .gridstats import CellStats, StatGrid
from .records import CellKey


@dataclass(frozen=True)
class TradeOffConfig:
    zero_shot_min: float = 0.0
    robust_min: float = 0.0
    weight_num_max: int | None = None  # None means unbounded
    objective_tolerance: float = 1e-9


@dataclass(frozen=True)
class TradeOffPoint:
    key: CellKey
    objective_value: float
    generalization_bound: float  # m_g + sd_g + p10_g of the winning cell
    diversity_bound: float  # m_k + sd_k + p10_k of the winning cell
    ssim_lower_bound: float
    zero_shot_upper_bound: float
    model_size_lower_bound: int
    tie_set_size: int
    c_vector: tuple[float, float, float]
    stats: CellStats


def objective(cell: CellStats) -> float:
    """Sum of the six cell statistics (lower is better)."""
    return cell.m_g + cell.sd_g + cell.p10_g + cell.m_k + cell.sd_k + cell.p10_k


def feasible_set(grid: StatGrid, cfg: TradeOffConfig) -> set[CellKey]:
    """Cells satisfying all three bounds; raises if none do."""
    w_max = math.inf if cfg.weight_num_max is None else cfg.weight_num_max
    keys = {
        k
        for k in grid.cells
        if k.zero_shot_pct >= cfg.zero_shot_min
        and k.ssim >= cfg.robust_min
        and k.weight_num <= w_max
    }
    if not keys:
        raise EmptyFeasibleSetError(
            f"no cell satisfies zero_shot >= {cfg.zero_shot_min}, "
            f"ssim >= {cfg.robust_min}, weight_num <= {w_max}"
        )
    return keys


def _norm_sq(key: CellKey, z_max: int) -> float:
    c1 = 1.0 - key.zero_shot_pct
    c2 = key.ssim
    c3 = key.weight_num / z_max
    return c1 * c1 + c2 * c2 + c3 * c3


def find_tradeoff(grid: StatGrid, cfg: TradeOffConfig = TradeOffConfig()) -> TradeOffPoint:
    """Select the trade-off cell; deterministic for a given grid and config."""
    feasible = sorted(feasible_set(grid, cfg))
    objectives = {k: objective(grid.cells[k]) for k in feasible}
    best = min(objectives.values())
    tie_set = [k for k in feasible if objectives[k] <= best + cfg.objective_tolerance]

    z_max = max(grid.axes.weight_nums)
    winner = min(
        tie_set,
        key=lambda k: (_norm_sq(k, z_max), -k.zero_shot_pct, k.ssim, k.weight_num),
    )
    stats = grid.cells[winner]
    return TradeOffPoint(
        key=winner,
        objective_value=objectives[winner],
        generalization_bound=stats.m_g + stats.sd_g + stats.p10_g,
        diversity_bound=stats.m_k + stats.sd_k + stats.p10_k,
        ssim_lower_bound=winner.ssim,
        zero_shot_upper_bound=winner.zero_shot_pct,
        model_size_lower_bound=winner.weight_num,
        tie_set_size=len(tie_set),
        c_vector=(
            1.0 - winner.zero_shot_pct,
            winner.ssim,
            winner.weight_num / z_max,
        ),
        stats=stats,
    )


# ---------------------------------------------------------------------------
# Report layouts.

TRADEOFF_ROWS = (
    "GENERALIZATION BOUND",
    "DIVERSITY BOUND",
    "SSIM(lower bound)",
    "ZEROSHOT(upper bound)",
    "MODEL SIZE(lower bound)",
)


def write_tradeoff_csv(point: TradeOffPoint, fp: IO[str], label: str = "grid") -> None:
    """Two-column report: the five headline rows, then full diagnostics."""
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(["MODEL TYPE", label])
    writer.writerow(["GENERALIZATION BOUND", sig6(point.generalization_bound)])
    writer.writerow(["DIVERSITY BOUND", sig6(point.diversity_bound)])
    writer.writerow(["SSIM(lower bound)", sig6(point.ssim_lower_bound)])
    writer.writerow(["ZEROSHOT(upper bound)", sig6(point.zero_shot_upper_bound)])
    writer.writerow(["MODEL SIZE(lower bound)", fmt_weight(point.model_size_lower_bound)])
    writer.writerow(["OBJECTIVE", sig6(point.objective_value)])
    writer.writerow(["TIE SET SIZE", str(point.tie_set_size)])
    for name, value in zip(("C1", "C2", "C3"), point.c_vector):
        writer.writerow([name, sig6(value)])
    stats = point.stats
    for name in ("m_g", "sd_g", "p10_g", "m_k", "sd_k", "p10_k"):
        writer.writerow([name.upper(), sig6(getattr(stats, name))])


def tradeoff_to_obj(point: TradeOffPoint) -> dict:
    stats = point.stats
    return {
        "zero_shot_pct": point.key.zero_shot_pct,
        "ssim": point.key.ssim,
        "weight_num": point.key.weight_num,
        "objective_value": point.objective_value,
        "generalization_bound": point.generalization_bound,
        "diversity_bound": point.diversity_bound,
        "tie_set_size": point.tie_set_size,
        "c_vector": list(point.c_vector),
        "stats": {
            name: getattr(stats, name)
            for name in ("m_g", "sd_g", "p10_g", "m_k", "sd_k", "p10_k")
        },
        "n_classes": stats.n_classes,
    }


def write_tradeoff_json(point: TradeOffPoint, fp: IO[str]) -> None:
    json.dump(tradeoff_to_obj(point), fp, indent=2, sort_keys=True)
    fp.write("\n")
