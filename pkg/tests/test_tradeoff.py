import math
import random

import pytest

from genmetric import (
    CellKey,
    EmptyFeasibleSetError,
    StatGrid,
    TradeOffConfig,
    feasible_set,
    find_tradeoff,
    objective,
)
from genmetric.gridstats import CellStats

from conftest import make_axes
from oracles import tradeoff_direct


def stats(key, values, n_classes=3):
    return CellStats(key, *values, n_classes=n_classes)


def grid_from(cells: dict, weights=None) -> StatGrid:
    axes = make_axes(
        zs=tuple(sorted({k[0] for k in cells})),
        ssim=tuple(sorted({k[1] for k in cells})),
        weights=tuple(weights or sorted({k[2] for k in cells})),
    )
    return StatGrid(
        axes=axes,
        cells={CellKey(*k): stats(CellKey(*k), v) for k, v in cells.items()},
    )


def random_grid(rng, nx=6, ny=6, nz=8):
    zs = sorted(rng.sample([i / 20 for i in range(21)], nx))
    ssim = sorted(rng.sample([i / 20 for i in range(1, 21)], ny))
    weights = sorted(rng.sample(range(1, 500), nz))
    cells = {
        (x, y, z): tuple(rng.uniform(-0.2, 1.0) for _ in range(6))
        for x in zs
        for y in ssim
        for z in weights
    }
    return cells, weights


# ---------------------------------------------------------------------------
# objective / feasible_set


def test_objective_zero_case():
    assert objective(stats(CellKey(0, 1, 5), (0,) * 6)) == 0.0


def test_objective_arithmetic():
    assert objective(stats(CellKey(0, 1, 5), (0.1, 0.2, 0.3, 0.4, 0.5, 0.6))) == (
        pytest.approx(2.1)
    )


def test_objective_matches_re_addition():
    rng = random.Random(1)
    for _ in range(50):
        values = tuple(rng.uniform(-1, 1) for _ in range(6))
        cs = stats(CellKey(0, 1, 5), values)
        assert objective(cs) == pytest.approx(sum(values), abs=1e-12)


def test_feasible_set_noop_bounds_keeps_all():
    grid = grid_from({(0.0, 1.0, 5): (0,) * 6, (0.5, 0.8, 10): (0,) * 6})
    assert feasible_set(grid, TradeOffConfig()) == set(grid.cells)


def test_feasible_set_empty_raises():
    grid = grid_from({(0.0, 1.0, 5): (0,) * 6})
    with pytest.raises(EmptyFeasibleSetError):
        feasible_set(grid, TradeOffConfig(zero_shot_min=0.9))


def test_feasible_set_mixed_bounds_hand_enumerated():
    cells = {
        (zs, ssim, w): (0,) * 6
        for zs in (0.0, 0.5) for ssim in (0.8, 1.0) for w in (5, 10)
    }
    grid = grid_from(cells)
    cfg = TradeOffConfig(zero_shot_min=0.5, robust_min=0.9, weight_num_max=5)
    # by hand: zs must be 0.5, ssim must be 1.0, w must be 5
    assert feasible_set(grid, cfg) == {CellKey(0.5, 1.0, 5)}
    cfg = TradeOffConfig(robust_min=0.9)
    assert feasible_set(grid, cfg) == {
        CellKey(zs, 1.0, w) for zs in (0.0, 0.5) for w in (5, 10)
    }


# ---------------------------------------------------------------------------
# find_tradeoff


def test_single_cell_grid():
    grid = grid_from({(0.25, 0.9, 7): (0.1, 0.0, 0.1, 0.0, 0.0, 0.0)})
    point = find_tradeoff(grid)
    assert point.key == CellKey(0.25, 0.9, 7)
    assert point.tie_set_size == 1
    assert point.objective_value == pytest.approx(0.2)
    assert point.generalization_bound == pytest.approx(0.2)
    assert point.diversity_bound == pytest.approx(0.0)
    assert point.c_vector == pytest.approx((0.75, 0.9, 1.0))


def test_stage_one_dominates_regardless_of_coordinates():
    grid = grid_from(
        {
            # better coordinates, worse objective
            (0.5, 0.8, 5): (0.4, 0.4, 0.4, 0.4, 0.2, 0.2),
            (0.0, 1.0, 10): (0.2, 0.2, 0.2, 0.2, 0.1, 0.1),
        }
    )
    point = find_tradeoff(grid, TradeOffConfig(objective_tolerance=0.0))
    assert point.key == CellKey(0.0, 1.0, 10)


def test_tie_break_prefers_norm_then_lexicographic():
    # Equal objectives: stage 2 picks the smaller norm of (1-x, y, z/zmax).
    cells = {
        (0.8, 0.5, 5): (0.1,) + (0.0,) * 5,
        (0.1, 0.9, 10): (0.1,) + (0.0,) * 5,
    }
    point = find_tradeoff(grid_from(cells))
    assert point.key == CellKey(0.8, 0.5, 5)

    # Norms exactly equal ((0.6,0.3) vs (0.3,0.6), same z): lexicographic
    # rule wants the higher zero-shot fraction.
    cells = {
        (0.4, 0.3, 5): (0.1,) + (0.0,) * 5,
        (0.7, 0.6, 5): (0.1,) + (0.0,) * 5,
    }
    point = find_tradeoff(grid_from(cells))
    assert point.key == CellKey(0.7, 0.6, 5)
    assert point.tie_set_size == 2


def test_infinite_tolerance_isolates_stage_two():
    rng = random.Random(17)
    cells, weights = random_grid(rng, 4, 4, 4)
    grid = grid_from(cells, weights)
    point = find_tradeoff(grid, TradeOffConfig(objective_tolerance=math.inf))
    z_max = max(weights)
    want = min(
        cells,
        key=lambda k: (
            (1 - k[0]) ** 2 + k[1] ** 2 + (k[2] / z_max) ** 2,
            -k[0], k[1], k[2],
        ),
    )
    assert (point.key.zero_shot_pct, point.key.ssim, point.key.weight_num) == want
    assert point.tie_set_size == len(cells)


def test_matches_exhaustive_oracle_on_random_grids():
    rng = random.Random(2718)
    for trial in range(30):
        cells, weights = random_grid(rng, 4, 4, 5)
        grid = grid_from(cells, weights)
        zs_min = rng.choice([0.0, rng.uniform(0, 0.6)])
        ssim_min = rng.choice([0.0, rng.uniform(0, 0.8)])
        w_max = rng.choice([None, rng.randrange(1, 500)])
        tol = rng.choice([0.0, 1e-9, 0.2])
        cfg = TradeOffConfig(zs_min, ssim_min, w_max, tol)
        want = tradeoff_direct(cells, weights, zs_min, ssim_min, w_max, tol)
        if want is None:
            with pytest.raises(EmptyFeasibleSetError):
                find_tradeoff(grid, cfg)
            continue
        point = find_tradeoff(grid, cfg)
        got = (point.key.zero_shot_pct, point.key.ssim, point.key.weight_num)
        assert got == want, f"trial {trial}"


def test_winner_always_satisfies_bounds_and_tie_criterion():
    rng = random.Random(5)
    cells, weights = random_grid(rng, 3, 3, 4)
    grid = grid_from(cells, weights)
    cfg = TradeOffConfig(0.1, 0.2, weights[-2], objective_tolerance=0.1)
    try:
        point = find_tradeoff(grid, cfg)
    except EmptyFeasibleSetError:
        return
    assert point.key.zero_shot_pct >= cfg.zero_shot_min
    assert point.key.ssim >= cfg.robust_min
    assert point.key.weight_num <= cfg.weight_num_max
    feasible = feasible_set(grid, cfg)
    best = min(objective(grid.cells[k]) for k in feasible)
    assert point.objective_value <= best + cfg.objective_tolerance


def test_determinism_under_insertion_order():
    rng = random.Random(42)
    cells, weights = random_grid(rng, 3, 3, 3)
    items = list(cells.items())
    points = []
    for _ in range(4):
        rng.shuffle(items)
        grid = grid_from(dict(items), weights)
        points.append(find_tradeoff(grid))
    assert all(p == points[0] for p in points)


def test_objective_value_recomputable_from_stats():
    rng = random.Random(12)
    cells, weights = random_grid(rng, 3, 3, 3)
    point = find_tradeoff(grid_from(cells, weights))
    s = point.stats
    assert point.objective_value == pytest.approx(
        s.m_g + s.sd_g + s.p10_g + s.m_k + s.sd_k + s.p10_k, abs=1e-12
    )
    assert point.generalization_bound + point.diversity_bound == pytest.approx(
        point.objective_value, abs=1e-12
    )


def test_tightening_weight_bound_property():
    rng = random.Random(7)
    cells, weights = random_grid(rng, 3, 3, 5)
    grid = grid_from(cells, weights)
    for w_max in weights:
        cfg = TradeOffConfig(weight_num_max=w_max)
        point = find_tradeoff(grid, cfg)
        assert point.key.weight_num <= w_max
