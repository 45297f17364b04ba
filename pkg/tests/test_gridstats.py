import io
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genmetric import (
    CellKey,
    ClassMetrics,
    ConfusionCounts,
    Dimension,
    EmptyCellError,
    EmptyMetricsError,
    MissingCellsWarning,
    StatGrid,
    build_grid,
    cell_stats,
    ingest_stream,
    marginals,
    nearest_rank_p10,
    read_grid_csv,
    record_to_json_line,
    write_grid_csv,
)
from genmetric.gridstats import STAT_NAMES, CellStats

from conftest import make_axes, make_manifest, make_record
from oracles import stats_direct

KEY = CellKey(0.0, 1.0, 5)


def metrics_from(g_values, k_values):
    out = []
    for i, (g, k) in enumerate(zip(g_values, k_values)):
        counts = ConfusionCounts(0, 1, 0, 0, 1)
        out.append(
            ClassMetrics(
                class_label=f"c{i}",
                error_rate_test=max(0.0, min(1.0, g)),
                error_rate_train=0.0,
                gap=g,
                gap_is_test_only=False,
                kappa=k,
                counts=counts,
            )
        )
    return out


def make_stat_grid(cells: dict, weights=None) -> StatGrid:
    axes = make_axes(
        zs=tuple(sorted({k[0] for k in cells})),
        ssim=tuple(sorted({k[1] for k in cells})),
        weights=tuple(weights or sorted({k[2] for k in cells})),
    )
    stats = {
        CellKey(*k): CellStats(CellKey(*k), *v, n_classes=3)
        for k, v in cells.items()
    }
    return StatGrid(axes=axes, cells=stats)


# ---------------------------------------------------------------------------
# cell_stats


def test_constant_distribution():
    cs = cell_stats(metrics_from([0.2] * 5, [0.1] * 5), KEY)
    assert cs.m_g == pytest.approx(0.2)
    assert cs.sd_g == 0.0
    assert cs.p10_g == 0.2
    assert cs.p10_k == 0.1


def test_p10_rank_arithmetic():
    g = [i / 10 for i in range(1, 11)]  # 0.1 .. 1.0
    cs = cell_stats(metrics_from(g, [0.0] * 10), KEY)
    assert cs.p10_g == 0.1  # ceil(10/10) = 1st smallest


def test_single_value_distribution():
    cs = cell_stats(metrics_from([0.7], [0.2]), KEY)
    assert (cs.m_g, cs.sd_g, cs.p10_g) == (0.7, 0.0, 0.7)
    assert cs.n_classes == 1


def test_stats_match_sort_oracle():
    rng = random.Random(99)
    g = [rng.random() for _ in range(37)]
    k = [rng.uniform(-1, 1) for _ in range(37)]
    cs = cell_stats(metrics_from(g, k), KEY)
    for got, values in (((cs.m_g, cs.sd_g, cs.p10_g), g),
                        ((cs.m_k, cs.sd_k, cs.p10_k), k)):
        want = stats_direct(values)
        assert got == pytest.approx(want, abs=1e-12)


def test_g_source_selects_test_error():
    from dataclasses import replace

    # make gap and test error differ so the switch is observable
    metrics = [
        replace(m, gap=m.gap - 0.1) for m in metrics_from([0.5, 0.3], [0.0, 0.0])
    ]
    by_gap = cell_stats(metrics, KEY, g_source="gap")
    by_err = cell_stats(metrics, KEY, g_source="test_error")
    assert by_gap.m_g == pytest.approx(0.3)
    assert by_err.m_g == pytest.approx(0.4)
    with pytest.raises(ValueError):
        cell_stats(metrics, KEY, g_source="nonsense")


def test_empty_metrics():
    with pytest.raises(EmptyMetricsError):
        cell_stats([], KEY)


@given(st.lists(st.floats(min_value=-1, max_value=1), min_size=1, max_size=40))
@settings(max_examples=200)
def test_stats_properties(values):
    mean, sd, p10 = stats_direct(values)
    cs = cell_stats(metrics_from(values, values), KEY)
    assert cs.sd_g >= 0.0
    assert cs.p10_g in values  # nearest rank is always a member
    # the floating-point mean may land an ulp outside the value envelope
    assert min(values) - 1e-12 <= cs.m_g <= max(values) + 1e-12
    # sd == 0 iff all equal (within fp noise)
    if max(values) - min(values) < 1e-12:
        assert cs.sd_g < 1e-9
    else:
        assert cs.sd_g > 0.0
    assert cs.p10_g <= cs.m_g + 3 * cs.sd_g + 1e-12


def test_class_order_permutation_invariant():
    rng = random.Random(4)
    g = [rng.random() for _ in range(12)]
    k = [rng.uniform(-1, 1) for _ in range(12)]
    metrics = metrics_from(g, k)
    shuffled = metrics[:]
    rng.shuffle(shuffled)
    a, b = cell_stats(metrics, KEY), cell_stats(shuffled, KEY)
    assert (a.m_g, a.sd_g, a.p10_g) == pytest.approx((b.m_g, b.sd_g, b.p10_g))


def test_nearest_rank_requires_values():
    with pytest.raises(EmptyMetricsError):
        nearest_rank_p10([])
    assert nearest_rank_p10([3.0]) == 3.0


# ---------------------------------------------------------------------------
# build_grid


def _populated_lines(manifest, cells):
    lines = []
    for (zs, ssim, w) in cells:
        for c in manifest.class_vocabulary:
            for i in range(3):
                probs = [0.0] * len(manifest.class_vocabulary)
                probs[manifest.class_vocabulary.index(c)] = 0.9
                rest = (1 - 0.9) / (len(probs) - 1)
                probs = [0.9 if j == manifest.class_vocabulary.index(c) else rest
                         for j in range(len(probs))]
                lines.append(
                    record_to_json_line(
                        make_record(probs, true_class=c, zs=zs, ssim=ssim,
                                    weight=w, sample_id=f"{c}{i}{zs}{ssim}{w}")
                    )
                )
    return lines


def test_build_grid_single_cell():
    manifest = make_manifest(axes=make_axes(zs=(0.0,), ssim=(1.0,), weights=(5,)))
    grid_cells, _ = ingest_stream(_populated_lines(manifest, [(0.0, 1.0, 5)]), manifest)
    grid = build_grid(grid_cells, manifest)
    assert set(grid.cells) == {CellKey(0.0, 1.0, 5)}
    assert grid.skipped == ()


def test_build_grid_skip_and_fail_policies():
    manifest = make_manifest()
    all_cells = [
        (zs, ssim, w) for zs in (0.0, 0.5) for ssim in (0.8, 1.0) for w in (5, 10)
    ]
    grid_cells, _ = ingest_stream(
        _populated_lines(manifest, all_cells[:-1]), manifest
    )
    grid = build_grid(grid_cells, manifest, empty_cell="skip")
    assert len(grid.cells) == 7
    assert grid.skipped == (CellKey(0.5, 1.0, 10),)
    with pytest.raises(EmptyCellError):
        build_grid(grid_cells, manifest, empty_cell="fail")
    with pytest.raises(ValueError):
        build_grid(grid_cells, manifest, empty_cell="ignore")


def test_build_grid_matches_per_cell_recomputation():
    from genmetric import cell_class_metrics

    manifest = make_manifest()
    all_cells = [
        (zs, ssim, w) for zs in (0.0, 0.5) for ssim in (0.8, 1.0) for w in (5, 10)
    ]
    rng = random.Random(8)
    lines = []
    for (zs, ssim, w) in all_cells:
        for i in range(20):
            raw = [rng.random(), rng.random()]
            total = sum(raw)
            lines.append(
                record_to_json_line(
                    make_record(
                        [p / total for p in raw],
                        true_class="AB"[rng.randrange(2)],
                        zs=zs, ssim=ssim, weight=w, sample_id=f"s{i}",
                    )
                )
            )
    grid_cells, _ = ingest_stream(lines, manifest)
    grid = build_grid(grid_cells, manifest)
    assert len(grid.cells) == 8
    for key, store in grid_cells.items():
        want = cell_stats(cell_class_metrics(store, manifest), key)
        assert grid.cells[key] == want


# ---------------------------------------------------------------------------
# marginals


def test_marginal_of_single_cell_grid():
    grid = make_stat_grid({(0.0, 1.0, 5): (0.1, 0.2, 0.3, 0.4, 0.5, 0.6)})
    for dim in Dimension:
        ms = marginals(grid, dim)
        assert ms.levels == (grid.axes.zero_shot_levels if dim is Dimension.ZERO_SHOT
                             else grid.axes.ssim_levels if dim is Dimension.SSIM
                             else grid.axes.weight_nums)
        assert ms.m_g == (0.1,)
        assert ms.p10_k == (0.6,)


def test_marginal_counts_cells():
    cells = {
        (zs, ssim, w): (0.1, 0.0, 0.0, 0.0, 0.0, 0.0)
        for zs in (0.0, 0.5) for ssim in (0.8, 1.0) for w in (5, 10)
    }
    grid = make_stat_grid(cells)
    ms = marginals(grid, Dimension.ZERO_SHOT)
    assert ms.m_g == pytest.approx((0.4, 0.4))
    assert ms.n_cells == (4, 4)


def test_marginal_total_identity_random():
    rng = random.Random(21)
    cells = {
        (zs, ssim, w): tuple(rng.random() for _ in range(6))
        for zs in (0.0, 0.25, 0.5) for ssim in (0.7, 1.0) for w in (5, 10, 20)
    }
    grid = make_stat_grid(cells)
    for dim in Dimension:
        ms = marginals(grid, dim)
        for i, name in enumerate(STAT_NAMES):
            total = math.fsum(v[i] for v in cells.values())
            assert math.fsum(ms.series(name)) == pytest.approx(total, abs=1e-9)


def test_marginal_warns_on_uneven_coverage():
    cells = {
        (0.0, 1.0, 5): (0.1, 0.0, 0.0, 0.0, 0.0, 0.0),
        (0.5, 1.0, 5): (0.1, 0.0, 0.0, 0.0, 0.0, 0.0),
        (0.5, 1.0, 10): (0.1, 0.0, 0.0, 0.0, 0.0, 0.0),
    }
    grid = make_stat_grid(cells)
    with pytest.warns(MissingCellsWarning):
        ms = marginals(grid, Dimension.ZERO_SHOT)
    assert ms.n_cells == (1, 2)


def test_marginal_normalize_flag():
    cells = {
        (0.0, 1.0, 5): (0.2, 0.0, 0.0, 0.0, 0.0, 0.0),
        (0.0, 1.0, 10): (0.4, 0.0, 0.0, 0.0, 0.0, 0.0),
    }
    grid = make_stat_grid(cells)
    raw = marginals(grid, Dimension.ZERO_SHOT)
    normed = marginals(grid, Dimension.ZERO_SHOT, normalize=True)
    assert raw.m_g == pytest.approx((0.6000000000000001,))
    assert normed.m_g == pytest.approx((0.30000000000000004,))
    assert normed.normalized


# ---------------------------------------------------------------------------
# CSV round trip


def test_grid_csv_round_trip():
    rng = random.Random(33)
    cells = {
        (zs, ssim, w): tuple(round(rng.random(), 6) for _ in range(6))
        for zs in (0.0, 0.175) for ssim in (0.779, 1.0) for w in (5, 167000000)
    }
    grid = make_stat_grid(cells)
    buf = io.StringIO()
    write_grid_csv(grid, buf)
    text = buf.getvalue()
    loaded = read_grid_csv(io.StringIO(text))
    assert set(loaded.cells) == set(grid.cells)
    # writing the loaded grid again is byte-identical (fixed point)
    buf2 = io.StringIO()
    write_grid_csv(loaded, buf2)
    assert buf2.getvalue() == text


def test_grid_csv_rejects_missing_columns():
    with pytest.raises(ValueError):
        read_grid_csv(io.StringIO("zero_shot_pct,ssim\n0.0,1.0\n"))
    with pytest.raises(ValueError):
        read_grid_csv(io.StringIO(",".join(
            ["zero_shot_pct", "ssim", "weight_num", *STAT_NAMES, "n_classes"]
        ) + "\n"))
