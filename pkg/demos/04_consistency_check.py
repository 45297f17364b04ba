#!/usr/bin/env python3
"""Sign-error consistency between practical marginals and complexity measures.

Builds a grid with a known over-parameterization trend (error falls as the
weight count grows), extracts the two comparison slices, and scores three
synthetic complexity measures against the per-weight marginals: one
concordant, one anti-concordant, one noisy. A sign error above 0.5 flags a
measure whose ordering disagrees with the practical measurements.
"""

from genmetric import (
    CellKey,
    ComplexityTable,
    Slice,
    StatGrid,
    consistency_report,
    sign_error,
    slice_marginal,
)
from genmetric.gridstats import CellStats
from genmetric.records import GridAxes

weights = (5_000_000, 20_000_000, 80_000_000, 320_000_000)
axes = GridAxes(
    zero_shot_levels=(0.0, 0.25, 0.5),
    ssim_levels=(0.8, 0.9, 1.0),
    weight_nums=weights,
)

cells = {}
for x in axes.zero_shot_levels:
    for y in axes.ssim_levels:
        for i, z in enumerate(weights):
            m_g = 0.4 + 0.2 * x + 0.3 * (1 - y) - 0.05 * i  # falls with size
            key = CellKey(x, y, z)
            cells[key] = CellStats(key, m_g, m_g / 3, m_g / 5, 0.1, 0.05, 0.02, 8)
grid = StatGrid(axes=axes, cells=cells)

print("per-weight marginals of m_g on the two slices:")
for s in (Slice.NO_NOISE, Slice.NO_ZERO_SHOT):
    dtr = slice_marginal(grid, s, "m_g").values
    pretty = ", ".join(f"{z // 1_000_000}M: {v:.3f}" for z, v in sorted(dtr.items()))
    print(f"  {s.value}: {pretty}")
print()

dtr = slice_marginal(grid, Slice.NO_NOISE, "m_g").values
concordant = dict(dtr)
anti = {z: -v for z, v in dtr.items()}
print("sign error against hand-made orderings (no-noise slice, m_g):")
for name, comp in [("same ordering", concordant), ("reversed ordering", anti)]:
    se, n_pairs, n_ties = sign_error(dtr, comp)
    print(f"  {name}: se = {se:.3f} over {n_pairs} pairs ({n_ties} ties)")
print()

table = ComplexityTable(
    measures={
        "neg_param_count": {z: -float(z) for z in weights},  # tracks the trend
        "param_count": {z: float(z) for z in weights},       # fights the trend
        "alternating": {z: (1.0 if i % 2 else -1.0) for i, z in enumerate(weights)},
    },
    source_note="synthetic demo measures",
)
report = consistency_report(grid, table)
print("full report (measure x slice x statistic):")
for e in report.entries:
    flag = "  <-- mismatch" if e.se_g > 0.5 else ""
    print(f"  {e.measure:16s} {e.slice.value:13s} {e.statistic:6s} "
          f"se={e.se_g:.3f}{flag}")
print()
print(f"fraction of entries above 0.5: {report.mismatch_fraction:.3f}")
