#!/usr/bin/env python3
"""Per-class metrics, conflict counting and grid statistics, step by step.

Walks single probability vectors through the five classification rules,
builds the per-class confusion counts and kappa for one cell, then
condenses a whole sweep into the statistics grid and its marginals.
"""

import random

from genmetric import (
    Dimension,
    KappaThresholds,
    assign_rule,
    build_grid,
    cell_class_metrics,
    kappa,
    marginals,
)
from genmetric.classmetrics import ConfusionCounts
from genmetric.ingest import _Accumulator

from demo_common import demo_manifest, random_record

th = KappaThresholds()
print("thresholds:", th)
print()

print("rule walk-through (class index 0):")
for probs in [(0.9, 0.05, 0.05), (0.48, 0.47, 0.05), (0.40, 0.37, 0.23),
              (0.2, 0.75, 0.05)]:
    category, rule = assign_rule(probs, None, 0, th)
    print(f"  probs={probs} -> category {category!r} via rule {rule}")
print("  a/d are conflict cases, b/c conflict-free;"
      " rule i (failed) needs max prob below tau_fail")
print()

print("kappa from hand-made counts:")
for counts in [ConfusionCounts(2, 3, 3, 2, 10), ConfusionCounts(0, 5, 5, 0, 10),
               ConfusionCounts(10, 0, 0, 0, 10)]:
    print(f"  {counts} -> kappa {kappa(counts, th.epsilon_denominator):+.3f}")
print()

manifest = demo_manifest()
rng = random.Random(7)
acc = _Accumulator()
for key_tuple in [(x, y, z) for x in manifest.axes.zero_shot_levels
                  for y in manifest.axes.ssim_levels
                  for z in manifest.axes.weight_nums]:
    for i in range(120):
        acc.add(random_record(rng, manifest, key_tuple, f"t{i}", "test"))
    for i in range(60):
        acc.add(random_record(rng, manifest, key_tuple, f"r{i}", "train"))
cells = acc.freeze()

one = next(iter(sorted(cells)))
print(f"class metrics for cell {one}:")
for m in cell_class_metrics(cells[one], manifest):
    print(f"  {m.class_label}: test err {m.error_rate_test:.3f}, "
          f"gap {m.gap:+.3f}{' (test only)' if m.gap_is_test_only else ''}, "
          f"kappa {m.kappa:+.3f}, counts (a={m.counts.a}, b={m.counts.b}, "
          f"c={m.counts.c}, d={m.counts.d})")
print()

grid = build_grid(cells, manifest)
print(f"statistics grid: {len(grid.cells)} cells, {len(grid.skipped)} skipped")
cs = grid.cells[sorted(grid.cells)[0]]
print(f"  first cell: m_g={cs.m_g:.3f} sd_g={cs.sd_g:.3f} p10_g={cs.p10_g:.3f} "
      f"m_k={cs.m_k:+.3f} sd_k={cs.sd_k:.3f} p10_k={cs.p10_k:+.3f}")
print()

for dim in Dimension:
    ms = marginals(grid, dim)
    pretty = ", ".join(f"{level}: {v:.3f}" for level, v in zip(ms.levels, ms.m_g))
    print(f"m_g marginal over {dim.value}: {pretty}")
