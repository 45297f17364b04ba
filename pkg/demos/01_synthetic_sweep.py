#!/usr/bin/env python3
"""Generate a synthetic prediction sweep and validate it.

The generator plants monotone error trends over the three sweep axes
(zero-shot fraction, SSIM level, model weight count), emits a JSONL
record stream plus its manifest, and everything it emits passes the
schema validator. Outputs land in ./demo_out/synthetic/.
"""

import io
from pathlib import Path

from genmetric import (
    ConflictProfile,
    ErrorProfile,
    GridAxes,
    SynthSpec,
    coverage_report,
    generate,
    ingest_stream,
    manifest_to_json,
    record_to_json_line,
    write_records_jsonl,
)

out_dir = Path(__file__).resolve().parent.parent / "demo_out" / "synthetic"
out_dir.mkdir(parents=True, exist_ok=True)

spec = SynthSpec(
    seed=42,
    axes=GridAxes(
        zero_shot_levels=(0.0, 0.25, 0.5),
        ssim_levels=(0.8, 0.9, 1.0),
        weight_nums=(5_000_000, 20_000_000, 80_000_000),
        model_ids={5_000_000: "tiny", 20_000_000: "small", 80_000_000: "base"},
    ),
    n_classes=6,
    samples_per_class_per_cell=50,
    error_profile=ErrorProfile(
        base_error=0.12,
        ssim_slope=0.5,        # more noise (lower SSIM) -> more errors
        zero_shot_slope=0.3,   # more unseen classes -> more errors
        log_weight_slope=-0.02,  # bigger models -> slightly fewer errors
        class_spread=0.08,
    ),
    conflict_profile=ConflictProfile(fraction=0.15, high_fraction=0.5),
    dataset_name="demo-sweep",
)

records, manifest = generate(spec)
print(f"generated {len(records)} records over "
      f"{len(spec.axes.zero_shot_levels) * len(spec.axes.ssim_levels) * len(spec.axes.weight_nums)} cells")

with open(out_dir / "records.jsonl", "w", encoding="utf-8") as fp:
    write_records_jsonl(records, fp)
(out_dir / "manifest.json").write_text(manifest_to_json(manifest))
print(f"wrote {out_dir / 'records.jsonl'}")

# Round-trip: stream the serialized lines back through ingestion.
lines = io.StringIO("\n".join(record_to_json_line(r) for r in records))
grid, summary = ingest_stream(lines, manifest)
print(f"ingest: {summary.accepted} accepted, {summary.rejected} rejected")
assert summary.conserved

entries = coverage_report(grid, manifest)
missing = sum(e.missing for e in entries)
print(f"coverage: {len(entries)} cells enumerated, {missing} missing")

one = next(iter(sorted(grid)))
store = grid[one]
print(f"example cell {one}: {len(store.test_records)} test records, "
      f"{len(store.train_records)} train records")
print(f"per-class counts: {dict(sorted(store.per_class_counts.items()))}")
