"""Command-line front end: validate / synth / analyze / consistency.

Subcommands mirror the pipeline stages so each is testable on its own.
Exit codes are a stable contract: 0 success, 1 validation failure,
2 pipeline error, 3 I/O error. All file writes are atomic
(write-temp-then-rename) and byte-deterministic for identical inputs.
"""

from __future__ import annotations

import argparse
import io
import logging
import os
import sys
import tempfile
import warnings
from pathlib import Path

from . import consistency as cons
from . import gridstats, synth, svgplot, tradeoff
from .errors import GenMetricError, IngestAbort, ValidationError
from .formats import fmt_level, fmt_weight, sig6
from .ingest import coverage_report, ingest_files
from .records import load_manifest, manifest_to_json, write_records_jsonl

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_PIPELINE = 2
EXIT_IO = 3

log = logging.getLogger("genmetric")


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fp:
            fp.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _render(write) -> str:
    buf = io.StringIO()
    write(buf)
    return buf.getvalue()


def _key_text(key) -> str:
    return (
        f"(zero_shot={fmt_level(key.zero_shot_pct)}, ssim={fmt_level(key.ssim)}, "
        f"weight={key.weight_num})"
    )


# ---------------------------------------------------------------------------
# Subcommands.


def cmd_validate(args) -> int:
    manifest = load_manifest(args.manifest)
    grid, summary = ingest_files(args.records, manifest, strict=args.strict)
    print(f"manifest: {args.manifest} ok")
    print(
        f"records: {summary.accepted} accepted, {summary.rejected} rejected "
        f"of {summary.total_lines} lines"
    )
    for kind in sorted(summary.error_kinds):
        print(f"  rejected[{kind}] = {summary.error_kinds[kind]}")
    if summary.duplicate_sample_ids:
        print(f"  duplicate sample ids: {summary.duplicate_sample_ids}")
    entries = coverage_report(grid, manifest)
    missing = [e for e in entries if e.missing]
    gapped = [e for e in entries if not e.missing and e.class_gaps]
    print(f"grid: {len(entries)} cells, {len(missing)} without test records")
    for e in missing:
        print(f"  missing {_key_text(e.key)}")
    for e in gapped:
        print(f"  {_key_text(e.key)} lacks test classes: {', '.join(e.class_gaps)}")
    return EXIT_OK


def cmd_synth(args) -> int:
    spec = synth.load_spec(args.spec)
    records, manifest = synth.generate(spec)
    out = Path(args.out)
    buf = io.StringIO()
    n = write_records_jsonl(records, buf)
    _atomic_write(out / "records.jsonl", buf.getvalue())
    _atomic_write(out / "manifest.json", manifest_to_json(manifest))
    print(f"wrote {n} records to {out / 'records.jsonl'}")
    print(f"wrote manifest to {out / 'manifest.json'}")
    return EXIT_OK


def _tradeoff_config(args) -> tradeoff.TradeOffConfig:
    return tradeoff.TradeOffConfig(
        zero_shot_min=args.zero_shot_min,
        robust_min=args.robust_min,
        weight_num_max=args.weight_max,
        objective_tolerance=args.tolerance,
    )


def _load_grid(args) -> tuple[gridstats.StatGrid, str]:
    """Build the statistics grid from records, or load a precomputed CSV."""
    if args.grid is not None:
        with open(args.grid, "r", encoding="utf-8", newline="") as fp:
            return gridstats.read_grid_csv(fp), Path(args.grid).stem
    manifest = load_manifest(args.manifest)
    cells, summary = ingest_files(args.records, manifest, strict=args.strict)
    if summary.rejected:
        log.warning("ignored %d invalid record lines", summary.rejected)
    label = manifest.dataset_name or "grid"
    return (
        gridstats.build_grid(
            cells, manifest, empty_cell=args.empty_cell, g_source=args.g_source
        ),
        label,
    )


_DIM_FILES = {
    gridstats.Dimension.ZERO_SHOT: "zeroshot",
    gridstats.Dimension.SSIM: "ssim",
    gridstats.Dimension.WEIGHT_NUM: "weightnum",
}

_DIM_TITLES = {
    gridstats.Dimension.ZERO_SHOT: "zero-shot fraction",
    gridstats.Dimension.SSIM: "SSIM level",
    gridstats.Dimension.WEIGHT_NUM: "model weight count",
}


def _marginal_svg(marginal: gridstats.MarginalSet, point) -> str:
    dim = marginal.dimension
    if dim is gridstats.Dimension.WEIGHT_NUM:
        # Positional axis: weight counts span orders of magnitude.
        xs = list(range(len(marginal.levels)))
        labels = [fmt_weight(z) for z in marginal.levels]
        v_at = float(marginal.levels.index(point.key.weight_num))
    else:
        xs = [float(v) for v in marginal.levels]
        labels = None
        v_at = dim.of(point.key)
    series = [
        (name, xs, list(marginal.series(name))) for name in gridstats.STAT_NAMES
    ]
    return svgplot.line_chart(
        title=f"Marginal sums over {_DIM_TITLES[dim]}",
        x_label=_DIM_TITLES[dim],
        y_label="summed statistic",
        series=series,
        x_tick_labels=labels,
        vline=(v_at, "trade-off"),
    )


def cmd_analyze(args) -> int:
    grid, label = _load_grid(args)
    out = Path(args.out)
    _atomic_write(out / "grid.csv", _render(lambda fp: gridstats.write_grid_csv(grid, fp)))
    # Reload the written CSV so every downstream number derives from the
    # published 6-significant-digit grid; re-ingesting grid.csv then
    # reproduces the exact inputs of tradeoff.csv and the marginals.
    with open(out / "grid.csv", "r", encoding="utf-8", newline="") as fp:
        grid = gridstats.read_grid_csv(fp, model_ids=grid.axes.model_ids)

    point = tradeoff.find_tradeoff(grid, _tradeoff_config(args))
    _atomic_write(
        out / "tradeoff.csv",
        _render(lambda fp: tradeoff.write_tradeoff_csv(point, fp, label)),
    )
    _atomic_write(
        out / "tradeoff.json", _render(lambda fp: tradeoff.write_tradeoff_json(point, fp))
    )

    for dim, stem in _DIM_FILES.items():
        marginal = gridstats.marginals(grid, dim)
        _atomic_write(
            out / f"marginals_{stem}.csv",
            _render(lambda fp, m=marginal: gridstats.write_marginals_csv(m, fp)),
        )
        _atomic_write(out / f"marginals_{stem}.svg", _marginal_svg(marginal, point))

    print(f"grid: {len(grid.cells)} cells ({len(grid.skipped)} skipped)")
    print(
        "trade-off point: "
        f"zero_shot={sig6(point.zero_shot_upper_bound)} "
        f"ssim={sig6(point.ssim_lower_bound)} "
        f"weight={fmt_weight(point.model_size_lower_bound)} "
        f"objective={sig6(point.objective_value)}"
    )
    print(f"reports written to {out}")
    return EXIT_OK


def cmd_consistency(args) -> int:
    grid, _ = _load_grid(args)
    with open(args.complexity, "r", encoding="utf-8", newline="") as fp:
        table = cons.read_complexity_csv(fp)
    report = cons.consistency_report(grid, table)
    out = Path(args.out)
    _atomic_write(
        out / "consistency.csv", _render(lambda fp: cons.write_consistency_csv(report, fp))
    )
    pairs = cons.pair_data(grid, table)
    _atomic_write(
        out / "consistency_pairs.csv", _render(lambda fp: cons.write_pair_csv(pairs, fp))
    )

    measures = sorted(table.measures)
    positions = {m: float(i) for i, m in enumerate(measures)}
    for s in cons.available_slices(grid):
        groups = []
        for stat in cons.ERROR_STATISTICS:
            chosen = [e for e in report.entries if e.slice is s and e.statistic == stat]
            groups.append(
                (stat, [positions[e.measure] for e in chosen], [e.se_g for e in chosen])
            )
        svg = svgplot.scatter_chart(
            title=f"Sign errors, {s.value} slice",
            groups=groups,
            x_tick_labels=measures,
            y_label="sign error",
            refline_y=0.5,
        )
        _atomic_write(out / f"consistency_{s.value}.svg", svg)

    print(
        f"consistency: {len(report.entries)} entries, "
        f"{len(report.skipped)} skipped, "
        f"mismatch fraction {sig6(report.mismatch_fraction)}"
    )
    for measure, s, stat, reason in report.skipped:
        print(f"  skipped ({measure}, {s}, {stat}): {reason}")
    print(f"reports written to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser and dispatch.


def _add_grid_inputs(p: argparse.ArgumentParser, grid_option: bool) -> None:
    p.add_argument("--manifest", help="manifest JSON path")
    p.add_argument(
        "--records",
        action="append",
        default=[],
        metavar="PATH",
        help="record file (JSONL or CSV); repeatable",
    )
    p.add_argument("--strict", action="store_true", help="abort on first invalid line")
    if grid_option:
        p.add_argument(
            "--grid", help="precomputed grid CSV (alternative to manifest+records)"
        )
        p.add_argument(
            "--empty-cell",
            choices=("skip", "fail"),
            default="skip",
            help="policy for grid cells without test records",
        )
        p.add_argument(
            "--g-source",
            choices=("gap", "test_error"),
            default="gap",
            help="statistic feeding the g distribution",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="genmetric",
        description=(
            "Practical generalization benchmarking over a "
            "(zero-shot x SSIM x model size) sweep grid"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a manifest and record files")
    _add_grid_inputs(p, grid_option=False)

    p = sub.add_parser("synth", help="generate a synthetic sweep dataset")
    p.add_argument("--spec", required=True, help="synthesis spec JSON")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("analyze", help="grid statistics, trade-off point, marginals")
    _add_grid_inputs(p, grid_option=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--zero-shot-min", type=float, default=0.0)
    p.add_argument("--robust-min", type=float, default=0.0)
    p.add_argument("--weight-max", type=int, default=None)
    p.add_argument(
        "--tolerance",
        type=float,
        default=1e-9,
        help="objective tolerance for the trade-off tie set",
    )

    p = sub.add_parser("consistency", help="sign-error check against complexity measures")
    _add_grid_inputs(p, grid_option=True)
    p.add_argument("--complexity", required=True, help="complexity table CSV")
    p.add_argument("--out", required=True, help="output directory")
    return parser


_HANDLERS = {
    "validate": cmd_validate,
    "synth": cmd_synth,
    "analyze": cmd_analyze,
    "consistency": cmd_consistency,
}


def _check_inputs(args) -> None:
    if getattr(args, "grid", None) is not None:
        return
    if hasattr(args, "manifest"):
        if not args.manifest:
            raise ValidationError("MissingInput", "--manifest is required")
        if not args.records:
            raise ValidationError("MissingInput", "at least one --records is required")


def main(argv=None) -> int:
    level = os.environ.get("GENMETRIC_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    args = build_parser().parse_args(argv)
    try:
        _check_inputs(args)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            status = _HANDLERS[args.command](args)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        return status
    except IngestAbort as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except GenMetricError as exc:
        print(f"error: {exc.__class__.__name__}: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
