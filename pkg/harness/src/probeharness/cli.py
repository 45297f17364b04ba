"""Command line wrapper: probeharness run --config cfg.json --out DIR."""

import argparse
import json
import sys

from .config import HarnessConfig, load_config
from .runner import run_harness


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="probeharness")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="execute the sweep and emit records")
    p.add_argument("--config", help="config JSON (defaults apply when omitted)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument(
        "--dry-run", action="store_true", help="emit the manifest only"
    )
    args = parser.parse_args(argv)

    cfg = load_config(args.config) if args.config else HarnessConfig()
    report = run_harness(cfg, args.out, dry_run=args.dry_run)
    json.dump(report.get("weight_counts", {}), sys.stdout)
    print()
    return 0


if __name__ == "__main__":
    sys.exit(main())
