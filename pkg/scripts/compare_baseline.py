#!/usr/bin/env python3
"""Tabulate baseline vs trained retrieval metrics from a demo output
directory (the work/ reports written by `neuroembed demo`)."""

import argparse
import json
import sys
from pathlib import Path


def _overall(path: Path) -> tuple[int, float, float]:
    data = json.loads(path.read_text(encoding="utf-8"))
    overall = data["overall"]
    return data["pairs"], overall["r_precision"], overall["mpr"]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("demo_dir", help="directory passed to `neuroembed demo --out`")
    args = parser.parse_args()

    work = Path(args.demo_dir) / "work"
    baseline = work / "baseline_report.json"
    trained = work / "report.json"
    for path in (baseline, trained):
        if not path.is_file():
            print(f"error: missing report {path}", file=sys.stderr)
            return 1

    pairs, base_rp, base_mpr = _overall(baseline)
    _, fit_rp, fit_mpr = _overall(trained)
    print(f"{'':12}{'r_precision':>14}{'mpr':>10}")
    print(f"{'baseline':12}{base_rp:>14.4f}{base_mpr:>10.4f}")
    print(f"{'trained':12}{fit_rp:>14.4f}{fit_mpr:>10.4f}")
    print(f"{'delta':12}{fit_rp - base_rp:>+14.4f}{fit_mpr - base_mpr:>+10.4f}")
    print(f"({pairs} test pairs)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
