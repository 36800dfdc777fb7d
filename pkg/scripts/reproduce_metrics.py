#!/usr/bin/env python3
"""Print the full metric suite for a stored run or for the reference tallies.

With --metrics-report it recomputes from the tally stored in an existing
metrics_report.json; with no arguments it feeds the reference evaluation
tallies through the same arithmetic used in production, which should print
95.24 / 92.31 / 94.44 / 95.24 / 100.00 / 97.56 / 95.24 / 100.00 / 100.00.
"""

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from dfkg.evaluate import METRIC_NAMES, Tally, compute_metrics

REFERENCE_TALLY = Tally(
    true_extractions=40,
    total_potential_extractions=42,
    correctly_consolidated=24,
    total_consolidated=26,
    correct_connections=68,
    total_connections=72,
    tp=40,
    fp=2,
    fn=0,
    artifacts_matching_context=40,
    artifacts_with_intact_custody=40,
    total_artifacts=40,
)


def show(tally: Tally) -> None:
    metrics = compute_metrics(tally)
    width = max(len(n) for n in METRIC_NAMES)
    for name in METRIC_NAMES:
        value = metrics[name]
        print(f"{name:<{width}}  {'undefined' if value is None else f'{value:.2f}'}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--metrics-report",
        type=Path,
        default=None,
        help="recompute from the tally stored in a metrics_report.json",
    )
    args = parser.parse_args(argv)
    if args.metrics_report is None:
        show(REFERENCE_TALLY)
        return 0
    report = json.loads(args.metrics_report.read_text(encoding="utf-8"))
    show(Tally(**report["tally"]))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
