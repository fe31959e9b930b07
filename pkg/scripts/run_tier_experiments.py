#!/usr/bin/env python3
"""Run the three client-efficiency tier scenarios end to end.

Runs the high baseline, calibrates medium/low tier knobs against the
published per-round means, runs the calibrated scenarios, and prints the
total-CO2e ratios.
"""

import argparse
import sys
from pathlib import Path

from greenfl.cli import main as greenfl
from greenfl.config import bundled_config_path


def run(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs/tiers", help="output root directory")
    args = parser.parse_args(argv)
    root = Path(args.out)

    targets = str(bundled_config_path("table1_targets"))
    steps = [
        ["run", "--config", "cifar_tiers_high", "--out", str(root / "high")],
        ["calibrate", "--baseline", str(root / "high"), "--targets", targets,
         "--out", str(root / "tiers.json")],
        ["run", "--config", "cifar_tiers_medium", "--tiers", str(root / "tiers.json"),
         "--out", str(root / "medium")],
        ["run", "--config", "cifar_tiers_low", "--tiers", str(root / "tiers.json"),
         "--out", str(root / "low")],
        ["report", "--in", str(root / "high"), str(root / "medium"), str(root / "low")],
    ]
    for step in steps:
        code = greenfl(step)
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(run())
