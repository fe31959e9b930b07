#!/usr/bin/env python3
"""Run the GPU-tier swap scenario pair and print the simulated-runtime gap."""

import argparse
import json
import sys
from pathlib import Path

from greenfl.cli import main as greenfl


def run(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs/gpuswap", help="output root directory")
    args = parser.parse_args(argv)
    root = Path(args.out)

    for name in ("h100", "v100"):
        code = greenfl(["run", "--config", f"retina_gpuswap_{name}", "--out", str(root / name)])
        if code != 0:
            return code

    summaries = {
        name: json.loads((root / name / "summary.json").read_text()) for name in ("h100", "v100")
    }
    ratio = summaries["v100"]["runtime_s"] / summaries["h100"]["runtime_s"]
    for name, s in summaries.items():
        print(
            f"{name}: runtime {s['runtime_min']:.4f} min, "
            f"energy {s['total_energy_kwh']:.6g} kWh, co2e {s['total_co2e_kg']:.6g} kg"
        )
    print(f"runtime gap v100/h100 = {ratio:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(run())
