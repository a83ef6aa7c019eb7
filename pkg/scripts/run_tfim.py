#!/usr/bin/env python3
"""Reproduce the Ising-ring experiments: the energy-error comparison across
the five ansatz variants and the phase-classification run.

    python scripts/run_tfim.py --out runs [--skip-energy-comparison]
"""

import argparse
import json

from qphase.experiments import (
    default_config,
    run_energy_comparison,
    run_phase_classification,
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs")
    parser.add_argument("--threads", type=int, default=2)
    parser.add_argument("--skip-energy-comparison", action="store_true")
    args = parser.parse_args()

    cfg = default_config("tfim", args.out)
    cfg.threads = args.threads

    if not args.skip_energy_comparison:
        curve_cfg = default_config("tfim", args.out)
        curve_cfg.threads = args.threads
        curve_cfg.grid = type(curve_cfg.grid)(points=100, start=0.0, end=2.0, scheme="endpoint")
        curves = run_energy_comparison(curve_cfg)
        print("energy comparison written to", curves["run_dir"])
        for variant, errors in curves["errors"].items():
            grid = curves["grid"]
            print(f"  {variant:16s} max |dE| = {errors.max():.3e} at h = {grid[errors.argmax()]:.2f}")

    result = run_phase_classification(cfg)
    print("classification written to", result["run_dir"])
    print(json.dumps(result["summary"]["accuracies"], indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
