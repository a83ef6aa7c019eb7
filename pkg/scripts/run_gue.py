#!/usr/bin/env python3
"""Reproduce the random-matrix experiment: classify interpolated seeded GUE
Hamiltonians by which endpoint dominates.

    python scripts/run_gue.py --out runs
"""

import argparse
import json

from qphase.experiments import default_config, run_gue_experiment


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs")
    parser.add_argument("--threads", type=int, default=2)
    args = parser.parse_args()

    cfg = default_config("gue", args.out)
    cfg.threads = args.threads
    result = run_gue_experiment(cfg)
    print("written to", result["run_dir"])
    print(json.dumps(result["summary"]["accuracies"], indent=2, sort_keys=True))
    print(f"selected model accuracy: {result['accuracy']:.3f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
