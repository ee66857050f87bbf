#!/usr/bin/env python3
"""Run every experiment with its default config and print a timing summary.

Usage: python3 scripts/run_all.py [--out results] [--threads N] [ids ...]
"""
from __future__ import annotations

import argparse
import os
import sys
import time

from quelab import cli
from quelab.config import EXPERIMENTS

HERE = os.path.dirname(os.path.abspath(__file__))
CONFIGS = os.path.join(os.path.dirname(HERE), "configs")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("ids", nargs="*", default=list(EXPERIMENTS))
    ap.add_argument("--out", default="results")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    worst = 0
    summary = []
    for exp in args.ids:
        t0 = time.perf_counter()
        code = cli.main(["run", exp, "--config", os.path.join(CONFIGS, f"{exp}.json"),
                         "--out", args.out, "--threads", str(args.threads)])
        summary.append((exp, code, time.perf_counter() - t0))
        worst = max(worst, code)
    print()
    for exp, code, dt in summary:
        print(f"{exp:18s} exit={code} {dt:8.1f}s")
    return worst


if __name__ == "__main__":
    sys.exit(main())
