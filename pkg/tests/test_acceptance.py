"""Acceptance criteria, one experiment each, run with the shipped configs.

Each criterion passes when its experiment passes every row tolerance and
summary check within the runtime budget.  A line per criterion is printed at
the end of the pytest run (and by ``python tests/test_acceptance.py``).
"""
import pathlib
import sys

import pytest

from quelab import config
from quelab.experiments import CRITERIA, run_experiment

CONFIGS = pathlib.Path(__file__).resolve().parents[1] / "configs"

# runtime budget per criterion, seconds
BUDGET = {1: 60, 2: 300, 3: 60, 4: 60, 5: 60, 6: 180, 7: 300, 8: 600, 9: 300, 10: 600, 11: 300,
          12: 600, 13: 600, 14: 120, 15: 120, 16: 120}

RESULTS: dict[int, tuple[bool, str]] = {}


def evaluate(criterion: int) -> tuple[bool, str]:
    exp = CRITERIA[criterion]
    params = config.load(exp, str(CONFIGS / f"{exp}.json"))
    seed = params.pop("seed", 0)
    rep = run_experiment(exp, params, seed=seed)
    wall = rep.meta["wall_seconds"]
    bad_rows = [r for r in rep.rows if not r["pass"]]
    bad_checks = [c for c in rep.checks if not c.passed]
    ok = rep.passed and wall < BUDGET[criterion]
    notes = [f"{len(rep.rows) - len(bad_rows)}/{len(rep.rows)} rows",
             f"{len(rep.checks) - len(bad_checks)}/{len(rep.checks)} checks", f"{wall:.1f}s"]
    for r in bad_rows[:3]:
        head = list(r.items())[:2]
        notes.append("failed row: " + ", ".join(f"{k}={v}" for k, v in head)
                     + (f", relerr={r['relerr']:.3g}" if "relerr" in r else ""))
    notes += [f"failed: {c.name} [{c.detail}]" for c in bad_checks]
    if wall >= BUDGET[criterion]:
        notes.append(f"over budget {BUDGET[criterion]}s")
    return ok, f"criterion {criterion:2d} {exp:17s} {'PASS' if ok else 'FAIL'}  " + "; ".join(notes)


@pytest.mark.parametrize("criterion", sorted(CRITERIA))
def test_criterion(criterion):
    ok, line = evaluate(criterion)
    RESULTS[criterion] = (ok, line)
    print(line)
    assert ok, line


if __name__ == "__main__":
    worst = 0
    for c in sorted(CRITERIA):
        ok, line = evaluate(c)
        print(line, flush=True)
        worst |= not ok
    sys.exit(worst)
