"""Command line driver: ``quelab run <experiment> --config <path> --out <dir>``.

Writes ``<experiment>.csv`` (rows), ``<experiment>_checks.csv`` (summary
checks) and ``<experiment>.json`` (everything, including wall-clock
metadata).  CSV output is deterministic for a fixed config and seed.

Exit codes: 0 all tolerances pass, 1 some tolerance fails, 2 config error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

from . import config
from .errors import ConfigInvalid
from .experiments import ExperimentReport, run_experiment

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def format_cell(v) -> str:
    """Exact decimal for integers, 17 significant digits for doubles."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return "%.17g" % v
    if hasattr(v, "item") and not isinstance(v, (str, bytes)):
        return format_cell(v.item())
    if isinstance(v, (list, tuple)):
        return ";".join(format_cell(x) for x in v)
    return str(v)


def table_csv(rows: list[dict], columns: tuple = ()) -> str:
    cols: list[str] = list(columns)
    for r in rows:
        cols += [c for c in r if c not in cols]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
    w.writerow(cols)
    for r in rows:
        w.writerow([format_cell(r.get(c)) for c in cols])
    return buf.getvalue()


def report_csv(rep: ExperimentReport) -> str:
    return table_csv(rep.rows)


def checks_csv(rep: ExperimentReport) -> str:
    return table_csv([{"name": c.name, "pass": c.passed, "detail": c.detail} for c in rep.checks],
                     ("name", "pass", "detail"))


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "item") and not isinstance(v, (str, bytes)):
        return v.item()
    return v


def report_json(rep: ExperimentReport) -> str:
    return json.dumps(_jsonable(rep.to_dict()), indent=1, sort_keys=False) + "\n"


def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the target directory and rename into place."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_report(rep: ExperimentReport, out: str) -> list[str]:
    os.makedirs(out, exist_ok=True)
    base = os.path.join(out, rep.experiment)
    paths = [base + ".csv", base + "_checks.csv", base + ".json"]
    for path, text in zip(paths, (report_csv(rep), checks_csv(rep), report_json(rep))):
        write_atomic(path, text)
    return paths


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="quelab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one experiment")
    run.add_argument("experiment", choices=config.EXPERIMENTS)
    run.add_argument("--config", required=True, help="JSON config with schema: 1")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--threads", type=int, default=1)
    run.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    sub.add_parser("list", help="list experiment ids")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        print("\n".join(config.EXPERIMENTS))
        return EXIT_PASS
    try:
        params = config.load(args.experiment, args.config)
        if args.threads < 1:
            raise ConfigInvalid("key 'threads': must be at least 1")
    except ConfigInvalid as exc:
        print(f"quelab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    seed = params.pop("seed", 0) if args.seed is None else args.seed
    params.pop("seed", None)
    rep = run_experiment(args.experiment, params, seed=seed, threads=args.threads)
    paths = write_report(rep, args.out)
    failed = [r for r in rep.rows if not r["pass"]]
    failed_checks = [c for c in rep.checks if not c.passed]
    status = "PASS" if rep.passed else "FAIL"
    print(f"{args.experiment}: {status} ({len(rep.rows) - len(failed)}/{len(rep.rows)} rows, "
          f"{len(rep.checks) - len(failed_checks)}/{len(rep.checks)} checks) -> {paths[0]}")
    for c in failed_checks:
        print(f"  failed check: {c.name} [{c.detail}]")
    return EXIT_PASS if rep.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
