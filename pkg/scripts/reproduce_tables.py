"""Run the benchmark tables (examples 1-6) and write CSV plus Markdown.

    python3 scripts/reproduce_tables.py --table 4 --out results
    python3 scripts/reproduce_tables.py --all --max-samples 20000 --runs 3

Rows that take minutes to hours per run are skipped unless --heavy is given.
"""
import argparse
import os
import sys
import time
from dataclasses import replace

from bsdegbt.metrics import (ExperimentRecord, records_to_csv, records_to_markdown,
                             run_experiment)
from bsdegbt.paths import build_grid
from bsdegbt.presets import preset
from bsdegbt.problems import ExampleSpec, make_example

M_WIDE = [10000, 20000, 50000, 100000]


def _cells(table):
    """Yield (example spec, N_T or None, M, heavy) for every cell of a table."""
    if table in (1, 2):
        ex = f"ex{table}"
        rows = [(100, t) for t in (1, 2, 3, 4, 5)] + [(500, 1), (1000, 1)]
        for d, T in rows:
            for m in M_WIDE:
                yield ExampleSpec(ex, d, maturity=float(T)), None, m, False
    elif table in (3, 5):
        for n in (10, 20, 30):
            for m in M_WIDE:
                yield ExampleSpec(f"ex{table}", 100), n, m, False
    elif table == 4:
        for d in (10, 50, 100, 200, 300, 500, 1000, 5000, 10000):
            for m in (2000, 5000):
                yield ExampleSpec("ex4", d), 10, m, d >= 5000
    elif table == 6:
        for d in (1, 2, 5):
            for n in (10, 20, 30):
                for m in (10000, 50000, 100000, 200000):
                    yield ExampleSpec("ex6", d), n, m, False
    elif table == 7:
        for d in (8, 10, 20, 50):
            yield ExampleSpec("ex6", d), None, None, d == 50
    else:
        raise SystemExit(f"unknown table {table}")


def run_table(table, runs, seed, max_samples, heavy, workers, log):
    records = []
    for spec, n_steps, m, is_heavy in _cells(table):
        if is_heavy and not heavy:
            continue
        problem = make_example(spec)
        pre = preset(spec.example, spec.dim)
        cfg = pre.config(problem, seed)
        if n_steps is not None:
            cfg = replace(cfg, grid=build_grid(problem.maturity, n_steps))
        if m is not None:
            cfg = replace(cfg, n_samples=m)
        if cfg.n_samples > max_samples:
            continue
        if spec.example == "ex4":
            # only Y is reported for this example, and Y does not depend on the Z fits
            cfg = replace(cfg, skip_unused_z=True)
        start = time.perf_counter()
        stats = run_experiment(problem, cfg, runs, seed, workers=workers)
        rec = ExperimentRecord.build(problem, cfg, stats, seed)
        records.append(rec)
        log(f"table {table}: {spec.example} d={spec.dim} T={problem.maturity} "
            f"N_T={rec.N_T} M={rec.M}: error_y={stats.error_y:.5f}({stats.std_y:.5f}) "
            f"[{time.perf_counter() - start:.1f}s]")
    return records


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--table", type=int, action="append", help="1..7, repeatable")
    ap.add_argument("--all", action="store_true")
    ap.add_argument("--runs", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-samples", type=int, default=10 ** 9,
                    help="skip cells with more paths than this")
    ap.add_argument("--heavy", action="store_true", help="include long-running rows")
    ap.add_argument("--workers", type=int, default=1, help="threads for repeated runs")
    ap.add_argument("--out", default="results")
    args = ap.parse_args(argv)
    tables = list(range(1, 8)) if args.all else (args.table or [])
    if not tables:
        ap.error("give --table N or --all")
    os.makedirs(args.out, exist_ok=True)
    for t in tables:
        recs = run_table(t, args.runs, args.seed, args.max_samples, args.heavy, args.workers,
                         lambda s: print(s, file=sys.stderr, flush=True))
        if not recs:
            continue
        meta = {"table": t, "runs": args.runs, "seed": args.seed}
        column = "M" if t != 7 else "N_T"
        with open(os.path.join(args.out, f"table{t}.csv"), "w") as fh:
            fh.write(records_to_csv(recs, meta))
        with open(os.path.join(args.out, f"table{t}.md"), "w") as fh:
            fh.write(records_to_markdown(recs, column=column, meta=meta))
        print(f"wrote {args.out}/table{t}.csv and .md")


if __name__ == "__main__":
    main()
