"""Run the three simulation designs and print the summary tables.

    python scripts/reproduce_tables.py                  # desk scale, all tables
    python scripts/reproduce_tables.py --table 3 --full-scale --workers 4

Tables 1 and 2: mean, SD and mean estimated SD of every estimate at n = 200
and n = 1000 over (b, phi) in {0.1, -0.1, 1, -1} x {0, 0.9}. Table 3:
rejection rates of the b = 0 test at levels 0.1 and 0.05.
CSV copies are written to --out-dir.
"""
from __future__ import annotations

import argparse
import time
from pathlib import Path

from bilinear_gmle.montecarlo import (
    SUMMARY_PARAMS,
    run_experiment,
    table1_spec,
    table2_spec,
    table3_spec,
    write_summaries,
)

DESIGNS = {
    1: (table1_spec, 300, 1000),
    2: (table2_spec, 300, 1000),
    3: (table3_spec, 2000, 10000),
}


def print_estimation(summaries) -> None:
    width = 12
    print(" " * 18 + "".join(f"{f'({s.cell.params.b:g}, {s.cell.params.phi:g})':>{width}}" for s in summaries))
    for name in SUMMARY_PARAMS:
        for stat in ("E", "SD", "SDhat"):
            row = "".join(f"{s.stats[name][stat]:>{width}.4f}" if s.stats else f"{'-':>{width}}" for s in summaries)
            print(f"{name + ' ' + stat:<18}{row}")
    print(f"{'boundary hits':<18}" + "".join(f"{s.n_boundary:>{width}d}" for s in summaries))
    print(f"{'failures':<18}" + "".join(f"{s.failures:>{width}d}" for s in summaries))


def print_size_power(summaries, levels) -> None:
    print(f"{'cell':<32}" + "".join(f"{'level ' + format(lv, 'g'):>12}" for lv in levels))
    for s in summaries:
        print(f"{s.cell.name:<32}" + "".join(f"{s.rejection[lv]:>12.4f}" for lv in levels))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--table", choices=("1", "2", "3", "all"), default="all")
    ap.add_argument("--replications", type=int, default=None)
    ap.add_argument("--full-scale", action="store_true", help="1000 replications for tables 1-2, 10000 for 3")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out-dir", type=Path, default=Path("results"))
    args = ap.parse_args()

    args.out_dir.mkdir(parents=True, exist_ok=True)
    tables = (1, 2, 3) if args.table == "all" else (int(args.table),)
    for k in tables:
        build, desk, full = DESIGNS[k]
        reps = args.replications or (full if args.full_scale else desk)
        spec = build(reps)
        t0 = time.perf_counter()
        summaries = run_experiment(spec, workers=args.workers)
        print(f"\nTable {k}: {reps} replications, seed {spec.master_seed}, {time.perf_counter() - t0:.0f}s")
        if spec.mode == "size_power":
            print_size_power(summaries, spec.levels)
        else:
            print_estimation(summaries)
        write_summaries(args.out_dir / f"table{k}.csv", spec, summaries)


if __name__ == "__main__":
    main()
