"""Regenerate the constants tables for the standard dimension grid.

The analytic entries (constant shrinkage rule) come out exact; the
positive-part entries are Monte Carlo with stderr columns. Replication
count is dialed down here so the demo finishes in seconds; raise --reps
toward 1e6 to reproduce the published four-digit values.
"""

import argparse
import warnings

import steinmse as sm


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--reps", type=int, default=100_000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=None, help="directory for CSV output")
    args = parser.parse_args()

    dims_list = [sm.ProblemDims(5, 5), sm.ProblemDims(10, 5),
                 sm.ProblemDims(5, 10), sm.ProblemDims(10, 10)]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        tables = sm.reproduce_tables(dims_list, reps=args.reps, seed=args.seed)

    for name in ("table1_gamma", "table2_w", "table3_beta2",
                 "table4_gamma_xi_eta", "table5_w_xi_eta"):
        table = tables[name]
        print(f"\n== {name} ==")
        print("  ".join(table.header))
        for row in table.rows:
            print("  ".join(f"{v:.4f}" if isinstance(v, float) else str(v) for v in row))

    if args.out:
        sm.write_tables(tables, args.out, {"reps": args.reps, "seed": args.seed})
        sm.write_plot_script(args.out)
        print(f"\nwrote CSVs to {args.out}")


if __name__ == "__main__":
    main()
