#!/usr/bin/env python3
"""Plot a d2dsim sweep/figure CSV.

    d2dsim figure fig3 --out fig3.csv
    scripts/plot_csv.py fig3.csv --y pa mc_pa -o fig3.png

One line per (sweep, scheme, policy, cache_slots) group; x is the `value`
column unless --x says otherwise. Columns ending in _hw are drawn as error bars
for the matching mean column when present.
"""
import argparse
import csv
import math
from collections import defaultdict


def number(text):
    try:
        return float(text)
    except (TypeError, ValueError):
        return math.nan


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("csv")
    ap.add_argument("--x", default="value")
    ap.add_argument("--y", nargs="+", default=["pa"])
    ap.add_argument("--logx", action="store_true")
    ap.add_argument("-o", "--output", help="image file; shows a window when omitted")
    args = ap.parse_args()

    import matplotlib

    if args.output:
        matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with open(args.csv, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise SystemExit("no rows in " + args.csv)
    keys = [k for k in ("sweep", "scheme", "policy", "cache_slots") if k in rows[0]]
    groups = defaultdict(list)
    for r in rows:
        groups[tuple(r[k] for k in keys)].append(r)

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, members in groups.items():
        xs = [number(r[args.x]) for r in members]
        for col in args.y:
            if col not in members[0]:
                raise SystemExit("no column " + col)
            ys = [number(r[col]) for r in members]
            if all(math.isnan(y) for y in ys):
                continue
            hw_col = col + "_hw"
            name = " ".join(v for v in label if v) + " " + col
            if hw_col in members[0]:
                ax.errorbar(xs, ys, yerr=[number(r[hw_col]) for r in members], capsize=2, marker="o", ms=3, label=name)
            else:
                ax.plot(xs, ys, marker=".", label=name)
    ax.set_xlabel(args.x)
    ax.set_ylabel(", ".join(args.y))
    if args.logx:
        ax.set_xscale("log")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    if args.output:
        fig.savefig(args.output, dpi=150)
    else:
        plt.show()


if __name__ == "__main__":
    main()
