#!/usr/bin/env python3
"""Plot a `kinorrt compare` table: median best cost with a quartile band.

    python3 tools/plot_convergence.py table.csv --out convergence.png
"""

import argparse
import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

AXIS_LABELS = {"nodes": "number of nodes", "elapsed_s": "wall time (s)"}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("table", help="comparison table written by `kinorrt compare --out`")
    parser.add_argument("--out", default="convergence.png")
    parser.add_argument("--axis", choices=["nodes", "elapsed_s", "both"], default="both")
    args = parser.parse_args()

    # empty cells mean no solution yet
    table = pd.read_csv(args.table).fillna(math.inf)
    axes = ["nodes", "elapsed_s"] if args.axis == "both" else [args.axis]
    fig, plots = plt.subplots(1, len(axes), figsize=(6 * len(axes), 4), squeeze=False)
    for plot, axis in zip(plots[0], axes):
        rows = table[table["axis"] == axis]
        for mode, group in rows.groupby("mode", sort=False):
            finite = group[group["median"] < math.inf]
            line, = plot.step(finite["x"], finite["median"], where="post", label=mode)
            band = group[group["q3"] < math.inf]
            plot.fill_between(band["x"], band["q1"], band["q3"], step="post", alpha=0.2,
                              color=line.get_color())
        plot.set_xlabel(AXIS_LABELS[axis])
        plot.set_ylabel("best cost")
        plot.grid(alpha=0.3)
        plot.legend()
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)


if __name__ == "__main__":
    main()
