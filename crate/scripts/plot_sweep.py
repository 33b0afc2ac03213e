#!/usr/bin/env python3
"""Plot infidelity against magnitude from an `eqc sweep` CSV, one line per Walsh order."""

import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt


def main(path, out=None):
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        mag_col = next(h for h in reader.fieldnames if h.startswith("magnitude"))
        series = defaultdict(list)
        for row in reader:
            series[row["walsh"]].append((float(row[mag_col]), float(row["infidelity"])))

    fig, ax = plt.subplots()
    for walsh, pts in sorted(series.items()):
        pts.sort()
        ax.loglog([p[0] for p in pts], [p[1] for p in pts], "o-", label=f"Walsh {walsh}")
    ax.set_xlabel(mag_col)
    ax.set_ylabel("infidelity")
    ax.legend()
    if out:
        fig.savefig(out, dpi=150, bbox_inches="tight")
    else:
        plt.show()


if __name__ == "__main__":
    if len(sys.argv) < 2:
        sys.exit("usage: plot_sweep.py SWEEP.csv [OUT.png]")
    main(*sys.argv[1:3])
