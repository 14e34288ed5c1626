#!/usr/bin/env python3
"""Plot one or more ROC curves written by `rigcast evaluate` (*_roc.csv)."""

import argparse
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("curves", nargs="+", type=pathlib.Path, help="fpr,tpr,threshold CSV files")
    ap.add_argument("-o", "--out", type=pathlib.Path, default=pathlib.Path("roc.png"))
    args = ap.parse_args()

    fig, ax = plt.subplots(figsize=(5, 5))
    for path in args.curves:
        df = pd.read_csv(path)
        # Trapezoids, same as the rank statistic on the pooled windows.
        area = ((df.fpr.diff() * (df.tpr + df.tpr.shift()) / 2).fillna(0)).sum()
        ax.plot(df.fpr, df.tpr, label=f"{path.stem.removesuffix('_roc')} ({area:.3f})")
    ax.plot([0, 1], [0, 1], color="grey", lw=0.8, ls="--")
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(args.out, dpi=120)


if __name__ == "__main__":
    main()
