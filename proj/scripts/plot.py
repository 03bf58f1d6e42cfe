#!/usr/bin/env python3
"""Render figures from anchorlab CSV output.

  plot.py trajectory OUT_DIR/trajectory.csv fig.png
  plot.py alpha      OUT_DIR/sweep_summary.csv fig.png   (sweep --key alpha)
  plot.py heatmap    OUT_DIR/sweep_summary.csv fig.png   (sweep --key T --key K)
  plot.py pareto     fig.png summary.csv [summary.csv ...]
"""
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def trajectory(src, out):
    df = pd.read_csv(src)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(df["t"], df["domain_acc"], marker="o", label="domain")
    ax1.plot(df["t"], df["general_acc"], marker="o", label="general")
    ax1.set_xlabel("t")
    ax1.set_ylabel("accuracy")
    ax1.legend()
    if df["kl_anchor_model"].notna().any():
        ax2.plot(df["t"], df["kl_anchor_model"], marker="o", label="KL(anchor || model)")
        ax2.plot(df["t"], df["lemma_bound"], linestyle="--", label="bound")
    ax2.plot(df["t"], df["kl_to_base"], marker="s", label="KL to base")
    ax2.set_xlabel("t")
    ax2.set_ylabel("nats")
    ax2.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=150)


def alpha(src, out):
    df = pd.read_csv(src)
    df = df[df["status"] == "ok"]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    for space, g in df.groupby("space"):
        ax1.plot(g["alpha"], g["domain_acc"], marker="o", label=space)
        ax2.plot(g["alpha"], g["kl_to_base"], marker="o", label=space)
    ax1.set_xlabel("alpha")
    ax1.set_ylabel("domain accuracy")
    ax2.set_xlabel("alpha")
    ax2.set_ylabel("KL to base (nats)")
    ax1.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=150)


def heatmap(src, out):
    df = pd.read_csv(src)
    df = df[df["status"] == "ok"]
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for ax, col in zip(axes, ["domain_acc", "general_acc"]):
        grid = df.pivot_table(index="T", columns="K", values=col)
        im = ax.imshow(grid.values, origin="lower", cmap="viridis")
        ax.set_xticks(range(len(grid.columns)), grid.columns)
        ax.set_yticks(range(len(grid.index)), grid.index)
        ax.set_xlabel("K")
        ax.set_ylabel("T")
        ax.set_title(col)
        fig.colorbar(im, ax=ax)
    fig.tight_layout()
    fig.savefig(out, dpi=150)


def pareto(out, sources):
    df = pd.concat([pd.read_csv(s) for s in sources], ignore_index=True)
    fig, ax = plt.subplots(figsize=(5, 4))
    for _, row in df.iterrows():
        ax.scatter(row["general_acc"], row["domain_acc"])
        ax.annotate(row["method"], (row["general_acc"], row["domain_acc"]))
    ax.set_xlabel("general accuracy")
    ax.set_ylabel("domain accuracy")
    fig.tight_layout()
    fig.savefig(out, dpi=150)


def main(argv):
    if len(argv) < 3:
        print(__doc__, file=sys.stderr)
        return 2
    kind = argv[1]
    if kind == "trajectory":
        trajectory(argv[2], argv[3])
    elif kind == "alpha":
        alpha(argv[2], argv[3])
    elif kind == "heatmap":
        heatmap(argv[2], argv[3])
    elif kind == "pareto":
        pareto(argv[2], argv[3:])
    else:
        print(__doc__, file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
