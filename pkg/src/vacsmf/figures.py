"""Matplotlib rendering of report and evaluation outputs to image files."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd


def plot_csmf_trajectories(summary: pd.DataFrame, path, truth=None) -> None:
    """Per-(sex, age) prevalence trajectories over time with interval bands."""
    ages = sorted(summary["a"].unique())
    fig, axes = plt.subplots(2, len(ages), figsize=(2.2 * len(ages), 5.0),
                             sharex=True, sharey=True, squeeze=False)
    for si, s in enumerate((1, 2)):
        for ai, a in enumerate(ages):
            ax = axes[si][ai]
            cell = summary[(summary["s"] == s) & (summary["a"] == a)].sort_values("t")
            ax.fill_between(cell["t"], cell["lower"], cell["upper"], alpha=0.3, lw=0)
            ax.plot(cell["t"], cell["mean"], lw=1.2)
            if truth is not None:
                ax.plot(cell["t"], truth[s - 1, :, a - 1], "k.", ms=3)
            if si == 0:
                ax.set_title(f"age {a}", fontsize=9)
            if ai == 0:
                ax.set_ylabel(f"sex {s}\nCSMF", fontsize=9)
            ax.set_ylim(0, 1)
    for ax in axes[1]:
        ax.set_xlabel("time")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_symptom_profiles(profiles: pd.DataFrame, path) -> None:
    """Heatmap of per-class symptom probabilities, one panel per cause."""
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    for c, ax in zip((1, 0), axes):
        sub = profiles[profiles["cause"] == c]
        grid = sub.pivot_table(index="symptom", columns="class_rank",
                               values="probability").to_numpy()
        im = ax.imshow(grid, aspect="auto", vmin=0, vmax=1, cmap="viridis")
        ax.set_title(f"cause {c}")
        ax.set_xlabel("latent class (by expected symptom count)")
        ax.set_ylabel("symptom")
    fig.colorbar(im, ax=axes, shrink=0.8, label="P(symptom)")
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_class_weight_stacks(weights: pd.DataFrame, path) -> None:
    """Stacked class-weight bars over strata, one panel per cause."""
    fig, axes = plt.subplots(2, 1, figsize=(10, 6), sharex=True)
    for c, ax in zip((1, 0), axes):
        sub = weights[weights["cause"] == c].copy()
        sub["stratum"] = (
            sub["sex"].astype(str) + "/" + sub["time"].astype(str) + "/" + sub["age"].astype(str)
        )
        pivot = sub.pivot_table(index="stratum", columns="class_rank",
                                values="weight", sort=False)
        bottom = np.zeros(len(pivot))
        xs = np.arange(len(pivot))
        for rank in pivot.columns:
            vals = pivot[rank].to_numpy()
            ax.bar(xs, vals, bottom=bottom, width=1.0)
            bottom += vals
        ax.set_ylabel(f"cause {c} weight")
        ax.set_ylim(0, 1)
    axes[1].set_xlabel("stratum (sex/time/age, flat order)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_bias_box(bias_table: pd.DataFrame, path, value="bias", by="model") -> None:
    """One box of signed bias per model."""
    models = list(dict.fromkeys(bias_table[by]))
    data = [bias_table.loc[bias_table[by] == m, value].to_numpy() for m in models]
    fig, ax = plt.subplots(figsize=(1.2 * len(models) + 2, 4))
    ax.boxplot(data, tick_labels=models)
    ax.axhline(0.0, color="k", lw=0.8, ls=":")
    ax.set_ylabel("bias of overall CSMF")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_crps_improvement(table: pd.DataFrame, path) -> None:
    """Improvement against stratum size, colored by unverified fraction."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    sc = ax.scatter(table["n"], table["improvement"], c=table["unverified_frac"],
                    s=10, cmap="plasma", vmin=0, vmax=1)
    ax.axhline(0.0, color="k", lw=0.8, ls=":")
    ax.set_xlabel("stratum size")
    ax.set_ylabel("CRPS improvement over baseline")
    fig.colorbar(sc, ax=ax, label="unverified fraction")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
