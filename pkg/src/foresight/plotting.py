"""Figures for bench reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.figsize": (4.5, 3.2),
    "savefig.dpi": 150,
}


def scaling_figure(sizes, seconds, slope: float, intercept: float, path, *, per_seed=None) -> None:
    """Log-log plot of solve time against tree size with the fitted line."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        if per_seed is not None:
            for n, times in zip(sizes, per_seed):
                ax.scatter([n] * len(times), times, s=8, color="0.7", zorder=1)
        ax.plot(sizes, seconds, "o-", color="C0", label="median solve time", zorder=2)
        xs = np.array(sizes, dtype=float)
        ax.plot(xs, np.exp(intercept) * xs ** slope, "--", color="C3", label=f"fit, slope {slope:.2f}")
        ax.set_xscale("log", base=2)
        ax.set_yscale("log")
        ax.set_xlabel("histories n")
        ax.set_ylabel("seconds")
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
