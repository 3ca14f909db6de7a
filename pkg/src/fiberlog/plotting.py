"""Figures for the scaling report."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
}


def figsize(width=6.0, ratio=None):
    ratio = ratio or (math.sqrt(5) - 1) / 2
    return width, width * ratio


def plot_scaling(report: dict, out_dir) -> dict:
    """Render the fiber-size and constraint-count sweeps side by side."""
    out = Path(out_dir)
    fits = report["fits"]
    with plt.rc_context(STYLE):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=figsize(8.0, 0.42))

        xs = np.array([p["n_per_fiber"] for p in report["fiber_size"]])
        ts = np.array([p["median_seconds"] for p in report["fiber_size"]]) * 1e3
        ax1.loglog(xs, ts, "o", color="k", label="median")
        if len(xs) > 1:
            grid = np.geomspace(xs.min(), xs.max(), 50)
            p = fits["size_power"]
            ax1.loglog(grid, p["coef"] * grid ** p["exponent"] * 1e3, "-", color="C0",
                       label=f"fit, exponent {p['exponent']:.2f}")
            ref = ts[0] * (grid / xs[0]) ** 2
            ax1.loglog(grid, ref, ":", color="0.5", label="slope 2 reference")
        ax1.set_xlabel("entities per fiber (N/K)")
        ax1.set_ylabel("query time [ms]")
        ax1.set_title(f"m = {report['m']}")
        ax1.legend(frameon=False)

        ms = np.array([p["m"] for p in report["constraints"]], float)
        tm = np.array([p["median_seconds"] for p in report["constraints"]]) * 1e3
        ax2.plot(ms, tm, "o", color="k", label="median")
        lin = fits["m_linear"]
        grid = np.linspace(ms.min(), ms.max(), 50)
        ax2.plot(grid, (lin["intercept"] + lin["slope"] * grid) * 1e3, "-", color="C0",
                 label=f"linear, R² {lin['r2']:.2f}")
        ax2.set_xlabel("constraints (m)")
        ax2.set_ylabel("query time [ms]")
        ax2.set_title(f"N/K = {report['grid']['n_entities'] // report['grid']['m_sweep_fibers']}")
        ax2.set_ylim(bottom=0)
        ax2.legend(frameon=False)

        fig.tight_layout()
        path = out / "scaling.png"
        fig.savefig(path)
        plt.close(fig)
    return {"figure": path}


def plot_funnel(counts, out_path, labels=None):
    """Bar chart of candidate counts after each constraint."""
    labels = labels or ["all"] + [f"+{i}" for i in range(1, len(counts))]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=figsize(4.5))
        ax.bar(range(len(counts)), counts, color="C0")
        ax.set_xticks(range(len(counts)), labels)
        ax.set_yscale("log")
        ax.set_ylabel("candidates")
        for i, c in enumerate(counts):
            ax.annotate(str(c), (i, c), ha="center", va="bottom", fontsize=7)
        fig.tight_layout()
        fig.savefig(out_path)
        plt.close(fig)
    return Path(out_path)
