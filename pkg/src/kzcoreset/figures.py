"""Report figures rendered to files next to the delimited output."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def render_eval_report(report, path):
    """Histogram of relative cost errors over the solution panel."""
    errs = [row["rel_err"] for row in report.rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    if errs:
        ax.hist(errs, bins=min(40, max(5, len(errs) // 10)), color="#4878cf")
        ax.axvline(float(np.median(errs)), color="#d65f5f", label="median")
        ax.legend()
    ax.set_xlabel("relative cost error")
    ax.set_ylabel("solutions")
    ax.set_title(
        f"max {report.summary['max']:.4g}, median {report.summary['median']:.4g}"
    )
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_sweep(rows, path):
    """Median distortion against per-group sample count, log-log axes."""
    deltas = sorted({row["delta"] for row in rows})
    fig, ax = plt.subplots(figsize=(6, 4))
    for stat, color in (("median", "#4878cf"), ("max", "#d65f5f")):
        ys = []
        for d in deltas:
            vals = [row[stat] for row in rows if row["delta"] == d]
            ys.append(float(np.median(vals)))
        ax.plot(deltas, ys, marker="o", color=color, label=stat)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("samples per group")
    ax.set_ylabel("distortion over panel")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
