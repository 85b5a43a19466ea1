"""Log-log diagnostic plots written as SVG."""

from __future__ import annotations

import os
import tempfile

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

COLORS = {"Finite": "tab:green", "Divergent": "tab:red", "Inconclusive": "tab:gray"}


def _save(fig, path):
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(suffix=".svg", dir=folder)
    os.close(fd)
    try:
        fig.savefig(tmp, format="svg")
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    finally:
        plt.close(fig)
        if os.path.exists(tmp):
            os.remove(tmp)


def plot_verdicts(verdicts, path, xlabel="cutoff R", ylabel="I(R)", title=None):
    """One curve of I(R) against R per tested exponent, coloured by verdict."""
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    seen = set()
    for x, v in verdicts:
        pts = np.asarray(v.get("cutoff_values", []), dtype=float)
        if pts.size == 0:
            continue
        pts = pts[(pts[:, 0] > 0) & (pts[:, 1] > 0)]
        label = v["verdict"] if v["verdict"] not in seen else None
        seen.add(v["verdict"])
        ax.loglog(pts[:, 0], pts[:, 1], color=COLORS.get(v["verdict"], "black"), lw=0.8, alpha=0.8,
                  label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if seen:
        ax.legend()
    _save(fig, path)


def plot_fit(x, y, slope, intercept, path, xlabel, ylabel, title=None, used=None):
    """Log-log scatter with a fitted line; ``used`` marks the points in the fit."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    used = np.ones(x.size, dtype=bool) if used is None else np.asarray(used, dtype=bool)
    ax.loglog(x[~used], y[~used], "o", color="tab:gray", ms=3)
    ax.loglog(x[used], y[used], "o", color="tab:blue", ms=4)
    if np.any(used):
        xs = np.geomspace(x[used].min(), x[used].max(), 20)
        ax.loglog(xs, np.exp(intercept) * xs ** slope, "-", color="tab:orange", label=f"slope {slope:.3f}")
        ax.legend()
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    _save(fig, path)
