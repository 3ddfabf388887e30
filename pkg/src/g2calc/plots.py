"""Matplotlib figures for flow trajectories, bracket flows, and sweeps.

Everything renders through the Agg backend and is written straight to an
image file, so the module works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .forms import multi_indices

__all__ = ["flow_figure", "bracket_figure", "sweep_figure", "save_figure"]


def _mark_singularity(ax, trajectory):
    if getattr(trajectory, "singular", False) and trajectory.t_singular:
        ax.axvline(trajectory.t_singular, color="crimson", linestyle="--",
                   linewidth=1.0, alpha=0.8)


def flow_figure(trajectory, title="Laplacian flow"):
    """Two panels: 3-form coefficients on top, diagnostics below."""
    fig, (ax_top, ax_bot) = plt.subplots(
        2, 1, figsize=(8.0, 7.0), sharex=True,
        gridspec_kw={"height_ratios": [3, 2]},
    )
    t = trajectory.times
    coeffs = trajectory.coeffs
    labels = ["".join(map(str, idx)) for idx in multi_indices(3)]
    # highlight the coefficients that actually move; draw the rest faintly
    spread = coeffs.max(axis=0) - coeffs.min(axis=0)
    lively = np.argsort(spread)[::-1][:8]
    for m in range(coeffs.shape[1]):
        if m in lively and spread[m] > 1e-12:
            ax_top.plot(t, coeffs[:, m], linewidth=1.4, label=labels[m])
        else:
            ax_top.plot(t, coeffs[:, m], linewidth=0.5, color="0.75")
    if np.any(spread[lively] > 1e-12):
        ax_top.legend(loc="best", fontsize=8, ncol=2,
                      title="coefficient of e^{ijk}")
    ax_top.set_ylabel("3-form coefficients")
    ax_top.set_title(title)
    _mark_singularity(ax_top, trajectory)

    diag = trajectory.diagnostics()
    ax_bot.plot(t, diag["tau_norm2"], label=r"$|\tau|^2$", linewidth=1.4)
    ax_bot.plot(t, -diag["scalar"], label=r"$-R$", linewidth=1.4)
    finite = np.isfinite(diag["F"])
    if finite.any():
        ax_bot.plot(t[finite], diag["F"][finite], label="F", linewidth=1.4)
    ax_bot.set_xlabel("t")
    ax_bot.set_ylabel("diagnostics")
    ax_bot.legend(loc="best", fontsize=9)
    _mark_singularity(ax_bot, trajectory)
    fig.tight_layout()
    return fig


def bracket_figure(trajectory, title="Bracket flow"):
    """Two panels: the (a, b, c) coordinates and the (H, F) diagnostics."""
    fig, (ax_top, ax_bot) = plt.subplots(2, 1, figsize=(8.0, 6.0),
                                         sharex=True)
    t = trajectory.times
    for m, label in enumerate("abc"):
        ax_top.plot(t, trajectory.points[:, m], label=label, linewidth=1.4)
    ax_top.set_ylabel("bracket coordinates")
    ax_top.set_title(title)
    ax_top.legend(loc="best")

    ax_bot.plot(t, trajectory.H, label="H", linewidth=1.4)
    finite = np.isfinite(trajectory.F)
    if finite.any():
        ax_bot.plot(t[finite], trajectory.F[finite], label="F",
                    linewidth=1.4)
    ax_bot.set_xlabel("t")
    ax_bot.set_ylabel("diagnostics")
    ax_bot.legend(loc="best")
    fig.tight_layout()
    return fig


def sweep_figure(param_name, values, columns, title="Parameter sweep"):
    """Numeric sweep columns against the swept parameter, one axis each."""
    numeric = {}
    for key, column in columns.items():
        arr = np.asarray(column, dtype=object)
        try:
            arr = np.array([np.nan if v is None else float(v)
                            for v in column], dtype=float)
        except (TypeError, ValueError):
            continue
        if np.isfinite(arr).any():
            numeric[key] = arr
    n = max(1, len(numeric))
    fig, axes = plt.subplots(n, 1, figsize=(7.0, 2.2 * n + 1.0),
                             sharex=True, squeeze=False)
    axes = axes[:, 0]
    values = np.asarray(values, dtype=float)
    if numeric:
        for ax, (key, arr) in zip(axes, numeric.items()):
            ax.plot(values, arr, marker="o", markersize=3, linewidth=1.2)
            ax.set_ylabel(key)
    else:
        axes[0].text(0.5, 0.5, "no numeric columns to plot",
                     ha="center", va="center",
                     transform=axes[0].transAxes)
    axes[-1].set_xlabel(param_name)
    axes[0].set_title(title)
    fig.tight_layout()
    return fig


def save_figure(fig, path, dpi=150):
    """Write the figure to a file and release it."""
    fig.savefig(path, dpi=dpi, bbox_inches="tight")
    plt.close(fig)
    return path
