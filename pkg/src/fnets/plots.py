"""Report figures: network heatmaps, eigenvalue scree, ROC and forecasts.

Everything renders through the Agg backend straight to files, so output
bytes do not depend on the display environment.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .networks import Network, NetworkSet
from .panel import TimeSeriesPanel
from .simulation import RocCurve

DPI = 150


def _save(fig, path: Path) -> Path:
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path


def plot_network_heatmap(net: Network, name: str, path) -> Path:
    """Signed heatmap of the weight matrix, symmetric color range."""
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    scale = np.abs(net.weights).max()
    if scale == 0.0:
        scale = 1.0
    im = ax.imshow(net.weights, cmap="RdBu_r", vmin=-scale, vmax=scale)
    kind = "directed" if net.directed else "undirected"
    ax.set_title(f"{name} network ({kind}, threshold {net.threshold:.3g})")
    ax.set_xlabel("series")
    ax.set_ylabel("series")
    fig.colorbar(im, ax=ax, shrink=0.85)
    fig.tight_layout()
    return _save(fig, Path(path))


def plot_networks(nets: NetworkSet, outdir) -> list[Path]:
    outdir = Path(outdir)
    return [
        plot_network_heatmap(net, name, outdir / f"{name}.png")
        for name, net in (
            ("granger", nets.granger),
            ("contemporaneous", nets.contemporaneous),
            ("longrun", nets.longrun),
        )
    ]


def plot_scree(gamma0: np.ndarray, r: int, path) -> Path:
    """Descending eigenvalues of the lag-0 covariance with r marked."""
    vals = np.linalg.eigvalsh(gamma0)[::-1]
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.plot(np.arange(1, vals.size + 1), vals, marker="o", ms=3, lw=1)
    if r >= 1:
        ax.axvline(r, color="crimson", lw=1, ls="--", label=f"r = {r}")
        ax.legend()
    ax.set_xlabel("rank")
    ax.set_ylabel("eigenvalue")
    ax.set_title("covariance scree")
    fig.tight_layout()
    return _save(fig, Path(path))


def plot_forecast(
    panel: TimeSeriesPanel,
    x_fc: np.ndarray,
    path,
    tail: int = 50,
    max_series: int = 8,
) -> Path:
    """Recent history with forecast horizons appended, a few series."""
    k = min(panel.p, max_series)
    t0 = max(0, panel.n - tail)
    hist_t = np.arange(t0, panel.n)
    fc_t = np.arange(panel.n, panel.n + x_fc.shape[0])
    fig, axes = plt.subplots(
        k, 1, figsize=(6.4, 1.4 * k), sharex=True, squeeze=False
    )
    for i in range(k):
        ax = axes[i, 0]
        ax.plot(hist_t, panel.values[i, t0:], color="0.4", lw=0.9)
        if fc_t.size:
            join_t = np.concatenate(([panel.n - 1], fc_t))
            join_v = np.concatenate(([panel.values[i, -1]], x_fc[:, i]))
            ax.plot(join_t, join_v, color="crimson", lw=1.2, marker="o", ms=2.5)
        ax.set_ylabel(panel.labels[i], rotation=0, ha="right", fontsize=8)
    axes[-1, 0].set_xlabel("t")
    fig.suptitle("forecast")
    fig.tight_layout()
    return _save(fig, Path(path))


def plot_roc(curves: dict[str, RocCurve], path) -> Path:
    """Overlayed ROC curves, one per labelled estimand."""
    fig, ax = plt.subplots(figsize=(4.6, 4.2))
    for label, curve in curves.items():
        ax.plot(curve.fpr, curve.tpr, lw=1.2, label=label)
    ax.plot([0, 1], [0, 1], color="0.7", lw=0.8, ls="--")
    ax.set_xlabel("FPR")
    ax.set_ylabel("TPR")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1.02)
    ax.set_title("support recovery")
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    return _save(fig, Path(path))
