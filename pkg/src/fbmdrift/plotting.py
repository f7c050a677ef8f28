"""Figures for study reports.

Figures are drawn on the Agg canvas without touching pyplot state, and PNG
metadata is stripped, so identical reports give byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

from matplotlib.backends.backend_agg import FigureCanvasAgg  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

__all__ = ["STYLE", "render_histograms", "save_figure"]

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "fbmdrift",
}


def save_figure(fig: Figure, path: Path, dpi: int = 120) -> Path:
    path = Path(path)
    FigureCanvasAgg(fig)
    meta = {"Software": None} if path.suffix.lower() == ".png" else {}
    fig.savefig(path, dpi=dpi, metadata=meta)
    return path


def render_histograms(histograms: list[dict], path: Path, title: str = "",
                      labels: list[str] | None = None) -> Path:
    """One panel per coordinate: histogram of ``u`` with the limit normal density.

    ``histograms`` are the dictionaries produced by
    :func:`fbmdrift.experiment.histogram_data`.
    """
    d = len(histograms)
    labels = labels or [f"u_{k + 1}" for k in range(d)]
    with matplotlib.rc_context(STYLE):
        fig = Figure(figsize=(3.2 * d, 2.6))
        axes = fig.subplots(1, d, squeeze=False)[0]
        for ax, h, lab in zip(axes, histograms, labels):
            edges = h["edges"]
            widths = [b - a for a, b in zip(edges[:-1], edges[1:])]
            ax.bar(h["centers"], h["density"], width=widths, color="0.75",
                   edgecolor="0.35", linewidth=0.4, label="empirical")
            ax.plot(h["centers"], h["normal_density"], color="C3", lw=1.2, label="limit normal")
            ax.set_xlabel(lab)
            ax.set_ylabel("density")
        axes[0].legend(frameon=False, loc="upper left")
        if title:
            fig.suptitle(title)
        fig.tight_layout()
        return save_figure(fig, path)
