"""Figures for CLI runs.  matplotlib is imported on first use only, so the
numerical core works without it (``pip install artifact[plot]``)."""

from __future__ import annotations

from typing import Mapping, Sequence

from .errors import ValidationError


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:
        raise ValidationError("--plot needs matplotlib (pip install 'artifact[plot]')") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams.update({"font.size": 9, "axes.spines.top": False, "axes.spines.right": False})
    return plt


def plot_columns(columns: Mapping[str, Sequence[float]], x: str, panels: Sequence[Sequence[str]],
                 path: str, title: str = "") -> None:
    """One stacked panel per group of columns in ``panels``, all against ``x``."""
    plt = _pyplot()
    fig, axes = plt.subplots(len(panels), 1, figsize=(6.0, 2.2 * len(panels)), sharex=True, squeeze=False)
    for ax, names in zip(axes[:, 0], panels):
        for name in names:
            ax.plot(columns[x], columns[name], lw=1.2, label=name)
        ax.axhline(0.0, color="0.6", lw=0.6)
        ax.legend(frameon=False, loc="best")
    axes[-1, 0].set_xlabel(x)
    if title:
        axes[0, 0].set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_scatter(xs, ys, xlabel: str, ylabel: str, path: str, title: str = "") -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(4.5, 4.0))
    ax.scatter(xs, ys, s=3, alpha=0.5)
    ax.axhline(0.0, color="0.6", lw=0.6)
    ax.axvline(0.0, color="0.6", lw=0.6)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
