"""Figures written next to the text/CSV reports.

All functions render off-screen (Agg) and write straight to a file path.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .dwt import SubbandPyramid  # noqa: E402
from .evaluation import ConfusionMatrix, GridResult, accuracy, accuracy_table  # noqa: E402

# keep PNG bytes stable across runs
_PNG_META = {"Software": None}


def rescale_to_byte(coeffs: np.ndarray) -> np.ndarray:
    """Affine min-max map to [0, 255]; a constant band maps to 0."""
    c = np.asarray(coeffs, dtype=np.float64)
    lo, hi = float(c.min()), float(c.max())
    if hi == lo:
        return np.zeros_like(c)
    return np.rint((c - lo) * (255.0 / (hi - lo)))


def pyramid_mosaic(pyramid: SubbandPyramid) -> np.ndarray:
    """Classic nested layout: LL top-left, HL top-right, LH bottom-left, HH bottom-right.

    Every band is rescaled independently, so the mosaic is for viewing only.
    """
    h, w = pyramid.source_shape
    out = np.zeros((h, w))
    bh, bw = pyramid.approximation.height, pyramid.approximation.width
    out[:bh, :bw] = rescale_to_byte(pyramid.approximation.coefficients)
    for lh, hl, hh in reversed(pyramid.details):
        bh, bw = lh.height, lh.width
        out[:bh, bw:2 * bw] = rescale_to_byte(hl.coefficients)
        out[bh:2 * bh, :bw] = rescale_to_byte(lh.coefficients)
        out[bh:2 * bh, bw:2 * bw] = rescale_to_byte(hh.coefficients)
    return out


def plot_pyramid(pyramid: SubbandPyramid, path, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.imshow(pyramid_mosaic(pyramid), cmap="gray", vmin=0, vmax=255, interpolation="nearest")
    h, w = pyramid.source_shape
    for lh, _, _ in pyramid.details:
        bh, bw = lh.height, lh.width
        ax.plot([bw - 0.5, bw - 0.5], [-0.5, 2 * bh - 0.5], color="r", lw=0.8)
        ax.plot([-0.5, 2 * bw - 0.5], [bh - 0.5, bh - 0.5], color="r", lw=0.8)
    ax.set_xlim(-0.5, w - 0.5)
    ax.set_ylim(h - 0.5, -0.5)
    ax.set_xticks([])
    ax.set_yticks([])
    ax.set_title(title or f"{pyramid.levels}-level {pyramid.filter.family.value} DWT")
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata=_PNG_META)
    plt.close(fig)


def plot_grid(result: GridResult, path) -> None:
    acc = accuracy_table(result)
    labels = [f"σ={r.sigma:g}\nc={r.cost:g}" for r in result.rows]
    x = np.arange(len(result.rows))
    width = 0.8 / max(len(result.levels), 1)
    fig, ax = plt.subplots(figsize=(max(6, 0.7 * len(x) + 2), 4))
    for k, lv in enumerate(result.levels):
        ax.bar(x + (k - (len(result.levels) - 1) / 2) * width, np.nan_to_num(acc[:, k]),
               width, label=f"{lv}-level")
    ax.set_xticks(x)
    ax.set_xticklabels(labels, fontsize=7)
    ax.set_ylabel("test accuracy (%)")
    ax.set_ylim(0, 100)
    ax.legend(loc="lower right", fontsize=8)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata=_PNG_META)
    plt.close(fig)


def plot_confusion(cm: ConfusionMatrix, path, title: str = "") -> None:
    grid = np.array([[cm.tp, cm.fn], [cm.fp, cm.tn]])
    fig, ax = plt.subplots(figsize=(4, 3.6))
    ax.imshow(grid, cmap="Blues", vmin=0)
    for (i, j), v in np.ndenumerate(grid):
        ax.text(j, i, str(v), ha="center", va="center",
                color="white" if v > grid.max() / 2 else "black")
    names = ["True defects", "Pseudo defects"]
    ax.set_xticks([0, 1])
    ax.set_xticklabels(names)
    ax.set_yticks([0, 1])
    ax.set_yticklabels(names)
    ax.set_xlabel("predicted")
    ax.set_ylabel("actual")
    ax.set_title(title or f"accuracy {accuracy(cm):.2f}%")
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata=_PNG_META)
    plt.close(fig)
