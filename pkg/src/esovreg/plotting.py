"""Figure rendering: ternary diagrams, per-component panels, score densities.

Figures are drawn with matplotlib and written as self-contained SVG files
(text rendered as paths, no external assets). Output is byte-stable for
fixed inputs: glyph ids are salted with a fixed string and no timestamp is
embedded.

The barycentric map is fixed so plots are comparable across runs:
vertex 1 at (0, 0), vertex 2 at (1, 0), vertex 3 at (1/2, sqrt(3)/2).
A composition maps to ``x = p2 + p3/2``, ``y = p3 * sqrt(3)/2``; a zero
part therefore lands exactly on the edge opposite that part's vertex.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .compositions import CompositionalDataset
from .errors import NotThreeParts, ValidationError

SQRT3_2 = math.sqrt(3.0) / 2.0
#: plane coordinates of the three ternary vertices
TERNARY_VERTICES = ((0.0, 0.0), (1.0, 0.0), (0.5, SQRT3_2))

_SVG_RC = {"svg.hashsalt": "esovreg", "svg.fonttype": "path"}


def ternary_xy(parts):
    """Barycentric-to-plane map for one three-part composition.

    Pure scalar arithmetic: the x coordinate of exact rational parts is an
    exact rational (the vertices' x coordinates are 0, 1, 1/2).
    """
    p = tuple(parts)
    if len(p) != 3:
        raise NotThreeParts(f"ternary map needs 3 parts, got {len(p)}")
    return (p[1] + p[2] / 2, p[2] * SQRT3_2)


def save_figure(fig, path) -> None:
    """Write a figure deterministically and close it."""
    with plt.rc_context(_SVG_RC):
        if str(path).endswith(".svg"):
            fig.savefig(path, format="svg", metadata={"Date": None})
        else:
            fig.savefig(path)
    plt.close(fig)


def _draw_triangle(ax, labels):
    xs = [v[0] for v in TERNARY_VERTICES] + [0.0]
    ys = [v[1] for v in TERNARY_VERTICES] + [0.0]
    ax.plot(xs, ys, color="black", linewidth=1.0)
    offsets = ((-0.03, -0.04), (0.03, -0.04), (0.0, 0.035))
    aligns = ("right", "left", "center")
    for (vx, vy), (dx, dy), name, ha in zip(TERNARY_VERTICES, offsets, labels, aligns):
        ax.text(vx + dx, vy + dy, name, ha=ha, va="center", fontsize=11)
    ax.set_aspect("equal")
    ax.set_axis_off()
    ax.set_xlim(-0.12, 1.12)
    ax.set_ylim(-0.12, SQRT3_2 + 0.12)


def ternary_figure(compositions, labels=("part1", "part2", "part3"),
                   curve=None, title=None):
    """Ternary diagram of three-part compositions.

    Rows containing a zero part are drawn as red triangles (they sit on an
    edge); ``curve`` is an optional (m, 3) array of compositions drawn as a
    polyline (a fitted regression line, usually).
    """
    comps = np.atleast_2d(np.asarray(compositions, dtype=float))
    if comps.shape[1] != 3:
        raise NotThreeParts(
            f"ternary diagram needs 3 parts, got {comps.shape[1]}; "
            "use per-component panels instead"
        )
    fig, ax = plt.subplots(figsize=(5.2, 4.8))
    _draw_triangle(ax, labels)

    xy = np.array([ternary_xy(row) for row in comps])
    zero_rows = (comps == 0).any(axis=1)
    if (~zero_rows).any():
        ax.scatter(xy[~zero_rows, 0], xy[~zero_rows, 1], s=18,
                   facecolors="none", edgecolors="tab:blue", linewidths=1.0,
                   zorder=3, label="data")
    if zero_rows.any():
        ax.scatter(xy[zero_rows, 0], xy[zero_rows, 1], s=26, marker="^",
                   color="red", zorder=3, label="zero part")
    if curve is not None:
        cxy = np.array([ternary_xy(row) for row in np.atleast_2d(curve)])
        ax.plot(cxy[:, 0], cxy[:, 1], color="tab:green", linewidth=1.4,
                zorder=2, label="fitted")
    if title:
        ax.set_title(title)
    if zero_rows.any() or curve is not None:
        ax.legend(loc="upper right", frameon=False, fontsize=8)
    return fig


def component_panels(data: CompositionalDataset, fitted=None, title=None):
    """One panel per part: covariate against observed (and fitted) share.

    Uses the first non-intercept covariate on the x axis; drawn for any D,
    and the fallback display when a ternary diagram is impossible.
    """
    if data.n_covariates < 1:
        raise ValidationError("per-component panels need at least one covariate")
    x = data.design[:, 1]
    order = np.argsort(x, kind="stable")
    D = data.n_parts
    ncols = min(3, D)
    nrows = (D + ncols - 1) // ncols
    fig, axes = plt.subplots(nrows, ncols, figsize=(3.2 * ncols, 2.8 * nrows),
                             squeeze=False, sharex=True)
    for j in range(D):
        ax = axes[j // ncols][j % ncols]
        ax.scatter(x, data.responses[:, j], s=12, facecolors="none",
                   edgecolors="tab:blue", linewidths=0.9, label="observed")
        if fitted is not None:
            ax.plot(x[order], np.asarray(fitted)[order, j], color="red",
                    linewidth=1.2, label="fitted")
        ax.set_title(data.part_names[j], fontsize=10)
        ax.set_xlabel(data.covariate_names[1], fontsize=9)
        ax.set_ylim(-0.05, 1.05)
    for j in range(D, nrows * ncols):
        axes[j // ncols][j % ncols].set_axis_off()
    if fitted is not None:
        axes[0][0].legend(fontsize=7, frameon=False)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    return fig


def density_figure(curves: dict, title=None):
    """Kernel density curves of per-replication scores, one per estimator
    (ES-OV red, baseline black, the benchmark figures' styling)."""
    colors = {"esov": "red", "aitchison": "black"}
    fig, ax = plt.subplots(figsize=(4.6, 3.6))
    for name, curve in sorted(curves.items()):
        ax.plot(curve.grid, curve.density, color=colors.get(name, "tab:blue"),
                linewidth=1.2, label=name)
    ax.set_xlabel("LOOCV KL divergence")
    ax.set_ylabel("density")
    ax.legend(frameon=False, fontsize=9)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return fig


def density_grid_figure(cells: list[tuple[int, int, dict]], title=None):
    """Grid of density panels keyed by (n, D): rows are component counts,
    columns are sample sizes."""
    ns = sorted({n for n, _, _ in cells})
    Ds = sorted({D for _, D, _ in cells})
    colors = {"esov": "red", "aitchison": "black"}
    fig, axes = plt.subplots(len(Ds), len(ns),
                             figsize=(2.9 * len(ns), 2.6 * len(Ds)),
                             squeeze=False)
    lookup = {(n, D): curves for n, D, curves in cells}
    for i, D in enumerate(Ds):
        for j, n in enumerate(ns):
            ax = axes[i][j]
            curves = lookup.get((n, D))
            if curves is None:
                ax.set_axis_off()
                continue
            for name, curve in sorted(curves.items()):
                ax.plot(curve.grid, curve.density,
                        color=colors.get(name, "tab:blue"), linewidth=1.0,
                        label=name)
            ax.set_title(f"n={n}, D={D}", fontsize=9)
            ax.tick_params(labelsize=7)
    axes[0][0].legend(fontsize=7, frameon=False)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    return fig
