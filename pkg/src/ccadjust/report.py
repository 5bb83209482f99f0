"""Static report figures rendered with matplotlib.

The report path draws the same calibrated scenes as the SVG emitter,
plus a model-comparison bar chart, and saves them as PNG files next to
the delimited outputs. Rendering uses the Agg backend so it works
headless.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .biplot import (
    GROUP_PALETTE,
    PROJECTION_COLOR,
    X_COLOR,
    Y_COLOR,
    _axis_segment,
)
from .errors import DataError

__all__ = ["scene_figure", "save_scene_png", "comparison_figure", "save_comparison_png"]

TICK_MARKER_AREA = {"fine": 3.0, "medium": 11.0, "major": 24.0}


def _draw_axis(ax, axis, color, clip_radius):
    anchor = np.asarray(axis.anchor, dtype=float)
    if axis.degenerate:
        ax.plot([anchor[0]], [anchor[1]], marker="o", markersize=3, color=color)
        ax.annotate(axis.label, anchor, textcoords="offset points",
                    xytext=(6, 4), fontsize=9, color=color)
        return
    seg = _axis_segment(axis, clip_radius)
    if seg is not None:
        p1, p2, t_max = seg
        ax.plot([p1[0], p2[0]], [p1[1], p2[1]], color=color, lw=0.7, alpha=0.5)
    else:
        t_max = clip_radius / float(np.hypot(*axis.vector))
    tip = anchor + min(1.0, t_max) * np.asarray(axis.vector, dtype=float)
    ax.plot([anchor[0], tip[0]], [anchor[1], tip[1]], color=color, lw=1.8)
    ax.plot([tip[0]], [tip[1]], marker="o", markersize=3.5, color=color)
    ax.annotate(axis.label, tip, textcoords="offset points", xytext=(5, 5),
                fontsize=9, color=color)
    if axis.ticks:
        xs = [t.position[0] for t in axis.ticks]
        ys = [t.position[1] for t in axis.ticks]
        sizes = [TICK_MARKER_AREA[t.size_class] for t in axis.ticks]
        colors = [X_COLOR if t.value < 0 else Y_COLOR for t in axis.ticks]
        ax.scatter(xs, ys, s=sizes, c=colors, zorder=3, linewidths=0)


def scene_figure(scene):
    """Render a BiplotScene into a matplotlib figure."""
    fig, ax = plt.subplots(figsize=(8, 8))
    radius = scene.clip_radius
    lim = radius * 1.08
    ax.set_xlim(-lim, lim)
    ax.set_ylim(-lim, lim)
    ax.set_aspect("equal")
    ax.axhline(0.0, color="#dddddd", lw=0.8, zorder=0)
    ax.axvline(0.0, color="#dddddd", lw=0.8, zorder=0)
    ax.add_patch(plt.Circle((0, 0), radius, fill=False, color="#cccccc", lw=0.8))
    for axis in scene.x_axes:
        _draw_axis(ax, axis, X_COLOR, radius)
    for axis in scene.y_axes:
        _draw_axis(ax, axis, Y_COLOR, radius)
    lookup = {("x", i): a for i, a in enumerate(scene.x_axes)}
    lookup.update({("y", j): a for j, a in enumerate(scene.y_axes)})
    for src_ref, dst_ref in scene.projections:
        src = lookup[tuple(src_ref)]
        dst = lookup[tuple(dst_ref)]
        d = np.asarray(dst.direction, dtype=float)
        if float(d @ d) <= 0:
            continue
        tip = np.asarray(src.anchor, dtype=float) + np.asarray(src.vector, dtype=float)
        rel = tip - np.asarray(dst.anchor, dtype=float)
        foot = np.asarray(dst.anchor, dtype=float) + float(rel @ d) * d
        ax.plot([tip[0], foot[0]], [tip[1], foot[1]], color=PROJECTION_COLOR,
                lw=0.9, linestyle=(0, (5, 4)))
    if scene.points:
        group_colors = {}
        for pt in scene.points:
            if pt.group is not None and pt.group not in group_colors:
                group_colors[pt.group] = GROUP_PALETTE[
                    len(group_colors) % len(GROUP_PALETTE)
                ]
        xs = [pt.position[0] for pt in scene.points]
        ys = [pt.position[1] for pt in scene.points]
        colors = [group_colors.get(pt.group, "#555555") for pt in scene.points]
        ax.scatter(xs, ys, s=14, c=colors, alpha=0.75, zorder=4, linewidths=0)
        if group_colors:
            handles = [
                plt.Line2D([], [], marker="o", linestyle="", color=c, label=g)
                for g, c in group_colors.items()
            ]
            ax.legend(handles=handles, loc="lower right", fontsize=8, frameon=False)
    ax.set_title(scene.title, fontsize=12)
    if scene.warnings:
        fig.text(0.5, 0.01, "; ".join(scene.warnings), ha="center",
                 fontsize=8, color="#888888")
    ax.set_xticks([])
    ax.set_yticks([])
    for spine in ax.spines.values():
        spine.set_color("#444444")
    return fig


def save_scene_png(scene, path, dpi=150):
    fig = scene_figure(scene)
    try:
        fig.savefig(path, dpi=dpi)
    except OSError as exc:
        raise DataError("cannot write figure to %r: %s" % (path, exc)) from exc
    finally:
        plt.close(fig)
    return path


def comparison_figure(rows, rank=None):
    """Bar chart of RMSE-GLS and RMSE-OLS for a comparison-row list.

    Rows carrying an error are drawn as empty slots with the message in
    the tick label.
    """
    labels = []
    gls = []
    ols = []
    for row in rows:
        if "error" in row:
            labels.append("%s\n(failed)" % row["method"])
            gls.append(0.0)
            ols.append(0.0)
        else:
            labels.append(row["method"])
            gls.append(row["rmse_gls"])
            ols.append(row["rmse_ols"])
    pos = np.arange(len(labels))
    width = 0.38
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.bar(pos - width / 2, gls, width, label="RMSE-GLS", color="#1565c0")
    ax.bar(pos + width / 2, ols, width, label="RMSE-OLS", color="#c62828")
    ax.set_xticks(pos)
    ax.set_xticklabels(labels, fontsize=9)
    ax.set_ylabel("RMSE")
    title = "Model comparison" if rank is None else "Model comparison, rank %d" % rank
    ax.set_title(title, fontsize=12)
    ax.legend(fontsize=9, frameon=False)
    fig.tight_layout()
    return fig


def save_comparison_png(rows, path, rank=None, dpi=150):
    fig = comparison_figure(rows, rank)
    try:
        fig.savefig(path, dpi=dpi)
    except OSError as exc:
        raise DataError("cannot write figure to %r: %s" % (path, exc)) from exc
    finally:
        plt.close(fig)
    return path
