"""Calibrated biplot scenes with SVG and JSON serialization.

A scene holds one calibrated axis per variable: the variable's biplot
vector plus a dotted correlation scale. The tick for value v sits at
((v - offset) / |g|^2) g along the vector g, so inner products can be
read off directly; the offset is the correlation represented by the
plot origin (zero for classic CCA, delta or the per-variable adjustment
otherwise). Row-and-column adjusted fits have no unique origin, so
their axes carry no ticks and the scene records a warning.

Scenes canonicalize every number to 12 significant digits when built.
The JSON serializer writes exactly those digits, which makes a render
then parse round-trip bit-exact, and the SVG output is deterministic
byte for byte for a given scene.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .cca import biplot_coordinates
from .errors import DataError, DegenerateAxisError

__all__ = [
    "Tick",
    "CalibratedAxis",
    "BiplotScene",
    "default_tick_values",
    "calibrate_axis",
    "predict_correlation",
    "build_scene",
    "predicted_matrix",
    "scene_to_json",
    "scene_from_json",
    "scene_to_svg",
    "render",
]

SCHEMA_VERSION = "1"

TICK_SIZE_CLASSES = ("fine", "medium", "major")

X_COLOR = "#c62828"
Y_COLOR = "#1565c0"
NEGATIVE_TICK_COLOR = "#c62828"
POSITIVE_TICK_COLOR = "#1565c0"
PROJECTION_COLOR = "#2e7d32"
GROUP_PALETTE = ("#2e7d32", "#c62828", "#6a1b9a", "#ef6c00", "#00838f", "#5d4037")


def _round12(v):
    return float(format(float(v), ".12g"))


def default_tick_values():
    """Correlation grid -1.00, -0.99, ..., 1.00.

    Multiples of 0.1 are major ticks, remaining multiples of 0.05
    medium, the rest fine.
    """
    return [i / 100.0 for i in range(-100, 101)]


def _tick_class(value):
    cents = int(round(value * 100))
    if cents % 10 == 0:
        return "major"
    if cents % 5 == 0:
        return "medium"
    return "fine"


@dataclass
class Tick:
    value: float
    position: tuple
    size_class: str


@dataclass
class CalibratedAxis:
    """One variable's biplot vector with its correlation scale.

    vector is the biplot coordinate pair g; direction its unit vector;
    anchor the plot position of the vector tail (origin except in
    staggered rank-1 scenes); offset the correlation value represented
    at the anchor. Degenerate axes (near-zero vectors) carry no ticks
    and a zero direction.
    """

    label: str
    vector: tuple
    direction: tuple
    anchor: tuple
    offset: float
    ticks: list = field(default_factory=list)
    degenerate: bool = False


@dataclass
class ScenePoint:
    label: str
    position: tuple
    group: str | None = None


@dataclass
class BiplotScene:
    """Full description of a calibrated biplot.

    offset_kind tags how axis offsets combine into predictions: none,
    scalar (one shared delta), row, column, or row_column (x and y
    offsets add).
    """

    title: str
    offset_kind: str
    alpha: float
    clip_radius: float
    x_axes: list
    y_axes: list
    points: list = field(default_factory=list)
    points_scale: float | None = None
    projections: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    schema_version: str = SCHEMA_VERSION

    def predicted_matrix(self):
        return predicted_matrix(self)


def calibrate_axis(
    g_vec,
    offset=0.0,
    tick_values=None,
    clip_radius=1.5,
    anchor=(0.0, 0.0),
    label="",
):
    """Build a calibrated axis for one biplot vector.

    The tick for value v is placed at anchor + ((v - offset) / |g|^2) g;
    ticks whose position falls outside the clip radius (Euclidean, from
    the plot origin) are dropped. Raises DegenerateAxisError when the
    vector is too short to calibrate.
    """
    g = np.asarray(g_vec, dtype=float).reshape(2)
    anchor = np.asarray(anchor, dtype=float).reshape(2)
    norm = float(np.hypot(g[0], g[1]))
    if norm <= 1e-12:
        raise DegenerateAxisError(
            "axis %r has near-zero vector length %.3e" % (label, norm)
        )
    if tick_values is None:
        tick_values = default_tick_values()
    norm_sq = float(g @ g)
    direction = g / norm
    ticks = []
    for v in tick_values:
        t = (float(v) - float(offset)) / norm_sq
        pos = anchor + t * g
        if float(np.hypot(pos[0], pos[1])) <= clip_radius:
            ticks.append(
                Tick(value=float(v), position=(float(pos[0]), float(pos[1])),
                     size_class=_tick_class(v))
            )
    return CalibratedAxis(
        label=str(label),
        vector=(float(g[0]), float(g[1])),
        direction=(float(direction[0]), float(direction[1])),
        anchor=(float(anchor[0]), float(anchor[1])),
        offset=float(offset),
        ticks=ticks,
    )


def predict_correlation(f_vec, axis):
    """Correlation read off an axis for the point or vector f_vec.

    Returns the inner product with the axis vector plus the axis
    offset, which equals the fitted model's reconstructed correlation.
    """
    f = np.asarray(f_vec, dtype=float).reshape(2)
    return float(f[0] * axis.vector[0] + f[1] * axis.vector[1] + axis.offset)


def _round_axis(axis):
    axis.vector = tuple(_round12(v) for v in axis.vector)
    axis.direction = tuple(_round12(v) for v in axis.direction)
    axis.anchor = tuple(_round12(v) for v in axis.anchor)
    axis.offset = _round12(axis.offset)
    for tick in axis.ticks:
        tick.value = _round12(tick.value)
        tick.position = tuple(_round12(v) for v in tick.position)
    return axis


def _axis_for(vec, offset, ticked, tick_values, clip_radius, anchor, label):
    if ticked:
        try:
            return calibrate_axis(vec, offset, tick_values, clip_radius, anchor, label)
        except DegenerateAxisError:
            pass
    g = np.asarray(vec, dtype=float).reshape(2)
    norm = float(np.hypot(g[0], g[1]))
    direction = (g / norm) if norm > 1e-12 else np.zeros(2)
    return CalibratedAxis(
        label=str(label),
        vector=(float(g[0]), float(g[1])),
        direction=(float(direction[0]), float(direction[1])),
        anchor=(float(anchor[0]), float(anchor[1])),
        offset=float(offset),
        ticks=[],
        degenerate=norm <= 1e-12,
    )


def build_scene(
    fit,
    x_names=None,
    y_names=None,
    alpha=1.0,
    clip_radius=1.5,
    tick_values=None,
    points=None,
    point_groups=None,
    point_labels=None,
    projections=None,
    title=None,
):
    """Build a calibrated scene from a fit result.

    Axis offsets and which sides carry ticks follow the fitted model:
    the unadjusted and scalar models calibrate every axis (offset 0 or
    delta), the column model calibrates y-axes at their c_j, the row
    model x-axes at their r_i, and the row-and-column model calibrates
    nothing and records a warning. Rank-1 fits are drawn with vectors
    staggered vertically; the stagger is cosmetic and does not affect
    predictions. points, if given, is an (n, 2) array of variate scores
    scaled by one constant to fit the unit box.
    """
    coords = biplot_coordinates(fit, None, alpha=alpha, k=fit.k)
    f = coords.f
    g = coords.g
    p, q = f.shape[0], g.shape[0]
    if x_names is None:
        x_names = ["X%d" % (i + 1) for i in range(p)]
    if y_names is None:
        y_names = ["Y%d" % (j + 1) for j in range(q)]

    kind = fit.model.value
    x_off = np.zeros(p)
    y_off = np.zeros(q)
    if kind == "scalar":
        x_off[:] = fit.delta
        y_off[:] = fit.delta
    if fit.r_adj is not None:
        x_off = np.asarray(fit.r_adj, dtype=float)
    if fit.c_adj is not None:
        y_off = np.asarray(fit.c_adj, dtype=float)
    ticks_x = kind in ("none", "scalar", "row")
    ticks_y = kind in ("none", "scalar", "column")
    warnings = []
    if kind == "row_column":
        warnings.append(
            "row and column adjusted biplots have no unique origin; "
            "correlation scales are omitted"
        )

    one_dim = fit.k == 1
    step = clip_radius / 10.0
    x_axes = []
    for i in range(p):
        if one_dim:
            vec = (float(f[i, 0]), 0.0)
            anchor = (0.0, step * (i + 1))
        else:
            vec = (float(f[i, 0]), float(f[i, 1]))
            anchor = (0.0, 0.0)
        x_axes.append(
            _axis_for(vec, float(x_off[i]), ticks_x, tick_values, clip_radius,
                      anchor, x_names[i])
        )
    y_axes = []
    for j in range(q):
        if one_dim:
            vec = (float(g[j, 0]), 0.0)
            anchor = (0.0, -step * (j + 1))
        else:
            vec = (float(g[j, 0]), float(g[j, 1]))
            anchor = (0.0, 0.0)
        y_axes.append(
            _axis_for(vec, float(y_off[j]), ticks_y, tick_values, clip_radius,
                      anchor, y_names[j])
        )

    scene_points = []
    points_scale = None
    if points is not None:
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] < 1:
            raise ValueError("points must be an (n, 2) array")
        if pts.shape[1] == 1:
            pts = np.column_stack([pts[:, 0], np.zeros(pts.shape[0])])
        pts = pts[:, :2]
        biggest = float(np.max(np.abs(pts))) if pts.size else 0.0
        points_scale = 1.0 / biggest if biggest > 0 else 1.0
        pts = pts * points_scale
        n_points = pts.shape[0]
        if point_labels is None:
            point_labels = [str(i + 1) for i in range(n_points)]
        if point_groups is None:
            point_groups = [None] * n_points
        for i in range(n_points):
            grp = point_groups[i]
            scene_points.append(
                ScenePoint(
                    label=str(point_labels[i]),
                    position=(float(pts[i, 0]), float(pts[i, 1])),
                    group=None if grp is None else str(grp),
                )
            )

    scene_projections = []
    for ref in projections or []:
        (from_side, from_idx), (to_side, to_idx) = ref
        for side, idx in ((from_side, from_idx), (to_side, to_idx)):
            count = p if side == "x" else q
            if side not in ("x", "y") or not 0 <= idx < count:
                raise ValueError("invalid projection axis reference %r" % (ref,))
        scene_projections.append(((from_side, int(from_idx)), (to_side, int(to_idx))))

    if title is None:
        title = "%s rank %d (%.4f)" % (fit.model.label, fit.k, fit.rmse_gls)

    scene = BiplotScene(
        title=str(title),
        offset_kind=kind,
        alpha=_round12(alpha),
        clip_radius=_round12(clip_radius),
        x_axes=[_round_axis(ax) for ax in x_axes],
        y_axes=[_round_axis(ax) for ax in y_axes],
        points=scene_points,
        points_scale=None if points_scale is None else _round12(points_scale),
        projections=scene_projections,
        warnings=warnings,
    )
    for pt in scene.points:
        pt.position = tuple(_round12(v) for v in pt.position)
    _check_finite(scene)
    return scene


def _check_finite(scene):
    for ax in list(scene.x_axes) + list(scene.y_axes):
        values = list(ax.vector) + list(ax.direction) + list(ax.anchor) + [ax.offset]
        for tick in ax.ticks:
            values.extend([tick.value, tick.position[0], tick.position[1]])
        if not all(math.isfinite(v) for v in values):
            raise ValueError("axis %r contains a non-finite coordinate" % ax.label)
    for pt in scene.points:
        if not all(math.isfinite(v) for v in pt.position):
            raise ValueError("point %r has a non-finite position" % pt.label)


def predicted_matrix(scene):
    """Reconstructed correlation matrix encoded by a scene.

    Combines the axis vectors and offsets according to the scene's
    offset_kind, so every fitted model (including row_column, whose
    per-pair prediction needs both offsets) can be read back.
    """
    f = np.array([ax.vector for ax in scene.x_axes], dtype=float)
    g = np.array([ax.vector for ax in scene.y_axes], dtype=float)
    base = f @ g.T
    kind = scene.offset_kind
    if kind == "none":
        return base
    if kind == "scalar":
        delta = scene.y_axes[0].offset if scene.y_axes else scene.x_axes[0].offset
        return base + delta
    x_off = np.array([ax.offset for ax in scene.x_axes], dtype=float)
    y_off = np.array([ax.offset for ax in scene.y_axes], dtype=float)
    if kind == "row":
        return base + x_off[:, None]
    if kind == "column":
        return base + y_off[None, :]
    if kind == "row_column":
        return base + x_off[:, None] + y_off[None, :]
    raise ValueError("unknown offset_kind %r" % kind)


def _axis_to_dict(ax):
    return {
        "label": ax.label,
        "vector": list(ax.vector),
        "direction": list(ax.direction),
        "anchor": list(ax.anchor),
        "offset": ax.offset,
        "degenerate": ax.degenerate,
        "ticks": [
            {
                "value": t.value,
                "position": list(t.position),
                "size_class": t.size_class,
            }
            for t in ax.ticks
        ],
    }


def scene_to_dict(scene):
    return {
        "schema_version": scene.schema_version,
        "title": scene.title,
        "offset_kind": scene.offset_kind,
        "alpha": scene.alpha,
        "clip_radius": scene.clip_radius,
        "x_axes": [_axis_to_dict(ax) for ax in scene.x_axes],
        "y_axes": [_axis_to_dict(ax) for ax in scene.y_axes],
        "points": [
            {"label": pt.label, "position": list(pt.position), "group": pt.group}
            for pt in scene.points
        ],
        "points_scale": scene.points_scale,
        "projections": [
            {"from": [a, i], "to": [b, j]} for (a, i), (b, j) in scene.projections
        ],
        "warnings": list(scene.warnings),
    }


def _emit_json(obj, indent):
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        inner = ",\n".join(
            '%s  %s: %s' % (pad, json.dumps(key), _emit_json(val, indent + 1))
            for key, val in obj.items()
        )
        return "{\n%s\n%s}" % (inner, pad)
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        inner = ",\n".join(
            "%s  %s" % (pad, _emit_json(val, indent + 1)) for val in obj
        )
        return "[\n%s\n%s]" % (inner, pad)
    if obj is None or isinstance(obj, (bool, str)):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        return str(int(obj))
    value = float(obj)
    if not math.isfinite(value):
        raise ValueError("cannot serialize non-finite number")
    return format(value, ".12g")


def scene_to_json(scene):
    """Serialize a scene to JSON with 12 significant digit numbers."""
    return _emit_json(scene_to_dict(scene), 0) + "\n"


def _axis_from_dict(d):
    return CalibratedAxis(
        label=d["label"],
        vector=tuple(float(v) for v in d["vector"]),
        direction=tuple(float(v) for v in d["direction"]),
        anchor=tuple(float(v) for v in d["anchor"]),
        offset=float(d["offset"]),
        ticks=[
            Tick(
                value=float(t["value"]),
                position=tuple(float(v) for v in t["position"]),
                size_class=t["size_class"],
            )
            for t in d["ticks"]
        ],
        degenerate=bool(d.get("degenerate", False)),
    )


def scene_from_json(text):
    """Parse a scene serialized by scene_to_json."""
    d = json.loads(text)
    if d.get("schema_version") != SCHEMA_VERSION:
        raise DataError(
            "unsupported scene schema version %r" % d.get("schema_version")
        )
    return BiplotScene(
        title=d["title"],
        offset_kind=d["offset_kind"],
        alpha=float(d["alpha"]),
        clip_radius=float(d["clip_radius"]),
        x_axes=[_axis_from_dict(a) for a in d["x_axes"]],
        y_axes=[_axis_from_dict(a) for a in d["y_axes"]],
        points=[
            ScenePoint(
                label=pt["label"],
                position=tuple(float(v) for v in pt["position"]),
                group=pt.get("group"),
            )
            for pt in d.get("points", [])
        ],
        points_scale=(
            None if d.get("points_scale") is None else float(d["points_scale"])
        ),
        projections=[
            ((pr["from"][0], int(pr["from"][1])), (pr["to"][0], int(pr["to"][1])))
            for pr in d.get("projections", [])
        ],
        warnings=list(d.get("warnings", [])),
        schema_version=d["schema_version"],
    )


TICK_RADII = {"fine": 1.5, "medium": 3.0, "major": 4.5}
CANVAS = 800
CENTER = 400.0
PLOT_HALF = 360.0


def _axis_segment(ax, clip_radius, value_range=(-1.0, 1.0)):
    """Endpoints of the calibrated segment, clipped to the plot circle.

    The segment spans the tick values in value_range along the axis
    line; it is truncated at the clip boundary, never rescaled.
    """
    g = np.asarray(ax.vector, dtype=float)
    anchor = np.asarray(ax.anchor, dtype=float)
    norm_sq = float(g @ g)
    if norm_sq <= 0:
        return None
    t_lo = (value_range[0] - ax.offset) / norm_sq
    t_hi = (value_range[1] - ax.offset) / norm_sq
    if t_lo > t_hi:
        t_lo, t_hi = t_hi, t_lo
    a2 = norm_sq
    b2 = 2.0 * float(anchor @ g)
    c2 = float(anchor @ anchor) - clip_radius**2
    disc = b2 * b2 - 4.0 * a2 * c2
    if disc <= 0:
        return None
    root = math.sqrt(disc)
    t_min = (-b2 - root) / (2.0 * a2)
    t_max = (-b2 + root) / (2.0 * a2)
    lo = max(t_lo, t_min)
    hi = min(t_hi, t_max)
    if lo > hi:
        return None
    return anchor + lo * g, anchor + hi * g, t_max


def scene_to_svg(scene):
    """Deterministic SVG 1.1 rendering of a scene (800 x 800 units)."""
    radius = scene.clip_radius
    scale = PLOT_HALF / radius

    def px(pt):
        return CENTER + pt[0] * scale, CENTER - pt[1] * scale

    def fmt(v):
        return "%.2f" % v

    out = []
    out.append(
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        'width="%d" height="%d" viewBox="0 0 %d %d">' % (CANVAS, CANVAS, CANVAS, CANVAS)
    )
    out.append('<rect x="0" y="0" width="%d" height="%d" fill="white"/>' % (CANVAS, CANVAS))
    out.append(
        '<rect x="38" y="38" width="724" height="724" fill="none" '
        'stroke="#444444" stroke-width="1"/>'
    )
    out.append(
        '<text x="%s" y="26" text-anchor="middle" font-family="sans-serif" '
        'font-size="16" fill="#111111">%s</text>' % (fmt(CENTER), _esc(scene.title))
    )
    for i, warning in enumerate(scene.warnings):
        out.append(
            '<text x="%s" y="%d" text-anchor="middle" font-family="sans-serif" '
            'font-size="11" fill="#888888">%s</text>'
            % (fmt(CENTER), 780 + 14 * i - 14 * (len(scene.warnings) - 1), _esc(warning))
        )
    out.append(
        '<line x1="38" y1="%s" x2="762" y2="%s" stroke="#dddddd" stroke-width="1"/>'
        % (fmt(CENTER), fmt(CENTER))
    )
    out.append(
        '<line x1="%s" y1="38" x2="%s" y2="762" stroke="#dddddd" stroke-width="1"/>'
        % (fmt(CENTER), fmt(CENTER))
    )

    axis_lookup = {}
    for side, axes, color in (("x", scene.x_axes, X_COLOR), ("y", scene.y_axes, Y_COLOR)):
        for idx, ax in enumerate(axes):
            axis_lookup[(side, idx)] = ax
            anchor = np.asarray(ax.anchor, dtype=float)
            if ax.degenerate:
                cx, cy = px(anchor)
                out.append(
                    '<circle cx="%s" cy="%s" r="3.00" fill="%s"/>'
                    % (fmt(cx), fmt(cy), color)
                )
                out.append(_label_text(cx + 8.0, cy - 6.0, ax.label, color))
                continue
            seg = _axis_segment(ax, radius)
            if seg is not None:
                (p1, p2, t_max) = seg
                x1, y1 = px(p1)
                x2, y2 = px(p2)
                out.append(
                    '<line x1="%s" y1="%s" x2="%s" y2="%s" stroke="%s" '
                    'stroke-width="0.8" stroke-opacity="0.55"/>'
                    % (fmt(x1), fmt(y1), fmt(x2), fmt(y2), color)
                )
            else:
                t_max = radius / math.sqrt(float(np.dot(ax.vector, ax.vector)))
            tip_t = min(1.0, t_max)
            tip = anchor + tip_t * np.asarray(ax.vector, dtype=float)
            ax1, ay1 = px(anchor)
            ax2, ay2 = px(tip)
            out.append(
                '<line x1="%s" y1="%s" x2="%s" y2="%s" stroke="%s" '
                'stroke-width="2"/>' % (fmt(ax1), fmt(ay1), fmt(ax2), fmt(ay2), color)
            )
            out.append(
                '<circle cx="%s" cy="%s" r="2.50" fill="%s"/>'
                % (fmt(ax2), fmt(ay2), color)
            )
            if _staggered(ax):
                label_pt = (tip[0], tip[1])
            else:
                label_pt = (tip[0] * 1.045, tip[1] * 1.045)
            lx, ly = px(label_pt)
            lx = min(max(lx, 44.0), 756.0)
            ly = min(max(ly, 50.0), 756.0)
            out.append(_label_text(lx, ly - 6.0, ax.label, color))
            for tick in ax.ticks:
                tx, ty = px(np.asarray(tick.position, dtype=float))
                fill = NEGATIVE_TICK_COLOR if tick.value < 0 else POSITIVE_TICK_COLOR
                out.append(
                    '<circle cx="%s" cy="%s" r="%.2f" fill="%s"/>'
                    % (fmt(tx), fmt(ty), TICK_RADII[tick.size_class], fill)
                )

    for (from_side, from_idx), (to_side, to_idx) in scene.projections:
        src = axis_lookup[(from_side, from_idx)]
        dst = axis_lookup[(to_side, to_idx)]
        tip = np.asarray(src.anchor, dtype=float) + np.asarray(src.vector, dtype=float)
        d = np.asarray(dst.direction, dtype=float)
        if float(d @ d) <= 0:
            continue
        rel = tip - np.asarray(dst.anchor, dtype=float)
        foot = np.asarray(dst.anchor, dtype=float) + float(rel @ d) * d
        x1, y1 = px(tip)
        x2, y2 = px(foot)
        out.append(
            '<line x1="%s" y1="%s" x2="%s" y2="%s" stroke="%s" stroke-width="1" '
            'stroke-dasharray="5,4"/>' % (fmt(x1), fmt(y1), fmt(x2), fmt(y2), PROJECTION_COLOR)
        )

    group_colors = {}
    for pt in scene.points:
        if pt.group is not None and pt.group not in group_colors:
            group_colors[pt.group] = GROUP_PALETTE[len(group_colors) % len(GROUP_PALETTE)]
    for pt in scene.points:
        cx, cy = px(np.asarray(pt.position, dtype=float))
        color = group_colors.get(pt.group, "#555555")
        out.append(
            '<circle cx="%s" cy="%s" r="3.50" fill="%s" fill-opacity="0.75">'
            "<title>%s</title></circle>" % (fmt(cx), fmt(cy), color, _esc(pt.label))
        )

    out.append("</svg>")
    return "\n".join(out) + "\n"


def _staggered(ax):
    return ax.anchor != (0.0, 0.0)


def _label_text(x, y, text, color):
    return (
        '<text x="%.2f" y="%.2f" text-anchor="middle" font-family="sans-serif" '
        'font-size="13" fill="%s">%s</text>' % (x, y, color, _esc(text))
    )


def _esc(text):
    return (
        str(text)
        .replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
    )


def render(scene, format="svg", out="biplot.svg"):
    """Write a scene to disk as SVG or JSON. Returns the path written."""
    if format == "svg":
        text = scene_to_svg(scene)
    elif format == "json":
        text = scene_to_json(scene)
    else:
        raise ValueError("format must be 'svg' or 'json', got %r" % (format,))
    try:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise DataError("cannot write %s output to %r: %s" % (format, out, exc)) from exc
    return out
