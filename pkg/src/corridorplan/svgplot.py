"""Small self-contained SVG writer for run reports.

Two plot kinds cover the reporting needs: overlaid histograms (per-pair
relative error before and after refinement) and corridor overlays showing
each pair's path before and after for 2-D scenarios.  Files are plain
SVG 1.1 built with the stdlib XML tree; no plotting dependency.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np

from .bezier import sample_path
from .geom import GeometryError, Polytope

__all__ = [
    "histogram_svg",
    "paths_overlay_svg",
    "polygon_vertices",
    "render_plots",
    "write_plots",
]

_PALETTE = ["#5b7fbd", "#d97941", "#63a375", "#9467bd"]
_OVERLAY_K = 40  # samples per segment when flattening a path for display


def _root(width, height):
    return ET.Element(
        "svg",
        xmlns="http://www.w3.org/2000/svg",
        width=str(width),
        height=str(height),
        viewBox=f"0 0 {width} {height}",
    )


def _text(parent, x, y, s, size=12, anchor="middle", fill="#333333"):
    el = ET.SubElement(parent, "text", x=f"{x:.1f}", y=f"{y:.1f}",
                       fill=fill)
    el.set("font-size", str(size))
    el.set("font-family", "sans-serif")
    el.set("text-anchor", anchor)
    el.text = s
    return el


def _line(parent, x1, y1, x2, y2, stroke="#333333", width=1.0):
    el = ET.SubElement(parent, "line", x1=f"{x1:.1f}", y1=f"{y1:.1f}",
                       x2=f"{x2:.1f}", y2=f"{y2:.1f}", stroke=stroke)
    el.set("stroke-width", str(width))
    return el


def _serialize(root) -> str:
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(
        root, encoding="unicode") + "\n"


def histogram_svg(series, bins: int = 24, width: int = 640,
                  height: int = 400, title: str = "",
                  x_label: str = "") -> str:
    """Overlaid translucent histograms of one or more named value lists.

    ``series`` is a list of (label, values) pairs sharing one bin range.
    Non-finite values are dropped; an all-empty input still yields a
    valid document that says so.
    """
    series = [(label, np.asarray([v for v in vals if np.isfinite(v)],
                                 dtype=float))
              for label, vals in series]
    ml, mr, mt, mb = 56, 18, 36 if title else 18, 44
    root = _root(width, height)
    ET.SubElement(root, "rect", x="0", y="0", width=str(width),
                  height=str(height), fill="white")
    if title:
        _text(root, width / 2, 20, title, size=14)

    data = [v for _, v in series if v.size]
    if not data:
        _text(root, width / 2, height / 2, "no data", size=14,
              fill="#777777")
        return _serialize(root)

    lo = min(float(v.min()) for v in data)
    hi = max(float(v.max()) for v in data)
    if hi <= lo:
        lo, hi = lo - 0.5, hi + 0.5
    counts = [np.histogram(v, bins=bins, range=(lo, hi))[0] if v.size
              else np.zeros(bins, dtype=int) for _, v in series]
    cmax = max(1, max(int(c.max()) for c in counts))

    px = (width - ml - mr) / bins
    plot_h = height - mt - mb
    for i, ((label, _), cnt) in enumerate(zip(series, counts)):
        color = _PALETTE[i % len(_PALETTE)]
        for j, c in enumerate(cnt):
            if c == 0:
                continue
            h = plot_h * c / cmax
            bar = ET.SubElement(
                root, "rect",
                x=f"{ml + j * px:.2f}", y=f"{mt + plot_h - h:.2f}",
                width=f"{px:.2f}", height=f"{h:.2f}", fill=color)
            bar.set("fill-opacity", "0.55")
        # legend swatch, top right
        lx = width - mr - 110
        ly = mt + 8 + 18 * i
        sw = ET.SubElement(root, "rect", x=f"{lx:.1f}", y=f"{ly - 9:.1f}",
                           width="12", height="12", fill=color)
        sw.set("fill-opacity", "0.55")
        _text(root, lx + 18, ly + 1, label, size=11, anchor="start")

    ax_y = mt + plot_h
    _line(root, ml, ax_y, width - mr, ax_y)
    _line(root, ml, mt, ml, ax_y)
    for frac in (0.0, 0.5, 1.0):
        x = ml + frac * (width - ml - mr)
        _line(root, x, ax_y, x, ax_y + 4)
        _text(root, x, ax_y + 18, format(lo + frac * (hi - lo), ".3g"),
              size=11)
    _text(root, ml - 8, mt + 4, str(cmax), size=11, anchor="end")
    _text(root, ml - 8, ax_y + 4, "0", size=11, anchor="end")
    if x_label:
        _text(root, ml + (width - ml - mr) / 2, height - 8, x_label,
              size=12)
    return _serialize(root)


def polygon_vertices(P: Polytope) -> np.ndarray:
    """Vertices of a bounded 2-D polytope, ordered counter-clockwise.

    Pairwise constraint intersection is plenty at plotting row counts.
    """
    if P.dim != 2:
        raise GeometryError("polygon outline needs a 2-D polytope")
    A = np.asarray(P.A, dtype=float).reshape(-1, 2)
    b = np.asarray(P.b, dtype=float).ravel()
    if P.num_eq:
        E = np.asarray(P.E, dtype=float).reshape(-1, 2)
        f = np.asarray(P.f, dtype=float).ravel()
        A = np.vstack([A, E, -E])
        b = np.concatenate([b, f, -f])
    scale = max(1.0, float(np.abs(b).max()))
    pts = []
    for i in range(len(b)):
        for j in range(i + 1, len(b)):
            M = A[[i, j]]
            if abs(np.linalg.det(M)) < 1e-12:
                continue
            v = np.linalg.solve(M, b[[i, j]])
            if np.max(A @ v - b) <= 1e-7 * scale:
                pts.append(v)
    if len(pts) < 3:
        raise GeometryError("polytope is unbounded or degenerate")
    pts = np.unique(np.round(np.array(pts), 9), axis=0)
    c = pts.mean(axis=0)
    order = np.argsort(np.arctan2(pts[:, 1] - c[1], pts[:, 0] - c[0]))
    return pts[order]


def _poly_points(parent, tag, pts, tf):
    xy = " ".join(f"{x:.2f},{y:.2f}" for x, y in (tf(p) for p in pts))
    return ET.SubElement(parent, tag, points=xy)


def paths_overlay_svg(polygons, pairs, width: int = 640, height: int = 640,
                      title: str = "") -> str:
    """Corridor outlines plus each pair's path before (dashed grey) and
    after refinement (solid blue).

    ``polygons``: list of (m, 2) vertex arrays; ``pairs``: list of
    (before_points, after_points) sample arrays.
    """
    mt = 36 if title else 16
    margin = 24
    root = _root(width, height)
    ET.SubElement(root, "rect", x="0", y="0", width=str(width),
                  height=str(height), fill="white")
    if title:
        _text(root, width / 2, 20, title, size=14)

    clouds = [np.asarray(p, dtype=float) for p in polygons]
    for before, after in pairs:
        clouds.extend([np.asarray(before, float), np.asarray(after, float)])
    clouds = [c for c in clouds if c.size]
    if not clouds:
        _text(root, width / 2, height / 2, "no data", size=14,
              fill="#777777")
        return _serialize(root)
    allp = np.vstack(clouds)
    lo, hi = allp.min(axis=0), allp.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    s = min((width - 2 * margin) / span[0], (height - mt - margin) / span[1])
    cx, cy = (lo + hi) / 2

    def tf(p):
        # uniform scale, centered, y flipped to SVG orientation
        return (width / 2 + s * (p[0] - cx),
                mt + (height - mt - margin) / 2 - s * (p[1] - cy))

    for poly in polygons:
        el = _poly_points(root, "polygon", np.asarray(poly, float), tf)
        el.set("fill", "#eef2f7")
        el.set("stroke", "#93a3b5")
        el.set("stroke-width", "1")
    for before, after in pairs:
        el = _poly_points(root, "polyline", np.asarray(before, float), tf)
        el.set("fill", "none")
        el.set("stroke", "#8a8a8a")
        el.set("stroke-width", "1.2")
        el.set("stroke-dasharray", "5 3")
        el = _poly_points(root, "polyline", np.asarray(after, float), tf)
        el.set("fill", "none")
        el.set("stroke", "#2b6cb0")
        el.set("stroke-width", "1.6")
        x0, y0 = tf(np.asarray(before, float)[0])
        x1, y1 = tf(np.asarray(before, float)[-1])
        ET.SubElement(root, "circle", cx=f"{x0:.1f}", cy=f"{y0:.1f}",
                      r="3", fill="#2e7d32")
        ET.SubElement(root, "circle", cx=f"{x1:.1f}", cy=f"{y1:.1f}",
                      r="3", fill="#222222")
    return _serialize(root)


def _flat(path):
    return np.array([p for _, _, p in sample_path(path, _OVERLAY_K)])


def render_plots(report, scn) -> dict:
    """The report's plots as {filename: svg text}.

    Histogram of geodesic relative error when the scenario produces one,
    histogram of relative length reduction always, and a corridor overlay
    for 2-D scenarios.
    """
    ok = [r for r in report.rows if r.status == "ok"]
    out = {}

    if any(r.slerp_error_before is not None for r in ok):
        out["relative_error_hist.svg"] = histogram_svg(
            [("before", [r.slerp_error_before for r in ok
                         if r.slerp_error_before is not None]),
             ("after", [r.slerp_error_after for r in ok
                        if r.slerp_error_after is not None])],
            title=f"{report.scenario_name}: relative error vs geodesic",
            x_label="relative error")

    reductions = [(r.length_before - r.length_after) / r.length_before
                  for r in ok if r.length_before > 0]
    out["length_reduction_hist.svg"] = histogram_svg(
        [("length reduction", reductions)],
        title=f"{report.scenario_name}: relative length reduction",
        x_label="(before - after) / before")

    if scn.dim_q == 2:
        polys = [polygon_vertices(P) for P in scn.build_sets()]
        pairs = [(_flat(r.paths[0]), _flat(r.paths[1]))
                 for r in ok if r.paths]
        out["paths_overlay.svg"] = paths_overlay_svg(
            polys, pairs, title=f"{report.scenario_name}: paths")
    return out


def write_plots(report, scn, outdir) -> list:
    """Emit the report's plots into ``outdir``; returns written paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in render_plots(report, scn).items():
        p = outdir / name
        p.write_text(text)
        written.append(p)
    return written
