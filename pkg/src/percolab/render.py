"""SVG figures: one shape element per drawn object."""
from __future__ import annotations

import colorsys
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np

SVG_NS = "http://www.w3.org/2000/svg"
SHAPES = ("circle", "rect", "polygon")
ET.register_namespace("", SVG_NS)


def _document(xmin: float, ymin: float, width: float, height: float, size: int = 800) -> tuple[ET.Element, ET.Element]:
    width = width if width > 0 else 1.0
    height = height if height > 0 else 1.0
    scale = size / max(width, height)
    root = ET.Element(
        f"{{{SVG_NS}}}svg",
        {
            "width": f"{width * scale:.1f}",
            "height": f"{height * scale:.1f}",
            # y is flipped so the figure reads with the usual orientation
            "viewBox": f"{xmin:.9g} {-(ymin + height):.9g} {width:.9g} {height:.9g}",
        },
    )
    group = ET.SubElement(root, f"{{{SVG_NS}}}g", {"transform": "scale(1,-1)"})
    return root, group


def _serialize(root: ET.Element) -> str:
    ET.indent(root)
    return ET.tostring(root, encoding="unicode", xml_declaration=True) + "\n"


def _stroke(width: float) -> dict[str, str]:
    return {"stroke": "black", "stroke-width": f"{width:.6g}"}


def count_shapes(svg: str) -> int:
    """Number of shape elements (circle, rect, polygon) in an SVG document."""
    root = ET.fromstring(svg)
    return sum(1 for el in root.iter() if el.tag.rsplit("}", 1)[-1] in SHAPES)


def palette(k: int) -> list[str]:
    """``k`` distinct fills spread around the hue circle."""
    out = []
    for i in range(k):
        # golden-ratio hue steps keep neighbouring ids apart
        h = (i * 0.6180339887498949) % 1.0
        s = 0.55 + 0.35 * ((i // 7) % 2)
        v = 0.75 + 0.2 * ((i // 3) % 2)
        r, g, b = colorsys.hsv_to_rgb(h, s, v)
        out.append(f"#{int(r * 255):02x}{int(g * 255):02x}{int(b * 255):02x}")
    # guard against rounding collisions
    seen: dict[str, int] = {}
    for i, c in enumerate(out):
        while c in seen:
            c = f"#{(int(c[1:], 16) + 1) % 0x1000000:06x}"
        seen[c] = i
        out[i] = c
    return out


def render_packing(packing, fill: str = "none") -> str:
    """One ``circle`` per vertex of the packing."""
    c = np.asarray(packing.centers, dtype=float).reshape(-1, 2)
    r = np.asarray(packing.radii, dtype=float)
    if len(r):
        lo = (c - r[:, None]).min(axis=0)
        hi = (c + r[:, None]).max(axis=0)
    else:
        lo, hi = np.zeros(2), np.ones(2)
    pad = 0.02 * float(max(hi - lo))
    root, g = _document(lo[0] - pad, lo[1] - pad, hi[0] - lo[0] + 2 * pad, hi[1] - lo[1] + 2 * pad)
    sw = 0.002 * float(max(hi - lo) + 1e-300)
    for v, ((x, y), rad) in enumerate(zip(c, r)):
        ET.SubElement(
            g,
            f"{{{SVG_NS}}}circle",
            {"cx": f"{x:.9g}", "cy": f"{y:.9g}", "r": f"{rad:.9g}", "fill": fill, "data-vertex": str(v), **_stroke(sw)},
        )
    return _serialize(root)


def render_tiling(tiling, colors=None) -> str:
    """One ``rect`` per tile; periodic tilings are drawn unrolled over one period."""
    tiles = np.asarray(tiling.tiles, dtype=float).reshape(-1, 3)
    w, h = float(tiling.width), float(tiling.height)
    top = max(h, float((tiles[:, 1] + tiles[:, 2]).max())) if len(tiles) else h
    pad = 0.02 * max(w, top, 1e-12)
    root, g = _document(-pad, -pad, w + 2 * pad, top + 2 * pad)
    sw = 0.002 * max(w, top, 1e-12)
    for k, (x, y, s) in enumerate(tiles):
        fill = "#dddddd" if colors is None else ("black" if colors[k] else "white")
        ET.SubElement(
            g,
            f"{{{SVG_NS}}}rect",
            {"x": f"{x:.9g}", "y": f"{y:.9g}", "width": f"{s:.9g}", "height": f"{s:.9g}", "fill": fill, "data-tile": str(k), **_stroke(sw)},
        )
    return _serialize(root)


def render_tessellation(tess, colors=None, dot: float | None = None) -> str:
    """One ``circle`` per Voronoi site, black or white by colour, on the unit disc frame."""
    P = np.asarray(tess.sites, dtype=float).reshape(-1, 2)
    root, g = _document(-1.02, -1.02, 2.04, 2.04)
    n = len(P)
    dot = dot if dot is not None else 0.6 / max(np.sqrt(n), 1.0) * 0.05
    for k, (x, y) in enumerate(P):
        fill = "#999999" if colors is None else ("black" if colors[k] else "white")
        arc = int(tess.incidence[k])
        attrs = {"cx": f"{x:.9g}", "cy": f"{y:.9g}", "r": f"{dot:.6g}", "fill": fill, "data-site": str(k)}
        if arc >= 0:
            attrs["data-arc"] = "ABCD"[arc]
        ET.SubElement(g, f"{{{SVG_NS}}}circle", {**attrs, **_stroke(dot / 4)})
    return _serialize(root)


def render_clusters(positions, labels) -> str:
    """One ``circle`` per vertex; open vertices filled by cluster id, closed ones white."""
    P = np.asarray(positions, dtype=float).reshape(-1, 2)
    labels = np.asarray(labels)
    if len(P):
        lo, hi = P.min(axis=0), P.max(axis=0)
    else:
        lo, hi = np.zeros(2), np.ones(2)
    span = float(max(hi - lo)) or 1.0
    # half the closest-pair spacing keeps dots apart on lattices
    if len(P) > 1:
        from scipy.spatial import cKDTree

        d, _ = cKDTree(P).query(P, k=2)
        rad = 0.45 * float(d[:, 1].min())
    else:
        rad = 0.05 * span
    root, g = _document(lo[0] - 2 * rad, lo[1] - 2 * rad, hi[0] - lo[0] + 4 * rad, hi[1] - lo[1] + 4 * rad)
    n_clusters = int(labels.max()) + 1 if len(labels) and labels.max() >= 0 else 0
    fills = palette(n_clusters)
    for v, (x, y) in enumerate(P):
        lab = int(labels[v])
        fill = fills[lab] if lab >= 0 else "white"
        ET.SubElement(
            g,
            f"{{{SVG_NS}}}circle",
            {"cx": f"{x:.9g}", "cy": f"{y:.9g}", "r": f"{rad:.6g}", "fill": fill, "data-cluster": str(lab), **_stroke(rad / 5)},
        )
    return _serialize(root)


def save(svg: str, path: str | Path) -> None:
    Path(path).write_text(svg)
