"""Six-axis performance hexagons as standalone SVG.

Axes run clockwise from the top in REC, PREC, SPEC, ACC, MCC, F1 order. A
value ``v`` sits at normalised radius ``(v - min_axis) / (1 - min_axis)``,
clamped to [0, 1]. Vertices are emitted as ``<circle class="vertex">``
elements carrying ``data-axis`` and ``data-radius`` so the geometry can be
checked without rasterising.
"""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from typing import Sequence

from fusionbench.errors import ValidationError
from fusionbench.io._text import write_text
from fusionbench.metrics import METRIC_LABELS, MetricHexagon

CENTER = (220.0, 220.0)
RADIUS = 160.0
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f")


def vertex_radius(value: float, min_axis: float) -> float:
    return min(1.0, max(0.0, (value - min_axis) / (1.0 - min_axis)))


def axis_angle(i: int) -> float:
    return math.radians(-90.0 + 60.0 * i)


def vertex_xy(i: int, r: float) -> tuple[float, float]:
    a = axis_angle(i)
    return CENTER[0] + RADIUS * r * math.cos(a), CENTER[1] + RADIUS * r * math.sin(a)


def _c(v: float) -> str:
    return f"{v:.9f}"


def hexagon_svg(series, min_axis: float = 0.0) -> str:
    """SVG text for one hexagon or a list of ``(label, hexagon)`` overlays."""
    if not (0.0 <= min_axis < 1.0) or math.isnan(min_axis):
        raise ValidationError(f"min_axis must lie in [0, 1), got {min_axis}")
    if isinstance(series, MetricHexagon):
        series = [("", series)]
    series = list(series)
    width = 440 + (180 if any(label for label, _ in series) else 0)
    svg = ET.Element("svg", {
        "xmlns": "http://www.w3.org/2000/svg",
        "width": str(width),
        "height": "440",
        "viewBox": f"0 0 {width} 440",
        "data-min-axis": repr(float(min_axis)),
        "data-center": f"{_c(CENTER[0])},{_c(CENTER[1])}",
        "data-radius": _c(RADIUS),
    })
    grid = ET.SubElement(svg, "g", {"class": "grid", "fill": "none", "stroke": "#bbbbbb"})
    for frac in (0.25, 0.5, 0.75, 1.0):
        pts = " ".join(f"{_c(x)},{_c(y)}" for x, y in (vertex_xy(i, frac) for i in range(6)))
        ET.SubElement(grid, "polygon", {"points": pts})
        tx, ty = vertex_xy(0, frac)
        tick = ET.SubElement(svg, "text", {"x": _c(tx + 4), "y": _c(ty + 4), "font-size": "10", "fill": "#777777"})
        tick.text = f"{min_axis + frac * (1 - min_axis):.2f}"
    for i, label in enumerate(METRIC_LABELS):
        x, y = vertex_xy(i, 1.0)
        ET.SubElement(grid, "line", {"x1": _c(CENTER[0]), "y1": _c(CENTER[1]), "x2": _c(x), "y2": _c(y)})
        lx, ly = vertex_xy(i, 1.12)
        t = ET.SubElement(svg, "text", {
            "x": _c(lx), "y": _c(ly + 4), "text-anchor": "middle", "font-size": "13", "class": "axis-label",
        })
        t.text = label
    for n, (label, hexa) in enumerate(series):
        color = PALETTE[n % len(PALETTE)]
        radii = [vertex_radius(v, min_axis) for v in hexa.values()]
        pts = [vertex_xy(i, r) for i, r in enumerate(radii)]
        g = ET.SubElement(svg, "g", {"class": "series", "data-label": label})
        ET.SubElement(g, "polygon", {
            "class": "hexagon",
            "points": " ".join(f"{_c(x)},{_c(y)}" for x, y in pts),
            "fill": color, "fill-opacity": "0.15", "stroke": color, "stroke-width": "2",
        })
        for i, ((x, y), r, v) in enumerate(zip(pts, radii, hexa.values())):
            ET.SubElement(g, "circle", {
                "class": "vertex", "cx": _c(x), "cy": _c(y), "r": "3", "fill": color,
                "data-axis": METRIC_LABELS[i], "data-value": repr(float(v)), "data-radius": _c(r),
            })
        if label:
            ly = 40 + 22 * n
            ET.SubElement(svg, "rect", {"x": "450", "y": str(ly - 10), "width": "12", "height": "12", "fill": color})
            t = ET.SubElement(svg, "text", {"x": "468", "y": str(ly), "font-size": "12", "class": "legend"})
            t.text = label
    ET.indent(svg)
    return ET.tostring(svg, encoding="unicode", xml_declaration=False) + "\n"


def render_hexagon(series, min_axis: float, path) -> None:
    """Write the hexagon(s) to ``path`` as SVG."""
    write_text(path, '<?xml version="1.0" encoding="UTF-8"?>\n' + hexagon_svg(series, min_axis))
