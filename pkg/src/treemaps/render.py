"""SVG output for layouts.

Layout coordinates have the origin at the lower left; SVG's y axis points
down, so y is flipped inside the container. Colors come from a hash of the
cell name and a palette seed, so figures are reproducible byte for byte.
"""

from __future__ import annotations

import colorsys
import hashlib
from xml.sax.saxutils import escape, quoteattr

from .geometry import Layout, Rect, bounding_box


def _num(v: float) -> str:
    s = f"{v:.10g}"
    return "0" if s == "-0" else s


def cell_color(name: str, seed: int = 0) -> str:
    """Stable pastel color for a cell name."""
    h = hashlib.sha256(f"{seed}:{name}".encode("utf-8")).digest()
    hue = int.from_bytes(h[:2], "big") / 65536
    sat = 0.35 + 0.3 * h[2] / 255
    light = 0.62 + 0.18 * h[3] / 255
    r, g, b = colorsys.hls_to_rgb(hue, light, sat)
    return "#{:02x}{:02x}{:02x}".format(round(r * 255), round(g * 255), round(b * 255))


def render_svg(layout: Layout, show_labels: bool = False, show_bundles: bool = True,
               palette_seed: int = 0) -> str:
    c = layout.container
    top = 2 * c.y + c.h
    stroke = 0.002 * max(c.w, c.h)

    def box(r: Rect) -> str:
        return (f'x="{_num(r.x)}" y="{_num(top - r.y - r.h)}" '
                f'width="{_num(r.w)}" height="{_num(r.h)}"')

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{_num(c.x)} {_num(c.y)} {_num(c.w)} {_num(c.h)}">',
        '<g id="cells">',
    ]
    for i in layout.ids():
        r = layout.cells[i]
        name = layout.names.get(i, str(i))
        out.append(f'<rect data-id="{i}" {box(r)} fill="{cell_color(name, palette_seed)}" '
                   f'stroke="#333333" stroke-width="{_num(stroke)}"><title>{escape(name)}</title></rect>')
    out.append("</g>")
    if show_bundles and layout.bundles:
        # outlines as paths so the rect count stays one per cell
        out.append('<g id="bundles" fill="none" stroke="#000000">')
        for ids in layout.bundles:
            b = bounding_box(layout.cells[i] for i in ids)
            x0, y0 = b.x, top - b.y - b.h
            d = f"M{_num(x0)} {_num(y0)}h{_num(b.w)}v{_num(b.h)}h{_num(-b.w)}Z"
            out.append(f'<path d="{d}" stroke-width="{_num(3 * stroke)}"/>')
        out.append("</g>")
    if show_labels:
        out.append('<g id="labels" text-anchor="middle" dominant-baseline="central" fill="#111111">')
        for i in layout.ids():
            r = layout.cells[i]
            size = 0.25 * min(r.w, r.h)
            out.append(f'<text x="{_num(r.x + r.w / 2)}" y="{_num(top - r.y - r.h / 2)}" '
                       f'font-size={quoteattr(_num(size))}>{escape(layout.names.get(i, str(i)))}</text>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
