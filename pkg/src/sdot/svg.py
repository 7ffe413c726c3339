"""Deterministic SVG rendering of clipped power diagrams.

Output contains the domain outline, one filled path per nonempty cell,
site markers, and an arrow from each cell centroid to its site.  Colors
cycle a golden-angle hue wheel so neighboring site indices stay distinct.
"""

import colorsys


def _color(i):
    hue = (i * 0.61803398875) % 1.0
    r, g, b = colorsys.hls_to_rgb(hue, 0.72, 0.55)
    return f"#{int(r * 255):02x}{int(g * 255):02x}{int(b * 255):02x}"


def _fmt(x):
    return f"{x:.4f}"


def diagram_svg(domain, cells, points, px=640, arrows=True):
    """SVG document (string) for a clipped diagram."""
    xmin, ymin, xmax, ymax = domain.boundary.bounds()
    span = max(xmax - xmin, ymax - ymin)
    pad = 0.03 * span
    xmin, ymin = xmin - pad, ymin - pad
    width = (xmax + pad) - xmin
    height = (ymax + pad) - ymin
    scale = px / width
    py = height * scale

    def sx(x):
        return (x - xmin) * scale

    def sy(y):
        # flip so +y is up in the rendered figure
        return py - (y - ymin) * scale

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{px}" '
        f'height="{py:.0f}" viewBox="0 0 {px} {py:.0f}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    for i, cell in enumerate(cells):
        if cell.is_empty:
            continue
        coords = " L ".join(f"{_fmt(sx(x))} {_fmt(sy(y))}"
                            for x, y in cell.vertices)
        parts.append(f'<path class="cell" d="M {coords} Z" fill="{_color(i)}" '
                     f'stroke="#333333" stroke-width="1"/>')
    ring = " L ".join(f"{_fmt(sx(x))} {_fmt(sy(y))}"
                      for x, y in domain.boundary.vertices)
    parts.append(f'<path class="domain" d="M {ring} Z" fill="none" '
                 f'stroke="black" stroke-width="2"/>')
    if arrows:
        for i, cell in enumerate(cells):
            if cell.is_empty:
                continue
            c = cell.centroid()
            p = points[i]
            parts.append(
                f'<line class="arrow" x1="{_fmt(sx(c[0]))}" '
                f'y1="{_fmt(sy(c[1]))}" x2="{_fmt(sx(p[0]))}" '
                f'y2="{_fmt(sy(p[1]))}" stroke="#222222" '
                f'stroke-width="1"/>')
    for i, p in enumerate(points):
        parts.append(f'<circle class="site" cx="{_fmt(sx(p[0]))}" '
                     f'cy="{_fmt(sy(p[1]))}" r="3" fill="black"/>')
    parts.append("</svg>")
    return "\n".join(parts)


def write_svg(path, svg_text):
    with open(path, "w") as fh:
        fh.write(svg_text)
