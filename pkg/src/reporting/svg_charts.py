"""
Minimal SVG line charts for ECPE curves and robustness sweeps.

Output depends only on the inputs, so charts are as reproducible as the
reports they are drawn from.
"""

from pathlib import Path
from typing import Dict, List, Sequence, Tuple
from xml.sax.saxutils import escape

from ..core.errors import DatasetIOError, InvalidArgumentError

COLOURS = ("#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")
MARGIN = {"top": 40, "right": 150, "bottom": 50, "left": 70}


class SvgBuilder:
    """Accumulates SVG elements on a fixed-size canvas."""

    def __init__(self, width: int = 640, height: int = 400):
        self.width = width
        self.height = height
        self.elements: List[str] = []

    def line(self, x1: float, y1: float, x2: float, y2: float, stroke: str = "#000", width: float = 1.0) -> None:
        self.elements.append(
            f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" stroke="{stroke}" stroke-width="{width:g}"/>'
        )

    def polyline(self, points: Sequence[Tuple[float, float]], stroke: str) -> None:
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
        self.elements.append(f'<polyline points="{coords}" fill="none" stroke="{stroke}" stroke-width="2"/>')

    def circle(self, x: float, y: float, fill: str, r: float = 3.0) -> None:
        self.elements.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r:g}" fill="{fill}"/>')

    def text(self, x: float, y: float, content: str, anchor: str = "start", size: int = 11, rotate: bool = False) -> None:
        transform = f' transform="rotate(-90 {x:.2f} {y:.2f})"' if rotate else ""
        self.elements.append(
            f'<text x="{x:.2f}" y="{y:.2f}" font-family="sans-serif" font-size="{size}" '
            f'text-anchor="{anchor}"{transform}>{escape(content)}</text>'
        )

    def build(self) -> str:
        header = (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}">'
        )
        background = f'<rect width="{self.width}" height="{self.height}" fill="#fff"/>'
        return "\n".join([header, background, *self.elements, "</svg>"]) + "\n"


def _axis_range(values: Sequence[float]) -> Tuple[float, float]:
    lo, hi = min(values), max(values)
    if hi == lo:
        pad = abs(hi) * 0.05 or 1.0
        return lo - pad, hi + pad
    pad = (hi - lo) * 0.05
    return lo - pad, hi + pad


def render_line_chart(
    series: Dict[str, Tuple[Sequence[float], Sequence[float]]],
    title: str,
    x_label: str,
    y_label: str,
    width: int = 640,
    height: int = 400,
    ticks: int = 5,
) -> str:
    """One polyline per named (xs, ys) series, with axes, ticks and a legend."""
    if not series:
        raise InvalidArgumentError("chart needs at least one series")
    for name, (xs, ys) in series.items():
        if len(xs) != len(ys) or not xs:
            raise InvalidArgumentError(f"series '{name}' needs matching nonempty x and y values")

    all_x = [float(x) for xs, _ in series.values() for x in xs]
    all_y = [float(y) for _, ys in series.values() for y in ys]
    x_lo, x_hi = _axis_range(all_x)
    y_lo, y_hi = _axis_range(all_y)

    left, top = MARGIN["left"], MARGIN["top"]
    plot_w = width - MARGIN["left"] - MARGIN["right"]
    plot_h = height - MARGIN["top"] - MARGIN["bottom"]

    def px(x: float) -> float:
        return left + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return top + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h

    svg = SvgBuilder(width, height)
    svg.text(width / 2, top / 2 + 6, title, anchor="middle", size=14)
    svg.line(left, top + plot_h, left + plot_w, top + plot_h)
    svg.line(left, top, left, top + plot_h)

    for i in range(ticks + 1):
        xv = x_lo + (x_hi - x_lo) * i / ticks
        yv = y_lo + (y_hi - y_lo) * i / ticks
        svg.line(px(xv), top + plot_h, px(xv), top + plot_h + 4)
        svg.text(px(xv), top + plot_h + 16, f"{xv:.3g}", anchor="middle", size=10)
        svg.line(left - 4, py(yv), left, py(yv))
        svg.text(left - 6, py(yv) + 3, f"{yv:.4g}", anchor="end", size=10)

    svg.text(left + plot_w / 2, height - 12, x_label, anchor="middle")
    svg.text(16, top + plot_h / 2, y_label, anchor="middle", rotate=True)

    for index, (name, (xs, ys)) in enumerate(series.items()):
        colour = COLOURS[index % len(COLOURS)]
        points = [(px(float(x)), py(float(y))) for x, y in zip(xs, ys)]
        svg.polyline(points, colour)
        for x, y in points:
            svg.circle(x, y, colour)
        legend_y = top + 14 + 18 * index
        svg.line(left + plot_w + 14, legend_y - 4, left + plot_w + 34, legend_y - 4, stroke=colour, width=2)
        svg.text(left + plot_w + 40, legend_y, name)

    return svg.build()


def write_svg(content: str, path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content, encoding="utf-8")
    except OSError as e:
        raise DatasetIOError(path, f"cannot write chart ({e.strerror})") from e
    return path
