"""A tiny deterministic SVG writer.

No drawing library: figures are assembled as text so the output depends only
on the input data. Every plotted data point is emitted as a <circle> carrying
`data-x`/`data-y` attributes with the source values, so a figure can be
round-tripped back to the numbers it plots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


def _px(v: float) -> str:
    return f"{v:.2f}"


def _val(v: float) -> str:
    return f"{v:.17g}"


@dataclass
class Axes:
    """Maps a data rectangle onto a pixel rectangle, optionally log-scaled."""

    x0: float
    y0: float
    width: float
    height: float
    xlim: tuple[float, float]
    ylim: tuple[float, float]
    xlog: bool = False
    ylog: bool = False

    def _t(self, v, lim, log):
        a, b = lim
        if log:
            v, a, b = math.log10(v), math.log10(a), math.log10(b)
        if b == a:
            return 0.5
        return (v - a) / (b - a)

    def px(self, x: float) -> float:
        return self.x0 + self._t(x, self.xlim, self.xlog) * self.width

    def py(self, y: float) -> float:
        # SVG y grows downward
        return self.y0 + (1.0 - self._t(y, self.ylim, self.ylog)) * self.height


@dataclass
class Figure:
    width: int = 640
    height: int = 440
    elements: list[str] = field(default_factory=list)

    def frame(self, ax: Axes, x_label: str = "", y_label: str = ""):
        self.elements.append(
            f'<rect x="{_px(ax.x0)}" y="{_px(ax.y0)}" width="{_px(ax.width)}" '
            f'height="{_px(ax.height)}" fill="none" stroke="black"/>'
        )
        if x_label:
            self.text(ax.x0 + ax.width / 2, ax.y0 + ax.height + 28, x_label,
                      anchor="middle")
        if y_label:
            x = ax.x0 - 34
            y = ax.y0 + ax.height / 2
            self.elements.append(
                f'<text x="{_px(x)}" y="{_px(y)}" text-anchor="middle" '
                f'font-size="12" transform="rotate(-90 {_px(x)} {_px(y)})">'
                f"{y_label}</text>"
            )
        for lim, fx in ((ax.xlim, True), (ax.ylim, False)):
            for v in lim:
                if fx:
                    self.text(ax.px(v), ax.y0 + ax.height + 14, f"{v:.4g}",
                              anchor="middle", size=10)
                else:
                    self.text(ax.x0 - 4, ax.py(v) + 3, f"{v:.4g}",
                              anchor="end", size=10)

    def polyline(self, ax: Axes, xs, ys, stroke="black", dash="", attrs=""):
        pts = " ".join(f"{_px(ax.px(x))},{_px(ax.py(y))}"
                       for x, y in zip(xs, ys))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        if attrs:
            extra += f" {attrs}"
        self.elements.append(
            f'<polyline points="{pts}" fill="none" stroke="{stroke}"{extra}/>'
        )

    def points(self, ax: Axes, xs, ys, series: str, fill="black", r=2.5):
        for x, y in zip(xs, ys):
            self.elements.append(
                f'<circle cx="{_px(ax.px(x))}" cy="{_px(ax.py(y))}" r="{r}" '
                f'fill="{fill}" data-series="{series}" '
                f'data-x="{_val(x)}" data-y="{_val(y)}"/>'
            )

    def error_bars(self, ax: Axes, xs, lows, highs, stroke="grey"):
        for x, lo, hi in zip(xs, lows, highs):
            px = _px(ax.px(x))
            self.elements.append(
                f'<line x1="{px}" y1="{_px(ax.py(lo))}" x2="{px}" '
                f'y2="{_px(ax.py(hi))}" stroke="{stroke}"/>'
            )

    def hline(self, ax: Axes, y: float, stroke="red", dash="6,3"):
        self.elements.append(
            f'<line x1="{_px(ax.x0)}" y1="{_px(ax.py(y))}" '
            f'x2="{_px(ax.x0 + ax.width)}" y2="{_px(ax.py(y))}" '
            f'stroke="{stroke}" stroke-dasharray="{dash}"/>'
        )

    def text(self, x, y, s, anchor="start", size=12):
        self.elements.append(
            f'<text x="{_px(x)}" y="{_px(y)}" text-anchor="{anchor}" '
            f'font-size="{size}">{s}</text>'
        )

    def to_svg(self) -> str:
        body = "\n".join(f"  {e}" for e in self.elements)
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
            f'height="{self.height}" viewBox="0 0 {self.width} '
            f'{self.height}">\n{body}\n</svg>\n'
        )


def padded(lo: float, hi: float, frac: float = 0.05, log: bool = False):
    """Slightly widened data limits so boundary points stay visible."""
    if log:
        llo, lhi = math.log10(lo), math.log10(hi)
        pad = max((lhi - llo) * frac, 1e-9)
        return 10 ** (llo - pad), 10 ** (lhi + pad)
    pad = max((hi - lo) * frac, 1e-12 + abs(hi) * 1e-9)
    return lo - pad, hi + pad
