"""Minimal deterministic SVG scatter/line plots for campaign reports.

Hand-rolled rather than delegating to a plotting library so the output is
byte-stable across runs and trivially checkable (one marker element per data
record).
"""

from __future__ import annotations

import numpy as np


def _fmt(x: float) -> str:
    return f"{x:.2f}"


class SvgFigure:
    """Fixed-size figure with one linear x/y axes box."""

    def __init__(self, width=640, height=440, margin_left=70, margin_right=20,
                 margin_top=30, margin_bottom=55):
        self.width = width
        self.height = height
        self.ml, self.mr = margin_left, margin_right
        self.mt, self.mb = margin_top, margin_bottom
        self.elements: list[str] = []
        self.xlim = (0.0, 1.0)
        self.ylim = (0.0, 1.0)

    def set_limits(self, xlim, ylim):
        if xlim[0] == xlim[1]:
            xlim = (xlim[0] - 0.5, xlim[1] + 0.5)
        if ylim[0] == ylim[1]:
            ylim = (ylim[0] - 0.5, ylim[1] + 0.5)
        self.xlim = xlim
        self.ylim = ylim

    def _sx(self, x):
        x0, x1 = self.xlim
        return self.ml + (x - x0) / (x1 - x0) * (self.width - self.ml - self.mr)

    def _sy(self, y):
        y0, y1 = self.ylim
        return self.height - self.mb - (y - y0) / (y1 - y0) * (
            self.height - self.mt - self.mb)

    def axes(self, xlabel: str, ylabel: str, title: str = "", n_ticks: int = 5):
        x0, y0 = self.ml, self.height - self.mb
        x1, y1 = self.width - self.mr, self.mt
        self.elements.append(
            f'<rect x="{_fmt(x0)}" y="{_fmt(y1)}" width="{_fmt(x1 - x0)}" '
            f'height="{_fmt(y0 - y1)}" fill="none" stroke="black"/>')
        for t in np.linspace(self.xlim[0], self.xlim[1], n_ticks):
            px = self._sx(t)
            self.elements.append(
                f'<line x1="{_fmt(px)}" y1="{_fmt(y0)}" x2="{_fmt(px)}" '
                f'y2="{_fmt(y0 + 5)}" stroke="black"/>')
            self.elements.append(
                f'<text x="{_fmt(px)}" y="{_fmt(y0 + 20)}" font-size="11" '
                f'text-anchor="middle">{t:.4g}</text>')
        for t in np.linspace(self.ylim[0], self.ylim[1], n_ticks):
            py = self._sy(t)
            self.elements.append(
                f'<line x1="{_fmt(x0 - 5)}" y1="{_fmt(py)}" x2="{_fmt(x0)}" '
                f'y2="{_fmt(py)}" stroke="black"/>')
            self.elements.append(
                f'<text x="{_fmt(x0 - 8)}" y="{_fmt(py + 4)}" font-size="11" '
                f'text-anchor="end">{t:.4g}</text>')
        self.elements.append(
            f'<text x="{_fmt((x0 + x1) / 2)}" y="{_fmt(self.height - 12)}" '
            f'font-size="13" text-anchor="middle">{xlabel}</text>')
        self.elements.append(
            f'<text x="16" y="{_fmt((y0 + y1) / 2)}" font-size="13" '
            f'text-anchor="middle" transform="rotate(-90 16 '
            f'{_fmt((y0 + y1) / 2)})">{ylabel}</text>')
        if title:
            self.elements.append(
                f'<text x="{_fmt((x0 + x1) / 2)}" y="{_fmt(self.mt - 10)}" '
                f'font-size="14" text-anchor="middle">{title}</text>')

    def polyline(self, xs, ys, color="crimson", width=1.5, dashed=False):
        pts = " ".join(f"{_fmt(self._sx(x))},{_fmt(self._sy(y))}"
                       for x, y in zip(xs, ys))
        dash = ' stroke-dasharray="6,4"' if dashed else ""
        self.elements.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="{width}"{dash}/>')

    def marker(self, x, y, kind="circle", color="steelblue", size=4.5,
               css_class="marker"):
        px, py = self._sx(x), self._sy(y)
        if kind == "circle":
            self.elements.append(
                f'<circle class="{css_class}" cx="{_fmt(px)}" cy="{_fmt(py)}" '
                f'r="{_fmt(size)}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        else:  # filled square
            s = size
            self.elements.append(
                f'<rect class="{css_class}" x="{_fmt(px - s)}" y="{_fmt(py - s)}" '
                f'width="{_fmt(2 * s)}" height="{_fmt(2 * s)}" fill="{color}"/>')

    def vline(self, x, color="black", dashed=True):
        px = self._sx(x)
        dash = ' stroke-dasharray="4,4"' if dashed else ""
        self.elements.append(
            f'<line x1="{_fmt(px)}" y1="{_fmt(self._sy(self.ylim[0]))}" '
            f'x2="{_fmt(px)}" y2="{_fmt(self._sy(self.ylim[1]))}" '
            f'stroke="{color}"{dash}/>')

    def hline(self, y, color="green", dashed=True):
        py = self._sy(y)
        dash = ' stroke-dasharray="4,4"' if dashed else ""
        self.elements.append(
            f'<line x1="{_fmt(self._sx(self.xlim[0]))}" y1="{_fmt(py)}" '
            f'x2="{_fmt(self._sx(self.xlim[1]))}" y2="{_fmt(py)}" '
            f'stroke="{color}"{dash}/>')

    def band(self, x_lo, x_hi, color="lightsalmon", opacity=0.45):
        px0, px1 = self._sx(x_lo), self._sx(x_hi)
        py0, py1 = self._sy(self.ylim[1]), self._sy(self.ylim[0])
        self.elements.append(
            f'<rect x="{_fmt(min(px0, px1))}" y="{_fmt(py0)}" '
            f'width="{_fmt(abs(px1 - px0))}" height="{_fmt(py1 - py0)}" '
            f'fill="{color}" fill-opacity="{opacity}"/>')

    def to_string(self) -> str:
        body = "\n".join(self.elements)
        return (f'<?xml version="1.0" encoding="UTF-8"?>\n'
                f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
                f'height="{self.height}" viewBox="0 0 {self.width} '
                f'{self.height}">\n<rect width="100%" height="100%" '
                f'fill="white"/>\n{body}\n</svg>\n')

    def write(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_string())
