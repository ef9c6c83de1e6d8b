"""Deterministic SVG drawings of grid and segment solutions (time points up)."""
from __future__ import annotations

import math
from fractions import Fraction

from .grid import ARC, GridSolution
from .plane import H, fmt

PX = 20
MARGIN = 20


class _Canvas:
    def __init__(self, width, height):
        self.w = width
        self.h = height
        # drawing area in units
        self.W = int(PX * width) + 2 * MARGIN
        self.Hpx = int(PX * height) + 2 * MARGIN
        self.items = []

    def x(self, u):
        return fmt(Fraction(MARGIN) + PX * Fraction(u))

    def y(self, t):
        return fmt(Fraction(self.Hpx - MARGIN) - PX * Fraction(t))

    def line(self, x0, y0, x1, y1, cls):
        self.items.append(
            f'<line class="{cls}" x1="{self.x(x0)}" y1="{self.y(y0)}" '
            f'x2="{self.x(x1)}" y2="{self.y(y1)}"/>')

    def dot(self, u, t, cls):
        self.items.append(f'<circle class="{cls}" cx="{self.x(u)}" cy="{self.y(t)}" r="4"/>')

    def svg(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.W}" height="{self.Hpx}" '
                f'viewBox="0 0 {self.W} {self.Hpx}">')
        style = ("<style>.axis{stroke:#888;stroke-width:1}.h{stroke:#1f77b4;stroke-width:3}"
                 ".a{stroke:#d62728;stroke-width:3}.req{fill:#000}</style>")
        axes = [
            f'<line class="axis" x1="{self.x(0)}" y1="{self.y(0)}" x2="{self.x(self.w)}" y2="{self.y(0)}"/>',
            f'<line class="axis" x1="{self.x(0)}" y1="{self.y(0)}" x2="{self.x(0)}" y2="{self.y(self.h)}"/>',
        ]
        return "\n".join([head, style] + axes + self.items + ["</svg>"]) + "\n"


def render_grid(sol: GridSolution, requests=()) -> str:
    t_top = max([e.head.time for e in sol.edges] + [t for _, t in requests] + [1])
    c = _Canvas(max(sol.n - 1, 1), t_top)
    for e in sol.sorted_edges():
        h = e.head
        c.line(e.node, e.time, h.node, h.time, "a" if e.kind == ARC else "h")
    for v, t in requests:
        c.dot(v, t, "req")
    return c.svg()


def render_segments(segments, points=()) -> str:
    ends = [Fraction(1)]
    tops = [Fraction(1)]
    for s in segments:
        e = s.end
        ends.append(e.x)
        tops.append(e.y)
    for p in points:
        ends.append(Fraction(p[0]))
        tops.append(Fraction(p[1]))
    c = _Canvas(math.ceil(max(ends)), math.ceil(max(tops)))
    for s in sorted(segments):
        e = s.end
        c.line(s.x, s.y, e.x, e.y, "h" if s.o == H else "a")
    for p in points:
        c.dot(p[0], p[1], "req")
    return c.svg()
