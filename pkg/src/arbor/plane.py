"""Points and axis-parallel segments in the positive quadrant, with exact coordinates."""
from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

from .grid import InstanceError

H = "h"
V = "v"


def to_fraction(x) -> Fraction:
    """Exact value of an int, a decimal string or a float (via its decimal repr)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        x = repr(x)
    try:
        return Fraction(x)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise InstanceError(f"bad coordinate {x!r}") from exc


def fmt(x: Fraction) -> str:
    """Decimal string for a rational; exact when the denominator allows, else 17 digits."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    d = x.denominator
    while d % 2 == 0:
        d //= 2
    while d % 5 == 0:
        d //= 5
    if d == 1:
        # terminating expansion: scale to an integer and place the point
        k = 0
        while (x * 10 ** k).denominator != 1:
            k += 1
        s = str(abs((x * 10 ** k).numerator)).rjust(k + 1, "0")
        out = s[:-k] + "." + s[-k:]
        return "-" + out if x < 0 else out
    return repr(float(x))


class Point(NamedTuple):
    x: Fraction
    y: Fraction


def make_point(x, y) -> Point:
    p = Point(to_fraction(x), to_fraction(y))
    if p.x < 0 or p.y < 0:
        raise InstanceError(f"point ({fmt(p.x)}, {fmt(p.y)}) outside the positive quadrant")
    return p


def parse_points(data: dict) -> list[Point]:
    try:
        raw = data["points"]
    except (KeyError, TypeError) as exc:
        raise InstanceError("RSA instance needs a 'points' list") from exc
    pts = [make_point(x, y) for x, y in raw]
    for i in range(1, len(pts)):
        if pts[i].y < pts[i - 1].y:
            raise InstanceError(f"point {i}: y decreases")
    return pts


def points_json(points) -> dict:
    return {"points": [[fmt(x), fmt(y)] for x, y in points]}


class Segment(NamedTuple):
    """Axis-parallel segment from ``(x, y)`` rightward (``h``) or upward (``v``)."""

    o: str
    x: Fraction
    y: Fraction
    length: Fraction

    @property
    def end(self) -> Point:
        if self.o == H:
            return Point(self.x + self.length, self.y)
        return Point(self.x, self.y + self.length)

    def to_json(self) -> dict:
        return {"o": self.o, "x": fmt(self.x), "y": fmt(self.y), "len": fmt(self.length)}

    @classmethod
    def from_json(cls, d: dict) -> "Segment":
        if d.get("o") not in (H, V):
            raise InstanceError(f"bad segment orientation {d.get('o')!r}")
        return cls(d["o"], to_fraction(d["x"]), to_fraction(d["y"]), to_fraction(d["len"]))


def hseg(x0, x1, y) -> Segment | None:
    return Segment(H, Fraction(x0), Fraction(y), Fraction(x1) - Fraction(x0)) if x1 > x0 else None


def vseg(x, y0, y1) -> Segment | None:
    return Segment(V, Fraction(x), Fraction(y0), Fraction(y1) - Fraction(y0)) if y1 > y0 else None


def total_length(segments) -> Fraction:
    return sum((s.length for s in segments), Fraction(0))
