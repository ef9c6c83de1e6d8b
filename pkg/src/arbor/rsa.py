"""Online rectilinear Steiner arborescence by simulation of the discrete algorithm.

Three layers:

* ``OnRsaN`` handles points whose coordinates already fit a grid of ``n``
  nodes: each point is snapped to the grid vertex at the top-left corner
  of its unit square, the embedded ``Dlineon`` is advanced to that time
  (vertical phase) and asked for a delivery source (horizontal phase).
* ``scale``/``unscale`` map a sub-instance with bound ``M`` and origin
  height ``y0`` onto that grid.
* ``run_onrsa`` guesses ``M`` and the point count, opening a new
  sub-instance whenever either guess is exceeded.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

from .checks import Report
from .grid import InstanceError, Replica
from .online import Dlineon
from .plane import H, V, Point, Segment, fmt, hseg, make_point, vseg

N_FIRST = 4


def snap_point(p) -> Replica:
    """Grid vertex at the top-left corner of the unit square holding ``p``."""
    return Replica(math.floor(p[0]), math.ceil(p[1]))


def scale(p, M, n, y0=0) -> Point:
    M, y0 = Fraction(M), Fraction(y0)
    if M <= 0 or n <= 0:
        raise ValueError("M and n must be positive")
    x, y = Fraction(p[0]), Fraction(p[1])
    if y < y0:
        raise InstanceError(f"y={fmt(y)} below the sub-instance origin {fmt(y0)}")
    return Point(x * n / M, (y - y0) * n / M)


def unscale(p, M, n, y0=0) -> Point:
    M, y0 = Fraction(M), Fraction(y0)
    return Point(Fraction(p[0]) * M / n, Fraction(p[1]) * M / n + y0)


def unscale_segment(s: Segment, M, n, y0) -> Segment:
    x, y = unscale((s.x, s.y), M, n, y0)
    return Segment(s.o, x, y, s.length * Fraction(M) / n)


def pow2_at_least(x: Fraction) -> Fraction:
    """``2 ** ceil(log2 x)`` for ``x > 0``; 1 for ``x == 0``."""
    x = Fraction(x)
    if x <= 0:
        return Fraction(1)
    e = x.numerator.bit_length() - x.denominator.bit_length()
    while Fraction(2) ** e < x:
        e += 1
    while Fraction(2) ** (e - 1) >= x:
        e -= 1
    return Fraction(2) ** e


@dataclass
class Emitted:
    seg: Segment
    point: int            # global index of the point being handled
    event_y: Fraction     # height of the creating event (tick or point)


class OnRsaN:
    """Grid simulation for points with ``x <= n`` and at most ``n`` of them."""

    def __init__(self, n: int):
        self.n = n
        self.alg = Dlineon(n + 1)
        self.count = 0
        self.segments: list[tuple[Segment, Fraction]] = []   # (segment, event height)

    def _emit(self, seg, event_y):
        if seg is not None:
            self.segments.append((seg, Fraction(event_y)))

    def step(self, p) -> list[tuple[Segment, Fraction]]:
        x, y = Fraction(p[0]), Fraction(p[1])
        if x > self.n or self.count >= self.n:
            raise InstanceError("point outside the sub-instance guesses")
        v, t = snap_point((x, y))
        if t < self.alg.time:
            raise InstanceError("points must arrive with nondecreasing y")
        start = len(self.segments)
        self.count += 1
        alg = self.alg
        # vertical phase: close every time before t
        while alg.time < t:
            tau = alg.time
            alg.tick(tau)
            for u in sorted(alg.copies):
                self._emit(vseg(u, tau, tau + 1), tau)
        # horizontal phase
        rec = alg.request(v, t)
        self._emit(hseg(rec.u_on, v, y), y)
        self._emit(hseg(v, x, y), y)
        for u in range(rec.u_on, v + 1):
            self._emit(vseg(u, y, t), y)
        return self.segments[start:]


@dataclass
class SubInstance:
    g: int            # global index of the first point
    M: Fraction
    n: int
    y0: Fraction
    reason: str       # "start", "M" or "N"
    sim: OnRsaN = field(repr=False, default=None)

    def to_json(self) -> dict:
        return {"g": self.g, "M": fmt(self.M), "n": self.n, "y0": fmt(self.y0)}


@dataclass
class RsaSolution:
    points: list[Point]
    emitted: list[Emitted] = field(default_factory=list)
    subinstances: list[SubInstance] = field(default_factory=list)

    @property
    def segments(self) -> list[Segment]:
        return [e.seg for e in self.emitted]

    @property
    def cost(self) -> Fraction:
        return union_length(self.segments)

    def to_json(self) -> dict:
        return {
            "segments": [e.seg.to_json() for e in self.emitted],
            "subinstances": [s.to_json() for s in self.subinstances],
        }


def guess_update(state: "OnRsa", x) -> str:
    """``"same"`` if the point fits the current sub-instance, else why a new one opens."""
    cur = state.current
    if cur is None:
        return "start"
    if Fraction(x) > cur.M:
        return "M"
    if cur.sim.count + 1 > cur.n:
        return "N"
    return "same"


class OnRsa:
    """Fully online driver: feed points one at a time with ``add``."""

    def __init__(self):
        self.solution = RsaSolution([])
        self.current: SubInstance | None = None
        self.x_max = Fraction(0)

    def add(self, point) -> list[Emitted]:
        p = make_point(*point)
        pts = self.solution.points
        i = len(pts)
        if pts and p.y < pts[-1].y:
            raise InstanceError(f"point {i}: y decreases")
        y_prev = pts[-1].y if pts else Fraction(0)
        pts.append(p)
        self.x_max = max(self.x_max, p.x)
        why = guess_update(self, p.x)
        if why != "same":
            n = N_FIRST if self.current is None else self.current.n
            if why == "N":
                n = n ** 4
            M = pow2_at_least(self.x_max)
            sub = SubInstance(i, M, n, y_prev, why, OnRsaN(n))
            self.solution.subinstances.append(sub)
            self.current = sub
        sub = self.current
        out = []
        for seg, ev in sub.sim.step(scale(p, sub.M, sub.n, sub.y0)):
            real = unscale_segment(seg, sub.M, sub.n, sub.y0)
            out.append(Emitted(real, i, unscale((0, ev), sub.M, sub.n, sub.y0).y))
        self.solution.emitted.extend(out)
        return out


def run_onrsa(points) -> RsaSolution:
    drv = OnRsa()
    for p in points:
        drv.add(p)
    return drv.solution


# ---------------------------------------------------------------------------
# Geometry of the segment arrangement
# ---------------------------------------------------------------------------

def _merge(intervals):
    out = []
    for a, b in sorted(intervals):
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return out


def merged_lines(segments):
    """Collinear segments merged: ``({y: [[x0, x1], ...]}, {x: [[y0, y1], ...]})``."""
    hs, vs = defaultdict(list), defaultdict(list)
    for s in segments:
        if s.length <= 0:
            continue
        if s.o == H:
            hs[s.y].append((s.x, s.x + s.length))
        else:
            vs[s.x].append((s.y, s.y + s.length))
    return ({y: _merge(iv) for y, iv in hs.items()},
            {x: _merge(iv) for x, iv in vs.items()})


def union_length(segments) -> Fraction:
    hs, vs = merged_lines(segments)
    total = Fraction(0)
    for lines in (hs, vs):
        for iv in lines.values():
            total += sum((b - a for a, b in iv), Fraction(0))
    return total


def monotone_reachable(segments, targets) -> list[bool]:
    """Which targets a right/up path along the segments reaches from the origin."""
    hs, vs = merged_lines(segments)
    origin = Point(Fraction(0), Fraction(0))
    targets = [Point(Fraction(p[0]), Fraction(p[1])) for p in targets]
    # vertices on every merged piece: its ends, crossings and targets on it
    pieces = []
    for y, iv in hs.items():
        for a, b in iv:
            pieces.append((H, y, a, b))
    for x, iv in vs.items():
        for a, b in iv:
            pieces.append((V, x, a, b))
    marks = {i: set() for i in range(len(pieces))}
    hpieces = [(i, p) for i, p in enumerate(pieces) if p[0] == H]
    vpieces = [(i, p) for i, p in enumerate(pieces) if p[0] == V]
    for i, (_, y, a, b) in hpieces:
        marks[i].update((a, b))
    for j, (_, x, a, b) in vpieces:
        marks[j].update((a, b))
    for i, (_, y, ha, hb) in hpieces:
        for j, (_, x, va, vb) in vpieces:
            if ha <= x <= hb and va <= y <= vb:
                marks[i].add(x)
                marks[j].add(y)
    for q in targets + [origin]:
        for i, (o, c, a, b) in enumerate(pieces):
            if o == H and q.y == c and a <= q.x <= b:
                marks[i].add(q.x)
            elif o == V and q.x == c and a <= q.y <= b:
                marks[i].add(q.y)
    succ = defaultdict(list)
    for i, (o, c, _, _) in enumerate(pieces):
        pos = sorted(marks[i])
        for a, b in zip(pos, pos[1:]):
            if o == H:
                succ[Point(a, c)].append(Point(b, c))
            else:
                succ[Point(c, a)].append(Point(c, b))
    seen = {origin}
    stack = [origin]
    while stack:
        q = stack.pop()
        for r in succ.get(q, ()):
            if r not in seen:
                seen.add(r)
                stack.append(r)
    return [q in seen for q in targets]


def validate_rsa(sol: RsaSolution, points=None) -> Report:
    """Monotone feasibility plus online discipline of an onRSA run."""
    rep = Report("rsa")
    pts = [make_point(*p) for p in (points if points is not None else sol.points)]
    for i, ok in enumerate(monotone_reachable(sol.segments, pts)):
        rep.check("monotone_feasible", ok, f"point {i} has no monotone path")
    for e in sol.emitted:
        if e.point >= len(pts):
            rep.check("online_discipline", False, f"segment for unknown point {e.point}")
            continue
        y_prev = pts[e.point - 1].y if e.point > 0 else Fraction(0)
        rep.check("online_discipline", e.seg.y >= e.event_y >= y_prev,
                  f"point {e.point}: segment at {fmt(e.seg.y)}, event {fmt(e.event_y)}")
        rep.check("segment_positive", e.seg.length > 0, f"point {e.point}")
    check_guesses(sol, rep)
    return rep


def check_guesses(sol: RsaSolution, rep: Report) -> Report:
    subs = sol.subinstances
    if not subs:
        return rep
    final_M = subs[-1].M
    m_sum = sum((s.M for s in subs if s.reason in ("start", "M")), Fraction(0))
    rep.check("m_guess_sum", m_sum <= 2 * final_M, f"{fmt(m_sum)} > 2 * {fmt(final_M)}")
    ns = sorted({s.n for s in subs})
    weights = [math.sqrt(math.log2(n)) for n in ns]
    rep.check("n_guess_sum", sum(weights) <= 2 * weights[-1] + 1e-12,
              f"{sum(weights):.3f} > 2 * {weights[-1]:.3f}")
    for a, b in zip(subs, subs[1:]):
        if b.reason == "M":
            rep.check("m_jump", b.M >= 2 * a.M and b.n == a.n, f"sub-instance at {b.g}")
        elif b.reason == "N":
            rep.check("n_jump", b.n == a.n ** 4, f"sub-instance at {b.g}")
    for s in subs:
        if s.sim is None:
            continue
        scaled = union_length(seg for seg, _ in s.sim.segments)
        bound = 2 * s.sim.alg.cost + s.n
        rep.check("subinstance_cost", scaled <= bound,
                  f"sub-instance at {s.g}: {float(scaled):.3f} > {bound}")
    return rep


def rsa_json(sol: RsaSolution) -> dict:
    return sol.to_json()
