"""Dlineon: the fully online algorithm driven by a shadow run of Square.

Requests of time ``t`` are served from replicas of time ``t`` only (delivery
phase).  When the clock closes time ``t`` the storage phase decides which
nodes keep a copy into ``t + 1``, using a hierarchy of node intervals whose
sizes are powers of ``delta``: an interval commits to keeping a copy in its
neighbourhood while Square recently held a copy (Base or Tail replica) at
one of its nodes.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Iterator

from .checks import Report
from .grid import (
    ARC,
    HORIZONTAL,
    GridEdge,
    GridSolution,
    InstanceError,
    IntervalSet,
    InvariantError,
    Replica,
    RequestSeq,
    is_feasible,
)
from .square import SquareState, SquareStep

INACTIVE = "inactive"
ACTIVE = "active"
STAYACTIVE = "stayactive"


def choose_delta(n: int) -> int:
    """Interval branching factor ``ceil(log n / log log n)`` (base 2), at least 2."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    lg = math.log2(n)
    if lg <= 2:  # log log n <= 1: formula degenerates
        return 2
    return max(2, math.ceil(lg / math.log2(lg) - 1e-12))


class IntervalHierarchy:
    """Level-``l`` intervals are ``[k * delta**l, (k + 1) * delta**l - 1]`` clipped to the line."""

    def __init__(self, n: int, delta: int):
        if delta < 2:
            raise ValueError("delta must be >= 2")
        self.n = n
        self.delta = delta
        top = 0
        while delta ** top < n:
            top += 1
        self.top = top
        self.sizes = [delta ** l for l in range(top + 1)]

    @property
    def levels(self) -> range:
        return range(self.top + 1)

    def index(self, v: int, level: int) -> int:
        return v // self.sizes[level]

    def interval(self, level: int, k: int) -> tuple[int, int]:
        size = self.sizes[level]
        return k * size, min(self.n, (k + 1) * size) - 1

    def left_neighbor(self, level: int, k: int) -> tuple[int, int]:
        if k == 0:
            return 0, 0
        return self.interval(level, k - 1)

    def neighborhood(self, v: int, level: int) -> tuple[int, int]:
        """Nodes of the interval of ``v`` plus its left neighbour that are ``<= v``."""
        k = self.index(v, level)
        return self.left_neighbor(level, k)[0], v


@dataclass(frozen=True)
class Request:
    node: int
    time: int


@dataclass(frozen=True)
class Tick:
    time: int


def events_from_requests(reqs: RequestSeq) -> Iterator:
    """Request events interleaved with a Tick closing every time before the last request time.

    The final request time is not closed: nothing later needs a copy.
    """
    t = 0
    for v, s in reqs:
        while t < s:
            yield Tick(t)
            t += 1
        yield Request(v, s)


@dataclass
class Commit:
    level: int
    index: int
    time: int
    node: int                 # node whose copy was extended
    seeded: bool = False      # tail continuation rather than an S1 selection


@dataclass
class DeliveryRecord:
    index: int
    request: Replica
    u_sq: int
    radius: int
    u_on: int

    @property
    def online_radius(self) -> int:
        return self.request.node - self.u_on


class Dlineon:
    """Event-driven online state machine.

    ``copies`` is the set of nodes holding a copy entering the current time
    (``C_t``); ``present`` additionally tracks nodes reached by delivery
    paths at the current time.
    """

    name = "online"

    def __init__(self, n: int, delta: int | None = None, check_properties: bool = True):
        self.n = n
        self.delta = delta if delta is not None else choose_delta(max(n, 2))
        self.hier = IntervalHierarchy(n, self.delta)
        self.shadow = SquareState(n)
        self.time = 0
        self.copies: set[int] = {0}
        self.present: set[int] = {0}
        self.hedges: list[tuple[GridEdge, int]] = []   # (edge, creating event time)
        self.arcs: list[tuple[GridEdge, int]] = []
        self.commits: list[Commit] = []
        self.deliveries: list[DeliveryRecord] = []
        self.requests: list[Replica] = []
        self.check_properties = check_properties
        self.property_report = Report("online-properties")
        # Base and Tail occurrences of the shadow Square, per node
        self.base_tail: defaultdict[int, IntervalSet] = defaultdict(IntervalSet)
        self.tails: defaultdict[int, IntervalSet] = defaultdict(IntervalSet)
        # Every Base/Tail interval starts no later than the time it is added,
        # so the latest end per node decides membership of the current time.
        self.reach: dict[int, int] = {}
        self.tail_reach: dict[int, int] = {}

    # -- events -----------------------------------------------------------

    def feed(self, events: Iterable) -> "Dlineon":
        for ev in events:
            if isinstance(ev, Request):
                self.request(ev.node, ev.time)
            elif isinstance(ev, Tick):
                self.tick(ev.time)
            else:
                raise InstanceError(f"unknown event {ev!r}")
        return self

    def request(self, v: int, t: int) -> DeliveryRecord:
        if t != self.time:
            if t < self.time:
                raise InstanceError(f"request at time {t} after time {self.time} began")
            raise InstanceError(f"request at time {t} before time {self.time} was closed")
        step = self.shadow.step((v, t))
        self._record_base_tail(step)
        return self._deliver(step)

    def tick(self, t: int) -> None:
        if t != self.time:
            raise InstanceError(f"tick for time {t} while at time {self.time}")
        self._store(t)
        self.time = t + 1

    # -- phases -----------------------------------------------------------

    def _record_base_tail(self, step: SquareStep) -> None:
        u_sq, v = step.base_row
        t = step.request.time
        reach = self.reach
        for u in range(u_sq, v + 1):
            self.base_tail[u].add(t)
            if reach.get(u, -1) < t:
                reach[u] = t
        a, b = step.tail_span
        self.base_tail[u_sq].add(a, b)
        self.tails[u_sq].add(a, b)
        reach[u_sq] = max(reach[u_sq], b)
        self.tail_reach[u_sq] = max(self.tail_reach.get(u_sq, -1), b)

    def _deliver(self, step: SquareStep) -> DeliveryRecord:
        v, t = step.request
        u_sq = step.serving.node
        u_on = max(u for u in self.present if u <= u_sq)
        for w in range(u_on, v):
            if w + 1 not in self.present:
                self.hedges.append((GridEdge(t, w, HORIZONTAL), t))
                self.present.add(w + 1)
        rec = DeliveryRecord(step.index, step.request, u_sq, step.radius, u_on)
        self.deliveries.append(rec)
        self.requests.append(step.request)
        return rec

    def classify(self, v: int, level: int, t: int) -> str:
        size = self.hier.sizes[level]
        occ = self.base_tail[v]
        if occ.intersects(t - size + 1, t):
            return STAYACTIVE
        if occ.intersects(t - size, t):
            return ACTIVE
        return INACTIVE

    def _store(self, t: int) -> None:
        hier = self.hier
        horizon = t - hier.sizes[-1]
        for u in [u for u, r in self.reach.items() if r < horizon]:
            del self.reach[u]
        nodes = sorted(self.reach)
        # Base/Tail replicas of time t; all of them carry a copy by now
        bt_now = IntervalSet()
        for u in nodes:
            if self.reach[u] >= t:
                if u not in self.present:
                    raise InvariantError(f"Base/Tail replica ({u}, {t}) lacks a copy")
                bt_now.add(u)
        copies_now = IntervalSet()
        for u in sorted(self.copies):
            copies_now.add(u)

        nxt = {0}
        chosen = IntervalSet()
        chosen.add(0)
        # tails still running past t keep their copy
        for u in sorted(self.tail_reach):
            if self.tail_reach[u] > t:
                if u != 0:
                    nxt.add(u)
                    chosen.add(u)
                    self.commits.append(Commit(0, u, t, u, seeded=True))
            else:
                del self.tail_reach[u]

        # latest Base/Tail time <= t for every node active at some level
        recent = [(v, min(t, self.reach[v])) for v in nodes]

        # Within one interval the neighbourhoods share their left end and grow
        # with v, so only the smallest active and the smallest stayactive node
        # of each interval can change the outcome.
        for level in hier.levels:
            size = hier.sizes[level]
            cur = -1
            seen_active = seen_stay = False
            for v, last in recent:
                if last < t - size:
                    continue
                k = v // size
                if k != cur:
                    cur, seen_active, seen_stay = k, False, False
                if seen_stay:
                    continue
                lo = (k - 1) * size if k else 0
                if not seen_active:
                    seen_active = True
                    if self.check_properties:
                        near = bt_now.intersects(lo, v) or copies_now.intersects(lo, v)
                        self.property_report.check(
                            "active_has_near_copy", near, f"node {v} level {level} time {t}")
                if last < t - size + 1:
                    continue
                seen_stay = True
                if chosen.intersects(lo, v):
                    continue
                u = self._candidate(lo, v, bt_now, copies_now)
                if u is None:
                    raise InvariantError(
                        f"no copy available in [{lo}, {v}] at time {t} (level {level})")
                self.commits.append(Commit(level, k, t, u))
                nxt.add(u)
                chosen.add(u)
        for u in sorted(nxt):
            self.arcs.append((GridEdge(t, u, ARC), t))
        self.copies = nxt
        self.present = set(nxt)

    @staticmethod
    def _candidate(lo: int, hi: int, bt_now: IntervalSet, copies_now: IntervalSet) -> int | None:
        """Rightmost node of ``[lo, hi]`` with a Base/Tail replica or a stored copy at this time."""
        a = bt_now.latest_at_most(hi)
        b = copies_now.latest_at_most(hi)
        best = max(x for x in (a, b, lo - 1) if x is not None)
        return best if best >= lo else None

    # -- results ----------------------------------------------------------

    @property
    def copy_nodes(self) -> frozenset[int]:
        """Nodes holding a copy entering the current time (read by adversaries)."""
        return frozenset(self.copies)

    def solution(self) -> GridSolution:
        return GridSolution(self.n, frozenset(e for e, _ in self.hedges + self.arcs))

    @property
    def cost(self) -> int:
        return len(self.hedges) + len(self.arcs)

    def spine_arcs(self) -> int:
        return sum(1 for e, _ in self.arcs if e.node == 0)

    def commit_log(self) -> list[list[int]]:
        return [[c.level, c.index, c.time] for c in self.commits]

    def to_json(self) -> dict:
        sol = self.solution().to_json()
        sol["commits"] = self.commit_log()
        sol["delta"] = self.delta
        return sol


def run_online(reqs: RequestSeq, delta: int | None = None,
               check_properties: bool = True) -> Dlineon:
    alg = Dlineon(reqs.n, delta, check_properties)
    return alg.feed(events_from_requests(reqs))


def validate_online(alg: Dlineon, square_trace=None) -> Report:
    """Per-instance bounds relating Dlineon to its shadow Square run."""
    rep = Report("online")
    rep.merge(alg.property_report)
    delta = alg.delta
    f_sq = len(alg.shadow.edges)
    if square_trace is not None:
        rep.check("shadow_matches_square", square_trace.solution.cost == f_sq,
                  "shadow Square differs from the reference run")

    factor = 10 * delta + 5
    for d in alg.deliveries:
        rep.check("delivery_radius", d.online_radius <= factor * d.radius,
                  f"request {d.index}: {d.online_radius} > {factor} * {d.radius}")
    h_on = len(alg.hedges)
    rep.check("delivery_total", h_on <= factor * f_sq, f"{h_on} > {factor} * {f_sq}")

    log_n = math.log(alg.n, delta) if alg.n > 1 else 0.0
    n_commit = len(alg.commits)
    rep.check("commit_total", n_commit <= (1 + 4 * log_n) * f_sq + 1e-9,
              f"{n_commit} > (1 + 4 log n) * {f_sq}")
    non_spine = len(alg.arcs) - alg.spine_arcs()
    rep.check("arcs_vs_commits", non_spine <= n_commit, f"{non_spine} > {n_commit}")

    keys = [(c.level, c.index, c.time) for c in alg.commits]
    rep.check("commit_unique", len(keys) == len(set(keys)), "repeated (interval, time)")

    for e, ev_time in alg.hedges:
        rep.check("online_horizontal", e.time == ev_time, f"{e} created at {ev_time}")
    for e, ev_time in alg.arcs:
        rep.check("online_arc", e.kind == ARC and e.time == ev_time,
                  f"{e} created at tick {ev_time}")

    sol = alg.solution()
    rep.check("feasible", is_feasible(sol, alg.requests), "a request is unreachable")
    t_last = alg.requests[-1].time if alg.requests else 0
    spine = alg.spine_arcs()
    bound = factor * f_sq + (1 + 4 * log_n) * f_sq + spine
    rep.check("cost_total", alg.cost <= bound + 1e-9, f"{alg.cost} > {bound}")
    rep.check("spine_length", spine <= max(t_last, alg.time), f"{spine} spine arcs")
    return rep
