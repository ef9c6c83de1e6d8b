"""The pseudo-online algorithm Square for directed content distribution.

Square serves requests in order and never removes an edge, but it may add
storage arcs at times earlier than the current request (step SQ4), which is
what makes it only pseudo-online.  For every request it records the radius,
closest replica, serving replica, base row and tail so that the analysis
properties can be validated on concrete traces.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable

from .checks import Report
from .grid import (
    GridEdge,
    GridSolution,
    InstanceError,
    IntervalSet,
    Replica,
    RequestSeq,
    horizontal_path,
    in_square,
    is_arborescence,
    is_feasible,
    linf_directed_distance,
    qballs_share_edge,
    vertical_path,
)

# serving box is this many radii wide; tails are TAIL_FACTOR radii long
SERVE_FACTOR = 5
TAIL_FACTOR = 4


@dataclass(frozen=True)
class SquareStep:
    index: int
    request: Replica
    radius: int
    closest: Replica
    serving: Replica
    base_row: tuple[int, int]          # node range [u_sq, v] at the request time
    tail_span: tuple[int, int]         # time range at the serving node
    covered: bool
    spine_added: tuple[GridEdge, ...] = ()
    edges_added: tuple[GridEdge, ...] = ()

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "request": list(self.request),
            "radius": self.radius,
            "closest": list(self.closest),
            "serving": list(self.serving),
            "base_row": list(self.base_row),
            "tail_span": list(self.tail_span),
            "covered": self.covered,
            "spine_added": [[e.kind, e.node, e.time] for e in self.spine_added],
            "edges_added": [[e.kind, e.node, e.time] for e in self.edges_added],
        }


class SquareState:
    """Mutable state of one Square run: the edge set plus per-node replica times."""

    def __init__(self, n: int):
        self.n = n
        self.edges: set[GridEdge] = set()
        self.times: defaultdict[int, IntervalSet] = defaultdict(IntervalSet)
        self.times[0].add(0)
        self.last_time = 0
        self.steps: list[SquareStep] = []

    def _add(self, edges: Iterable[GridEdge], sink: list) -> None:
        # An edge into a replica that is already present would only duplicate
        # reachability; skipping it keeps the replica set identical and the
        # solution an arborescence.
        for e in edges:
            head = e.head
            if head.time in self.times[head.node]:
                continue
            self.edges.add(e)
            sink.append(e)
            self.times[head.node].add(head.time)

    def has(self, node: int, time: int) -> bool:
        return time in self.times[node]

    def closest(self, v: int, t: int) -> tuple[int, Replica]:
        """Minimum directed L-infinity distance to ``(v, t)`` and the replica attaining it.

        Ties go to the smallest node; within a node the latest time wins.
        """
        best = None
        best_q = None
        for u in range(v, -1, -1):
            if best is not None and v - u > best:
                break
            s = self.times[u].latest_at_most(t)
            if s is None:
                continue
            d = max(t - s, v - u)
            if best is None or d <= best:
                best, best_q = d, Replica(u, s)
        assert best is not None  # (0, t) is always present after the spine
        return best, best_q

    def serving(self, v: int, t: int, rho: int) -> Replica:
        """Leftmost replica inside the box of side ``SERVE_FACTOR * rho`` below-left of ``(v, t)``."""
        side = SERVE_FACTOR * rho
        for u in range(max(0, v - side), v + 1):
            s = self.times[u].latest_at_most(t)
            if s is not None and s >= t - side:
                return Replica(u, s)
        raise AssertionError("closest replica lies inside the serving box")

    def step(self, request) -> SquareStep:
        v, t = int(request[0]), int(request[1])
        if not 0 <= v < self.n:
            raise InstanceError(f"node {v} outside [0, {self.n - 1}]")
        if t < self.last_time:
            raise InstanceError(f"request time {t} precedes {self.last_time}")
        r = Replica(v, t)
        spine: list[GridEdge] = []
        self._add(vertical_path(0, self.last_time, t), spine)
        self.last_time = t

        rho, q_close = self.closest(v, t)
        added: list[GridEdge] = []
        if rho == 0:
            # request already in the solution: served for free
            step = SquareStep(len(self.steps), r, 0, q_close, r, (v, v), (t, t),
                              True, tuple(spine), ())
        else:
            q_sq = self.serving(v, t, rho)
            u_sq, s_sq = q_sq
            self._add(vertical_path(u_sq, s_sq, t), added)
            self._add(horizontal_path(u_sq, v, t), added)
            self._add(vertical_path(u_sq, t, t + TAIL_FACTOR * rho), added)
            step = SquareStep(len(self.steps), r, rho, q_close, q_sq, (u_sq, v),
                              (t, t + TAIL_FACTOR * rho), v - u_sq >= rho,
                              tuple(spine), tuple(added))
        self.steps.append(step)
        return step

    def solution(self) -> GridSolution:
        return GridSolution(self.n, frozenset(self.edges))


def square_step(state: SquareState, request) -> SquareStep:
    return state.step(request)


@dataclass
class SquareTrace:
    reqs: RequestSeq
    steps: list[SquareStep]
    solution: GridSolution
    parent: dict[int, int | None] = field(default_factory=dict)

    @property
    def cost(self) -> int:
        return self.solution.cost

    @property
    def radius_sum(self) -> int:
        return sum(s.radius for s in self.steps)

    def covered(self) -> list[int]:
        return [s.index for s in self.steps if s.covered]

    def uncovered(self) -> list[int]:
        return [s.index for s in self.steps if not s.covered]

    def roots(self) -> list[int]:
        return [i for i, p in self.parent.items() if p is None]

    def children(self, i: int) -> list[int]:
        return sorted(j for j, p in self.parent.items() if p == i)

    def tree(self, i: int) -> list[int]:
        """``i`` together with all its descendants."""
        out, stack = [], [i]
        while stack:
            k = stack.pop()
            out.append(k)
            stack.extend(self.children(k))
        return sorted(out)

    def to_json(self) -> dict:
        return {
            "instance": self.reqs.to_json(),
            "steps": [s.to_json() for s in self.steps],
            "parent": [[i, p] for i, p in sorted(self.parent.items())],
            "cost": self.cost,
            "solution": self.solution.to_json(),
        }


def run_square(reqs: RequestSeq) -> SquareTrace:
    state = SquareState(reqs.n)
    for r in reqs:
        state.step(r)
    trace = SquareTrace(reqs, state.steps, state.solution())
    classify_and_forest(trace)
    return trace


def _ball(step: SquareStep):
    return step.request, step.radius


def classify_and_forest(trace: SquareTrace) -> dict[int, int | None]:
    """Parent pointers over uncovered requests.

    The parent of uncovered ``i`` is the smallest uncovered ``j > i`` whose
    quarter ball shares an edge with that of ``i``.
    """
    unc = trace.uncovered()
    parent: dict[int, int | None] = {}
    for a, i in enumerate(unc):
        ci, ri = _ball(trace.steps[i])
        parent[i] = None
        for j in unc[a + 1:]:
            cj, rj = _ball(trace.steps[j])
            if qballs_share_edge(ci, ri, cj, rj):
                parent[i] = j
                break
    trace.parent = parent
    return parent


def spine_cost(trace: SquareTrace) -> int:
    return sum(len(s.spine_added) for s in trace.steps)


def validate_trace(trace: SquareTrace) -> Report:
    """Check the structural and analysis properties of a Square trace.

    ``cost_vs_radii`` excludes the root-spine arcs: those are paid for by
    the optimum, which must itself reach the last request time.
    """
    rep = Report("square")
    steps = trace.steps
    sol = trace.solution

    rep.check("feasible", is_feasible(sol, trace.reqs), "solution misses a request")
    rep.check("arborescence", is_arborescence(sol), "solution is not an arborescence")

    for s in steps:
        if s.radius == 0:
            continue
        ok = (in_square(s.request, SERVE_FACTOR * s.radius, s.serving)
              and s.serving.node <= s.closest.node <= s.request.node
              and linf_directed_distance(s.closest, s.request) == s.radius
              and s.covered == (s.request.node - s.serving.node >= s.radius))
        rep.check("step_geometry", ok, f"request {s.index}")

    non_spine = sol.cost - spine_cost(trace)
    rep.check("cost_vs_radii", non_spine <= 14 * trace.radius_sum,
              f"{non_spine} > 14 * {trace.radius_sum}")

    def disjoint_family(name, idx):
        for a, i in enumerate(idx):
            for j in idx[a + 1:]:
                ci, ri = _ball(steps[i])
                cj, rj = _ball(steps[j])
                rep.check(name, not qballs_share_edge(ci, ri, cj, rj),
                          f"quarter balls of requests {i} and {j} share an edge")

    disjoint_family("covered_disjoint", trace.covered())
    disjoint_family("roots_disjoint", trace.roots())

    for j, i in trace.parent.items():
        if i is None:
            continue
        sj, si = steps[j], steps[i]
        vi, vj = si.request.node, sj.request.node
        rep.check("child_radius", si.radius >= 4 * sj.radius,
                  f"parent {i} radius {si.radius} < 4 * child {j} radius {sj.radius}")
        rep.check("child_position",
                  vj - sj.radius <= vi < sj.serving.node <= vj,
                  f"parent {i}, child {j}")

    for i in set(p for p in trace.parent.values() if p is not None):
        kids = trace.children(i)
        for k, j in zip(kids, kids[1:]):
            sk, sj = steps[k], steps[j]
            rep.check("sibling_timing",
                      sj.request.time - sj.radius >= sk.request.time + TAIL_FACTOR * sk.radius,
                      f"siblings {k} < {j} under {i}")

    for root in trace.roots():
        total = sum(steps[k].radius for k in trace.tree(root))
        rep.check("root_aggregation", 2 * steps[root].radius >= total,
                  f"root {root}: 2 * {steps[root].radius} < {total}")
    return rep


