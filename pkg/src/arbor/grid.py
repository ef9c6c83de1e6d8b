"""Time-line grid model: replicas, edges, solutions and request sequences.

Nodes are indexed ``0..n-1`` and the origin is always replica ``(0, 0)``.
Time grows upward, nodes grow rightward; horizontal edges go from ``(u, t)``
to ``(u + 1, t)`` and arcs from ``(u, t)`` to ``(u, t + 1)``.
"""
from __future__ import annotations

import bisect
import json
import math
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

INF = math.inf

HORIZONTAL = "h"
ARC = "a"


class InstanceError(ValueError):
    """Malformed instance or request (bad node, decreasing time, ...)."""


class InvariantError(RuntimeError):
    """An algorithm reached a state its analysis rules out."""


class Replica(NamedTuple):
    node: int
    time: int


ORIGIN = Replica(0, 0)


class GridEdge(NamedTuple):
    """An edge identified by its kind and tail replica.

    Field order makes the natural tuple order the canonical one:
    by time, then node, then kind (arcs before horizontals).
    """

    time: int
    node: int
    kind: str

    @property
    def tail(self) -> Replica:
        return Replica(self.node, self.time)

    @property
    def head(self) -> Replica:
        if self.kind == HORIZONTAL:
            return Replica(self.node + 1, self.time)
        return Replica(self.node, self.time + 1)


def hedge(node: int, time: int) -> GridEdge:
    return GridEdge(time, node, HORIZONTAL)


def arc(node: int, time: int) -> GridEdge:
    return GridEdge(time, node, ARC)


def horizontal_path(u: int, v: int, t: int) -> list[GridEdge]:
    """Edges of the horizontal path ``(u, t) -> (v, t)``; empty when ``u >= v``."""
    return [GridEdge(t, w, HORIZONTAL) for w in range(u, v)]


def vertical_path(u: int, s: int, t: int) -> list[GridEdge]:
    """Arcs of the storage path ``(u, s) -> (u, t)``; empty when ``s >= t``."""
    return [GridEdge(k, u, ARC) for k in range(s, t)]


# ---------------------------------------------------------------------------
# Distances and regions
# ---------------------------------------------------------------------------

def linf_directed_distance(q, r) -> float:
    """Directed L-infinity distance from ``q`` to ``r``.

    ``max(t - s, v - u)`` when ``q = (u, s)`` lies weakly below-left of
    ``r = (v, t)``, infinity otherwise.
    """
    u, s = q
    v, t = r
    if s > t or u > v:
        return INF
    return max(t - s, v - u)


def in_square(r, rho: int, q) -> bool:
    """Membership of ``q`` in the box ``[v - rho, v] x [t - rho, t]`` below-left of ``r``."""
    if rho < 1:
        raise ValueError(f"rho must be >= 1, got {rho}")
    v, t = r
    u, s = q
    if u < 0 or s < 0:
        return False
    return v - rho <= u <= v and t - rho <= s <= t


def in_qball(center, rho: int, q) -> bool:
    """Quarter ball: replicas with a directed grid path of length <= rho to ``center``."""
    v, t = center
    u, s = q
    if u < 0 or s < 0 or u > v or s > t:
        return False
    return (v - u) + (t - s) <= rho


def qball_edges(center, rho: int) -> set[GridEdge]:
    """All grid edges whose both endpoints lie in the quarter ball."""
    v, t = center
    edges = set()
    for u in range(max(0, v - rho), v + 1):
        budget = rho - (v - u)
        for s in range(max(0, t - budget), t + 1):
            # the tail is the farther endpoint, so checking it suffices
            if u < v:
                edges.add(GridEdge(s, u, HORIZONTAL))
            if s < t:
                edges.add(GridEdge(s, u, ARC))
    return edges


def qballs_edge_disjoint(c1, rho1: int, c2, rho2: int) -> bool:
    """True iff the two quarter balls share no grid edge (enumerates the smaller ball)."""
    if rho1 > rho2:
        c1, rho1, c2, rho2 = c2, rho2, c1, rho1
    for e in qball_edges(c1, rho1):
        if in_qball(c2, rho2, e.tail) and in_qball(c2, rho2, e.head):
            return False
    return True


def qballs_share_edge(c1, rho1: int, c2, rho2: int) -> bool:
    """Closed-form negation of :func:`qballs_edge_disjoint`.

    The intersection of two quarter balls is the set of replicas ``(u, s)``
    with ``u <= min v``, ``s <= min t`` and ``u + s >= v_k + t_k - rho_k``
    for both balls, so an edge fits iff its tail can reach the top-right
    corner of that region.
    """
    vmin = min(c1[0], c2[0])
    tmin = min(c1[1], c2[1])
    need = max(c1[0] + c1[1] - rho1, c2[0] + c2[1] - rho2)
    if vmin < 0 or tmin < 0:
        return False
    if vmin + tmin - 1 < need:
        return False
    return vmin >= 1 or tmin >= 1


# ---------------------------------------------------------------------------
# Per-node time sets
# ---------------------------------------------------------------------------

class IntervalSet:
    """A set of integers stored as sorted, merged closed intervals."""

    __slots__ = ("starts", "ends")

    def __init__(self):
        self.starts: list[int] = []
        self.ends: list[int] = []

    def add(self, a: int, b: int | None = None) -> None:
        if b is None:
            b = a
        if b < a:
            return
        starts, ends = self.starts, self.ends
        # first interval that could touch [a, b] (ends >= a - 1)
        i = bisect.bisect_left(ends, a - 1)
        j = i
        while j < len(starts) and starts[j] <= b + 1:
            a = min(a, starts[j])
            b = max(b, ends[j])
            j += 1
        starts[i:j] = [a]
        ends[i:j] = [b]

    def latest_at_most(self, t: int) -> int | None:
        """Largest member ``<= t``, or None."""
        i = bisect.bisect_right(self.starts, t) - 1
        if i < 0:
            return None
        return min(self.ends[i], t)

    def earliest_at_least(self, t: int) -> int | None:
        i = bisect.bisect_left(self.ends, t)
        if i >= len(self.starts):
            return None
        return max(self.starts[i], t)

    def intersects(self, a: int, b: int) -> bool:
        s = self.latest_at_most(b)
        return s is not None and s >= a

    def __contains__(self, t: int) -> bool:
        return self.intersects(t, t)

    def __iter__(self):
        for a, b in zip(self.starts, self.ends):
            yield from range(a, b + 1)

    def __len__(self):
        return sum(b - a + 1 for a, b in zip(self.starts, self.ends))

    def __bool__(self):
        return bool(self.starts)


# ---------------------------------------------------------------------------
# Requests and solutions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RequestSeq:
    n: int
    requests: tuple[Replica, ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise InstanceError(f"network size must be positive, got {self.n}")
        reqs = tuple(Replica(int(v), int(t)) for v, t in self.requests)
        last = 0
        for i, (v, t) in enumerate(reqs):
            if not 0 <= v < self.n:
                raise InstanceError(f"request {i}: node {v} outside [0, {self.n - 1}]")
            if t < last:
                raise InstanceError(f"request {i}: time {t} precedes {last}")
            last = t
        object.__setattr__(self, "requests", reqs)

    def __len__(self):
        return len(self.requests)

    def __iter__(self):
        return iter(self.requests)

    @property
    def t_max(self) -> int:
        return self.requests[-1].time if self.requests else 0

    def to_json(self) -> dict:
        return {"n": self.n, "requests": [list(r) for r in self.requests]}

    @classmethod
    def from_json(cls, data: dict) -> "RequestSeq":
        try:
            return cls(int(data["n"]), tuple(tuple(r) for r in data["requests"]))
        except (KeyError, TypeError) as exc:
            raise InstanceError(f"bad instance document: {exc}") from exc


@dataclass(frozen=True)
class GridSolution:
    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "edges", frozenset(GridEdge(*e) for e in self.edges))

    @property
    def origin(self) -> Replica:
        return ORIGIN

    @property
    def cost(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[GridEdge]:
        return sorted(self.edges)

    @property
    def horizontal(self) -> list[GridEdge]:
        return [e for e in self.sorted_edges() if e.kind == HORIZONTAL]

    @property
    def arcs(self) -> list[GridEdge]:
        return [e for e in self.sorted_edges() if e.kind == ARC]

    def replicas(self) -> set[Replica]:
        out = {ORIGIN}
        for e in self.edges:
            out.add(e.tail)
            out.add(e.head)
        return out

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "horizontal": [[e.node, e.time] for e in self.horizontal],
            "arcs": [[e.node, e.time] for e in self.arcs],
        }

    @classmethod
    def from_json(cls, data: dict) -> "GridSolution":
        edges = [hedge(v, t) for v, t in data.get("horizontal", [])]
        edges += [arc(v, t) for v, t in data.get("arcs", [])]
        return cls(int(data["n"]), frozenset(edges))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _reachable(edges: Iterable[GridEdge]) -> set[Replica]:
    out = defaultdict(list)
    for e in edges:
        out[e.tail].append(e.head)
    seen = {ORIGIN}
    queue = deque([ORIGIN])
    while queue:
        x = queue.popleft()
        for y in out.get(x, ()):
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return seen


def is_feasible(sol: GridSolution, reqs: Iterable) -> bool:
    """Every request replica is reachable from the origin inside ``sol``."""
    seen = _reachable(sol.edges)
    return all(Replica(*r) in seen for r in reqs)


def is_arborescence(sol: GridSolution) -> bool:
    indeg: dict[Replica, int] = defaultdict(int)
    for e in sol.edges:
        indeg[e.head] += 1
    if indeg.get(ORIGIN, 0):
        return False
    if any(d != 1 for d in indeg.values()):
        return False
    return _reachable(sol.edges) >= sol.replicas()
