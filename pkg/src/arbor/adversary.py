"""Adaptive lower-bound adversary against deterministic online DMCD algorithms.

The adversary requests the diagonal ``(t, t)``.  In the second half of the
time range it also looks at the nodes holding a copy entering time ``t``;
if one of the probe intervals left of the diagonal holds none, it requests
the right end of that interval first, forcing a long delivery path.  Its
own solution is the diagonal staircase plus a vertical store per probe.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .checks import Report
from .grid import (
    GridSolution,
    InstanceError,
    IntervalSet,
    Replica,
    horizontal_path,
    is_feasible,
    vertical_path,
)
from .online import Dlineon
from .square import SquareState


def lb_delta(n: int) -> int:
    return max(2, math.ceil(math.log2(n)))


def interval_count(n: int, delta: int | None = None) -> int:
    """``floor(log_delta n) - 1`` in exact integer arithmetic."""
    delta = delta or lb_delta(n)
    e = 0
    while delta ** (e + 1) <= n:
        e += 1
    return max(0, e - 1)


def probe_intervals(t: int, n: int) -> list[tuple[int, int]]:
    """Closed node ranges of ``(t - d**(i+1), t - d**i]`` for ``i = 1..m``, clipped to the line."""
    if n < 16:
        raise InstanceError("the adversary needs n >= 16")
    d = lb_delta(n)
    out = []
    for i in range(1, interval_count(n, d) + 1):
        lo = max(0, t - d ** (i + 1) + 1)
        hi = min(n - 1, t - d ** i)
        out.append((lo, hi))
    return out


def adversary_round(t: int, copies, n: int) -> tuple[list[Replica], int | None]:
    """Requests of round ``t`` given the copy nodes entering ``t``, and the probed index."""
    have = IntervalSet()
    for u in sorted(copies):
        have.add(u)
    for i, (lo, hi) in enumerate(probe_intervals(t, n), start=1):
        if lo <= hi and not have.intersects(lo, hi):
            return [Replica(hi, t), Replica(t, t)], i
    return [Replica(t, t)], None


# ---------------------------------------------------------------------------
# Algorithms the adversary can drive
# ---------------------------------------------------------------------------

class Strawman:
    """Floods the whole line at time 0 and stores everywhere forever."""

    name = "strawman"

    def __init__(self, n: int):
        self.n = n
        self.edges = set(horizontal_path(0, n - 1, 0))
        self.time = 0

    @property
    def copy_nodes(self) -> frozenset[int]:
        return frozenset(range(self.n))

    def request(self, v: int, t: int) -> int:
        return 0

    def tick(self, t: int) -> None:
        self.edges.update(vertical_path(u, t, t + 1)[0] for u in range(self.n))
        self.time = t + 1

    def solution(self) -> GridSolution:
        return GridSolution(self.n, frozenset(self.edges))

    @property
    def cost(self) -> int:
        return len(self.edges)


class SquareAsOnline:
    """Square behind the online interface.

    Square is only pseudo-online: it may serve from an earlier replica and
    add arcs back in time, so its delivery distance is not bounded by the
    copies entering ``t``.
    """

    name = "square"

    def __init__(self, n: int):
        self.n = n
        self.state = SquareState(n)
        self.time = 0

    @property
    def copy_nodes(self) -> frozenset[int]:
        t = self.time
        return frozenset(u for u, ts in list(self.state.times.items()) if t in ts)

    def request(self, v: int, t: int) -> int:
        step = self.state.step((v, t))
        return v - step.serving.node

    def tick(self, t: int) -> None:
        self.time = t + 1

    def solution(self) -> GridSolution:
        return self.state.solution()

    @property
    def cost(self) -> int:
        return len(self.state.edges)


class OnlineAdapter:
    """Dlineon with ``request`` returning the delivery distance."""

    name = "online"

    def __init__(self, n: int):
        self.alg = Dlineon(n)

    @property
    def copy_nodes(self) -> frozenset[int]:
        return self.alg.copy_nodes

    def request(self, v: int, t: int) -> int:
        return self.alg.request(v, t).online_radius

    def tick(self, t: int) -> None:
        self.alg.tick(t)

    def solution(self) -> GridSolution:
        return self.alg.solution()

    @property
    def cost(self) -> int:
        return self.alg.cost


ALGORITHMS = {"online": OnlineAdapter, "square": SquareAsOnline, "strawman": Strawman}


# ---------------------------------------------------------------------------
# The run
# ---------------------------------------------------------------------------

@dataclass
class Round:
    t: int
    copies: int
    case: int                  # 1: every interval holds a copy, 2: probed
    i_star: int | None = None
    probe: Replica | None = None
    probe_distance: int | None = None

    def to_json(self) -> dict:
        return {"t": self.t, "copies": self.copies, "case": self.case, "i_star": self.i_star,
                "probe": list(self.probe) if self.probe else None,
                "probe_distance": self.probe_distance}


@dataclass
class AdversaryRun:
    n: int
    delta: int
    intervals: int
    algorithm: str
    requests: list[Replica] = field(default_factory=list)
    rounds: list[Round] = field(default_factory=list)
    alg_cost: int = 0
    adv_solution: GridSolution | None = None
    report: Report = field(default_factory=lambda: Report("adversary"))

    @property
    def adv_cost(self) -> int:
        return self.adv_solution.cost

    @property
    def ratio(self) -> float:
        return self.alg_cost / self.adv_cost

    @property
    def probes(self) -> list[Round]:
        return [r for r in self.rounds if r.case == 2]

    def cost_bound(self) -> int:
        return 2 * self.n + sum(self.delta ** r.i_star + 2 for r in self.probes)

    def csv_row(self) -> dict:
        return {"n": self.n, "alg": self.algorithm, "alg_cost": self.alg_cost,
                "adv_cost": self.adv_cost, "ratio": f"{self.ratio:.6f}",
                "probe_count": len(self.probes)}

    def to_json(self) -> dict:
        return {
            "n": self.n, "delta": self.delta, "intervals": self.intervals,
            "algorithm": self.algorithm, "alg_cost": self.alg_cost,
            "adv_cost": self.adv_cost, "ratio": round(self.ratio, 9),
            "probe_count": len(self.probes),
            "requests": [list(r) for r in self.requests],
            "rounds": [r.to_json() for r in self.rounds],
            "adv_solution": self.adv_solution.to_json(),
            "checks": self.report.summary(),
        }


def adversary_solution(n: int, requests) -> GridSolution:
    """Diagonal staircase plus, for each off-diagonal request, a store from the diagonal."""
    edges = set()
    for k in range(n - 1):
        edges.update(horizontal_path(k, k + 1, k))
        edges.update(vertical_path(k + 1, k, k + 1))
    for v, t in requests:
        if v != t:
            edges.update(vertical_path(v, v, t))
    return GridSolution(n, frozenset(edges))


def run_adversary(n: int, alg="online") -> AdversaryRun:
    if isinstance(alg, str):
        try:
            alg = ALGORITHMS[alg](n)
        except KeyError:
            raise InstanceError(f"unknown algorithm {alg!r}") from None
    d = lb_delta(n)
    m = interval_count(n, d)
    if m < 1:
        raise InstanceError(f"n={n} gives no probe intervals")
    run = AdversaryRun(n, d, m, getattr(alg, "name", type(alg).__name__))
    rep = run.report
    start = math.ceil(n / 2)
    for t in range(n):
        if t < start:
            reqs, i_star = [Replica(t, t)], None
            copies = None
        else:
            copies = alg.copy_nodes
            reqs, i_star = adversary_round(t, copies, n)
        dists = [alg.request(v, s) for v, s in reqs]
        run.requests.extend(reqs)
        if copies is not None:
            if i_star is None:
                run.rounds.append(Round(t, len(copies), 1))
                rep.check("case1_copies", len(copies) >= m,
                          f"t={t}: {len(copies)} copies < {m}")
            else:
                lo, hi = probe_intervals(t, n)[i_star - 1]
                rnd = Round(t, len(copies), 2, i_star, reqs[0], dists[0])
                run.rounds.append(rnd)
                rep.check("probe_empty", not any(lo <= u <= hi for u in copies),
                          f"t={t}: interval {i_star} holds a copy")
                if isinstance(alg, (OnlineAdapter, Strawman)):
                    need = d ** (i_star + 1) - d ** i_star
                    rep.check("case2_delivery", dists[0] >= need,
                              f"t={t}: delivery {dists[0]} < {need}")
        if t < n - 1:
            alg.tick(t)
    run.alg_cost = alg.cost
    run.adv_solution = adversary_solution(n, run.requests)
    rep.check("alg_feasible", is_feasible(alg.solution(), run.requests), "algorithm misses a request")
    rep.check("adv_feasible", is_feasible(run.adv_solution, run.requests), "adversary misses a request")
    rep.check("adv_cost_bound", run.adv_cost <= run.cost_bound(),
              f"{run.adv_cost} > {run.cost_bound()}")
    return run
