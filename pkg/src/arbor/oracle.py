"""Exact offline optima for small instances.

Both problems reduce to a minimum Steiner arborescence on a monotone grid
(edges go right or up) rooted at the origin.  An optimal arborescence can be
drawn on the Hanan grid of the terminals, so the dynamic program runs on the
compressed grid with weighted gaps; the full unit grid is available for
cross-checking.  The program is the Dreyfus-Wagner subset recursion:

    g[S](p)  = min over splits S = A + B of dp[A](p) + dp[B](p)
    dp[S](p) = min over q above-right of p of dist(p, q) + g[S](q)

and the second step is a 2D suffix minimum because monotone distance is
separable in the two axes.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .grid import (
    GridSolution,
    InstanceError,
    InvariantError,
    Replica,
    RequestSeq,
    horizontal_path,
    is_arborescence,
    is_feasible,
    vertical_path,
)
from .plane import hseg, make_point, vseg

KMAX = 14
AREA_CAP = 50_000
# dp and g tables hold 2**k * V int64 cells each
CELL_CAP = 40_000_000

_INF = 1 << 50


@dataclass(frozen=True)
class OracleResult:
    cost: int
    solution: GridSolution
    terminals: int
    mode: str


def _suffix_min_2d(a: np.ndarray) -> np.ndarray:
    a = np.minimum.accumulate(a[::-1, :], axis=0)[::-1, :]
    return np.minimum.accumulate(a[:, ::-1], axis=1)[:, ::-1]


def _submasks(s: int, low: int):
    """Proper submasks of ``s`` that contain its lowest bit (one per unordered split)."""
    rest = s ^ low
    sub = (rest - 1) & rest
    out = []
    while True:
        if sub != rest:
            out.append(sub | low)
        if sub == 0:
            break
        sub = (sub - 1) & rest
    return out


def steiner_dp(xs, ys, terms):
    """Minimum monotone Steiner arborescence from ``(xs[0], ys[0])`` on a weighted grid.

    ``xs`` and ``ys`` are increasing integer coordinates; ``terms`` are
    index pairs into them.  Returns the cost and a list of connections
    ``((ix, iy), (jx, jy))``, each a monotone L-shaped path.
    """
    k = len(terms)
    if k == 0:
        return 0, []
    X = np.asarray(xs, dtype=np.int64)
    Y = np.asarray(ys, dtype=np.int64)
    nx, ny = len(X), len(Y)
    if (1 << k) * nx * ny > CELL_CAP:
        raise InstanceError(f"subset table too large: 2^{k} x {nx * ny} cells")
    off = X[:, None] + Y[None, :]
    full = (1 << k) - 1
    dp = np.full((1 << k, nx, ny), _INF, dtype=np.int64)
    g = np.full((1 << k, nx, ny), _INF, dtype=np.int64)

    def extend(s):
        h = np.minimum(g[s] + off, _INF)
        d = _suffix_min_2d(h) - off
        d[d >= _INF // 2] = _INF
        dp[s] = d

    for i, (a, b) in enumerate(terms):
        g[1 << i, a, b] = 0
        extend(1 << i)
    for s in range(1, full + 1):
        if s & (s - 1) == 0:
            continue
        subs = np.array(_submasks(s, s & -s), dtype=np.int64)
        g[s] = np.minimum((dp[subs] + dp[s ^ subs]).min(axis=0), _INF)
        extend(s)

    cost = int(dp[full, 0, 0])
    if cost >= _INF:
        raise InvariantError("terminal not reachable from the origin")

    conns = []

    def build(s, p):
        px, py = p
        target = dp[s, px, py]
        # first q in row-major order realising the extension
        best = None
        for qx in range(px, nx):
            for qy in range(py, ny):
                if g[s, qx, qy] + X[qx] - X[px] + Y[qy] - Y[py] == target:
                    best = (qx, qy)
                    break
            if best is not None:
                break
        assert best is not None
        if best != p:
            conns.append((p, best))
        if s & (s - 1) == 0:
            return
        qx, qy = best
        for sub in _submasks(s, s & -s):
            if dp[sub, qx, qy] + dp[s ^ sub, qx, qy] == g[s, qx, qy]:
                build(sub, best)
                build(s ^ sub, best)
                return
        raise AssertionError("split not found")

    build(full, (0, 0))
    return cost, conns


def _check_caps(k, kmax, area, area_cap):
    if k > kmax:
        raise InstanceError(f"{k} terminals exceed kmax={kmax}")
    if area > area_cap:
        raise InstanceError(f"grid area {area} exceeds cap {area_cap}")


def opt_dmcd(reqs: RequestSeq, kmax: int = KMAX, area_cap: int = AREA_CAP,
             compress: bool = True) -> OracleResult:
    """Exact optimum of a DMCD instance and one optimal arborescence."""
    terms = sorted({Replica(v, t) for v, t in reqs} - {Replica(0, 0)})
    _check_caps(len(terms), kmax, reqs.n * (reqs.t_max + 1), area_cap)
    if not terms:
        return OracleResult(0, GridSolution(reqs.n), 0, "empty")
    if compress:
        xs = sorted({0} | {v for v, _ in terms})
        ys = sorted({0} | {t for _, t in terms})
    else:
        xs = list(range(max(v for v, _ in terms) + 1))
        ys = list(range(reqs.t_max + 1))
    xi = {x: i for i, x in enumerate(xs)}
    yi = {y: i for i, y in enumerate(ys)}
    cost, conns = steiner_dp(xs, ys, [(xi[v], yi[t]) for v, t in terms])

    edges = set()
    for (ax, ay), (bx, by) in conns:
        u, s, v, t = xs[ax], ys[ay], xs[bx], ys[by]
        edges.update(vertical_path(u, s, t))
        edges.update(horizontal_path(u, v, t))
    sol = GridSolution(reqs.n, frozenset(edges))
    if sol.cost != cost or not is_feasible(sol, terms) or not is_arborescence(sol):
        raise InvariantError("oracle reconstruction is not an optimal arborescence")
    return OracleResult(cost, sol, len(terms), "hanan" if compress else "full")


def _monotone_paths(v: int, t: int):
    """Every monotone lattice path from the origin to ``(v, t)`` as a frozenset of edges."""
    steps = v + t
    for hpos in itertools.combinations(range(steps), v):
        hset = set(hpos)
        u = s = 0
        edges = []
        for k in range(steps):
            if k in hset:
                edges.extend(horizontal_path(u, u + 1, s))
                u += 1
            else:
                edges.extend(vertical_path(u, s, s + 1))
                s += 1
        yield frozenset(edges)


def opt_bruteforce(reqs: RequestSeq) -> int:
    """Exhaustive optimum for tiny instances.

    Any minimal solution is the union of one monotone path per terminal, so
    trying every combination of paths finds the minimum.
    """
    if reqs.n > 4 or reqs.t_max > 4 or len(reqs) > 3:
        raise InstanceError("brute force limited to n <= 4, t_max <= 4, 3 requests")
    terms = sorted({Replica(v, t) for v, t in reqs} - {Replica(0, 0)})
    if not terms:
        return 0
    options = [list(_monotone_paths(v, t)) for v, t in terms]
    return min(len(frozenset().union(*combo)) for combo in itertools.product(*options))


@dataclass(frozen=True)
class RsaOptResult:
    cost: Fraction
    segments: tuple
    terminals: int


def opt_rsa(points, kmax: int = KMAX) -> RsaOptResult:
    """Exact minimum rectilinear Steiner arborescence of points on the Hanan grid."""
    pts = sorted({make_point(*p) for p in points} - {make_point(0, 0)})
    if len(pts) > kmax:
        raise InstanceError(f"{len(pts)} points exceed kmax={kmax}")
    if not pts:
        return RsaOptResult(Fraction(0), (), 0)
    scale = 1
    for p in pts:
        scale = math.lcm(scale, p.x.denominator, p.y.denominator)
    xs = sorted({Fraction(0)} | {p.x for p in pts})
    ys = sorted({Fraction(0)} | {p.y for p in pts})
    xi = {x: i for i, x in enumerate(xs)}
    yi = {y: i for i, y in enumerate(ys)}
    cost, conns = steiner_dp([int(x * scale) for x in xs], [int(y * scale) for y in ys],
                             [(xi[p.x], yi[p.y]) for p in pts])
    segs = []
    for (ax, ay), (bx, by) in conns:
        for s in (vseg(xs[ax], ys[ay], ys[by]), hseg(xs[ax], xs[bx], ys[by])):
            if s is not None:
                segs.append(s)
    return RsaOptResult(Fraction(cost, scale), tuple(sorted(segs)), len(pts))


def rsa_bruteforce(points) -> Fraction:
    """Exhaustive optimum over Hanan-grid path combinations (at most 3 points)."""
    pts = sorted({make_point(*p) for p in points} - {make_point(0, 0)})
    if len(pts) > 3:
        raise InstanceError("brute force limited to 3 points")
    if not pts:
        return Fraction(0)
    xs = sorted({Fraction(0)} | {p.x for p in pts})
    ys = sorted({Fraction(0)} | {p.y for p in pts})
    xi = {x: i for i, x in enumerate(xs)}
    yi = {y: i for i, y in enumerate(ys)}
    options = [list(_monotone_paths(xi[p.x], yi[p.y])) for p in pts]

    def weight(e):
        if e.kind == "h":
            return xs[e.node + 1] - xs[e.node]
        return ys[e.time + 1] - ys[e.time]

    return min(sum((weight(e) for e in frozenset().union(*combo)), Fraction(0))
               for combo in itertools.product(*options))
