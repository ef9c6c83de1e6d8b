"""Seeded instance generators."""
from __future__ import annotations

import math
import random
from fractions import Fraction

from .grid import InstanceError, RequestSeq
from .plane import points_json

GENERATORS = ("uniform", "diagonal", "clustered", "adversarial", "points")


def uniform(n: int, N: int, rng: random.Random) -> RequestSeq:
    """Nodes uniform on the line, times sorted uniform on ``[0, 2n]``."""
    times = sorted(rng.randint(0, 2 * n) for _ in range(N))
    return RequestSeq(n, tuple((rng.randrange(n), t) for t in times))


def diagonal(n: int, N: int | None = None, rng=None) -> RequestSeq:
    """The full diagonal ``(k, k)``, ``k < n``; ``N`` is ignored."""
    return RequestSeq(n, tuple((k, k) for k in range(n)))


def clustered(n: int, N: int, rng: random.Random) -> RequestSeq:
    """Uniform requests squeezed into one band of ``ceil(n / 10)`` nodes."""
    width = math.ceil(n / 10)
    lo = rng.randrange(n - width + 1)
    times = sorted(rng.randint(0, 2 * n) for _ in range(N))
    return RequestSeq(n, tuple((lo + rng.randrange(width), t) for t in times))


def adversarial(n: int, N: int | None = None, rng=None) -> RequestSeq:
    """Request log of the lower-bound adversary played against Dlineon."""
    from .adversary import run_adversary
    return RequestSeq(n, tuple(run_adversary(n, "online").requests))


def points(n: int, N: int, rng: random.Random) -> list[tuple[Fraction, Fraction]]:
    """RSA points with one decimal: ``x`` in ``[0, n]``, sorted ``y`` in ``[0, 2n]``."""
    ys = sorted(Fraction(rng.randint(0, 20 * n), 10) for _ in range(N))
    return [(Fraction(rng.randint(0, 10 * n), 10), y) for y in ys]


def generate(kind: str, n: int, N: int, seed: int):
    """One instance document (JSON-ready dict) from a generator name."""
    if n < 1 or N < 0:
        raise InstanceError(f"bad size n={n}, N={N}")
    rng = random.Random(seed)
    if kind == "uniform":
        return uniform(n, N, rng).to_json()
    if kind == "diagonal":
        return diagonal(n).to_json()
    if kind == "clustered":
        return clustered(n, N, rng).to_json()
    if kind == "adversarial":
        return adversarial(n).to_json()
    if kind == "points":
        return points_json(points(n, N, rng))
    raise InstanceError(f"unknown generator {kind!r}")


def instance_seeds(seed: int, count: int) -> list[int]:
    """Independent per-instance seeds derived from one master seed."""
    rng = random.Random(seed)
    return [rng.randrange(2 ** 32) for _ in range(count)]
