import random
from fractions import Fraction as F

import pytest

from arbor.grid import InstanceError, RequestSeq
from arbor.online import run_online
from arbor.plane import Segment, fmt, make_point, parse_points, points_json
from arbor.rsa import (
    OnRsa,
    OnRsaN,
    RsaSolution,
    guess_update,
    monotone_reachable,
    pow2_at_least,
    run_onrsa,
    scale,
    snap_point,
    union_length,
    unscale,
    validate_rsa,
)


def test_snap_examples():
    assert snap_point((F("2.4"), F("3.2"))) == (2, 4)
    assert snap_point((2, 3)) == (2, 3)
    assert snap_point((F("0.9"), F(0))) == (0, 0)


def test_grid_point_matches_discrete_run():
    sim = OnRsaN(8)
    segs = [s for s, _ in sim.step((3, 2))]
    dmcd = run_online(RequestSeq(9, ((3, 2),)))
    assert union_length(segs) == dmcd.cost == 5
    assert all(s.length > 0 for s in segs)


def test_fractional_point_horizontal_phase():
    segs = [s for s, _ in OnRsaN(8).step((F("2.4"), F("1.5")))]
    h = sorted(s for s in segs if s.o == "h")
    assert h == [Segment("h", F(0), F("1.5"), F(2)), Segment("h", F(2), F("1.5"), F("0.4"))]
    stubs = sorted(s for s in segs if s.o == "v" and s.y == F("1.5"))
    assert [(s.x, s.length) for s in stubs] == [(0, F("0.5")), (1, F("0.5")), (2, F("0.5"))]
    spine = sorted(s for s in segs if s.o == "v" and s.y < F("1.5"))
    assert [(s.x, s.y) for s in spine] == [(0, 0), (0, 1)]


def test_first_point_of_later_subinstance_starts_at_its_origin():
    sol = run_onrsa([(1, 1), (3, F("2.5"))])
    assert [s.y0 for s in sol.subinstances] == [0, 1]
    later = [e.seg for e in sol.emitted if e.point == 1]
    spine = sorted(s for s in later if s.o == "v" and s.x == 0)
    assert spine[0].y == 1


def test_scale_examples():
    assert scale((50, F("7.5")), 100, 10) == (5, F("0.75"))
    assert scale((3, 10), 100, 10, y0=10) == (F(3, 10), 0)
    with pytest.raises(InstanceError):
        scale((1, 1), 4, 4, y0=2)


def test_scale_round_trip():
    rng = random.Random(1)
    for _ in range(50):
        p = (F(rng.randint(0, 999), rng.randint(1, 50)), F(rng.randint(0, 999), rng.randint(1, 50)))
        M = F(2) ** rng.randint(-3, 8)
        n = 4 ** rng.randint(1, 4)
        y0 = F(rng.randint(0, 5))
        if p[1] < y0:
            continue
        assert unscale(scale(p, M, n, y0), M, n, y0) == p


def test_pow2():
    assert pow2_at_least(F(3)) == 4
    assert pow2_at_least(F(9)) == 16
    assert pow2_at_least(F(8)) == 8
    assert pow2_at_least(F(3, 8)) == F(1, 2)
    assert pow2_at_least(F(0)) == 1


def test_guess_examples():
    drv = OnRsa()
    assert guess_update(drv, 3) == "start"
    drv.add((3, 0))
    assert drv.current.M == 4 and drv.current.n == 4
    for y in (1, 2, 3):
        drv.add((1, y))
    assert guess_update(drv, 1) == "N"
    drv.add((1, 4))
    assert drv.current.n == 256 and drv.current.reason == "N"
    drv.add((F(9, 2), 5))
    assert drv.current.M == 8 and drv.current.n == 256
    drv.add((9, 6))
    assert drv.current.M == 16


def _predicted_separators(xs):
    # the guessing rule restated: a new sub-instance opens when x exceeds
    # the current power-of-two bound or the local count exceeds the guess
    out, M, n, count, x_max = [], None, None, 0, F(0)
    for i, x in enumerate(xs):
        x_max = max(x_max, x)
        if M is None or x > M or count + 1 > n:
            if M is not None and x <= M:
                n = n ** 4
            elif n is None:
                n = 4
            M = pow2_at_least(x_max)
            out.append(i)
            count = 0
        count += 1
    return out


def test_separators_with_two_m_jumps():
    rng = random.Random(2)
    xs = [F(rng.randint(0, 30), 10) for _ in range(20)]
    xs += [F(rng.randint(31, 60), 10) for _ in range(15)]
    xs += [F(rng.randint(61, 120), 10) for _ in range(15)]
    xs[20], xs[35] = F(6), F(12)
    pts = [(x, F(i, 4)) for i, x in enumerate(xs)]
    sol = run_onrsa(pts)
    assert [s.g for s in sol.subinstances] == _predicted_separators(xs)
    jumps = [s for s in sol.subinstances if s.reason == "M"]
    assert len(jumps) >= 2
    assert sum(s.M for s in sol.subinstances if s.reason in ("start", "M")) <= 2 * sol.subinstances[-1].M
    assert validate_rsa(sol).ok


def test_single_point_and_empty():
    sol = run_onrsa([(3, F("2.5"))])
    rep = validate_rsa(sol)
    assert rep.ok
    assert sol.cost <= 5 * F("5.5")
    empty = run_onrsa([])
    assert empty.segments == [] and empty.cost == 0 and validate_rsa(empty).ok


def test_missing_stub_is_reported():
    pts = [(F("1.9"), F("1.2")), (F(3), F("2.5")), (F("2.2"), F("2.9"))]
    sol = run_onrsa(pts)
    assert validate_rsa(sol).ok
    stub = sol.emitted[14]
    assert stub.seg == Segment("v", F(2), F("2.5"), F("0.7")) and stub.point == 1
    cut = RsaSolution(sol.points, sol.emitted[:14] + sol.emitted[15:], sol.subinstances)
    rep = validate_rsa(cut)
    assert rep.failures == [("monotone_feasible", "point 2 has no monotone path")]


def test_segment_below_event_fails_discipline():
    sol = run_onrsa([(1, 1), (2, 3)])
    e = sol.emitted[-1]
    e.seg = Segment(e.seg.o, e.seg.x, F(0), e.seg.length)
    assert validate_rsa(sol).failed("online_discipline")


def test_random_campaign():
    rng = random.Random(3)
    for _ in range(30):
        N = rng.randint(1, 30)
        ys = sorted(F(rng.randint(0, 200), 10) for _ in range(N))
        pts = [(F(rng.randint(0, 200), rng.choice([1, 2, 10])), y) for y in ys]
        assert validate_rsa(run_onrsa(pts)).ok


def test_decreasing_y_rejected():
    with pytest.raises(InstanceError):
        run_onrsa([(1, 2), (1, 1)])
    with pytest.raises(InstanceError):
        parse_points({"points": [["1", "2"], ["1", "1"]]})
    with pytest.raises(InstanceError):
        make_point(-1, 0)


def test_reachability_primitives():
    segs = [Segment("v", F(0), F(0), F(2)), Segment("h", F(0), F(1), F(3))]
    assert monotone_reachable(segs, [(3, 1), (0, 2), (1, 2), (2, 1)]) == [True, True, False, True]
    # overlapping collinear pieces count once
    assert union_length(segs + [Segment("v", F(0), F(1), F(1))]) == 5


def test_json_formats():
    assert fmt(F(5, 2)) == "2.5" and fmt(F(3)) == "3" and fmt(F(-1, 8)) == "-0.125"
    s = Segment("h", F(1, 2), F(3), F(7, 4))
    assert s.to_json() == {"o": "h", "x": "0.5", "y": "3", "len": "1.75"}
    assert Segment.from_json(s.to_json()) == s
    doc = points_json([(F(1, 2), F(1))])
    assert parse_points(doc) == [(F(1, 2), F(1))]
    sol = run_onrsa([(3, F("2.5"))])
    assert sol.to_json()["subinstances"] == [{"g": 0, "M": "4", "n": 4, "y0": "0"}]
