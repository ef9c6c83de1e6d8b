import json
import os
import random

import pytest

from arbor.grid import ARC, GridEdge, InstanceError, RequestSeq, is_feasible
from arbor.online import (
    ACTIVE,
    INACTIVE,
    STAYACTIVE,
    Commit,
    Dlineon,
    IntervalHierarchy,
    Request,
    Tick,
    choose_delta,
    events_from_requests,
    run_online,
    validate_online,
)
from arbor.square import run_square
from conftest import random_instance, tower_instance


def test_choose_delta_examples():
    assert choose_delta(8) == 2
    assert choose_delta(2 ** 16) == 4
    assert choose_delta(2) == 2
    with pytest.raises(ValueError):
        choose_delta(1)


@pytest.mark.parametrize("n,delta", [(8, 2), (10, 3), (27, 3), (100, 4)])
def test_hierarchy_tiles_line(n, delta):
    h = IntervalHierarchy(n, delta)
    assert delta ** h.top >= n and (h.top == 0 or delta ** (h.top - 1) < n)
    for level in h.levels:
        covered = []
        k = 0
        while True:
            lo, hi = h.interval(level, k)
            if lo >= n:
                break
            covered.extend(range(lo, hi + 1))
            k += 1
        assert covered == list(range(n))
        assert h.left_neighbor(level, 0) == (0, 0)
        for v in range(n):
            lo, hi = h.neighborhood(v, level)
            assert hi == v and lo <= v
            assert h.interval(level, h.index(v, level))[0] <= v


def test_classify_examples():
    alg = Dlineon(16, delta=2)
    alg.base_tail[5].add(6)            # Base replica at t - 2 for level 1 at t = 8
    assert alg.classify(5, 1, 8) == ACTIVE
    alg.base_tail[7].add(8)
    assert alg.classify(7, 0, 8) == STAYACTIVE
    assert all(alg.classify(3, level, t) == INACTIVE for level in range(4) for t in range(10))


def test_single_request_delivery():
    alg = run_online(RequestSeq(8, ((3, 2),)))
    rec = alg.deliveries[0]
    assert alg.delta == 2
    assert rec.u_on == 0 and rec.online_radius == 3
    assert len(alg.hedges) == 3
    assert rec.online_radius <= (10 * alg.delta + 5) * rec.radius


def test_storage_commit_after_first_request():
    alg = Dlineon(8)
    for t in range(2):
        alg.tick(t)
    alg.request(3, 2)
    alg.tick(2)
    # level 0: node 2's neighbourhood {1, 2} holds no selected copy yet
    assert Commit(0, 2, 2, 2) in alg.commits
    assert GridEdge(2, 2, ARC) in {e for e, _ in alg.arcs}
    assert 2 in alg.copies and 0 in alg.copies


def test_same_time_delivery_reuses_fresh_path():
    alg = run_online(RequestSeq(16, ((9, 2), (10, 2))))
    first, second = alg.deliveries
    assert first.u_on == 0
    # Square serves the second request from node 5 of the first base row;
    # node 5 holds no stored copy but lies on the first delivery path
    assert second.u_sq == 5 and second.u_on == 5
    assert len(alg.hedges) == 10


def test_same_time_free_request():
    alg = run_online(RequestSeq(16, ((5, 1), (1, 1))))
    assert alg.deliveries[1].radius == 0 and alg.deliveries[1].u_on == 1


def test_empty_stream_is_root_spine():
    alg = Dlineon(8)
    for t in range(6):
        alg.tick(t)
        assert alg.copies == {0}
    assert alg.commits == [] and alg.hedges == []
    assert sorted(e for e, _ in alg.arcs) == [GridEdge(t, 0, ARC) for t in range(6)]


def test_events_close_every_time_before_last():
    evs = list(events_from_requests(RequestSeq(8, ((1, 0), (2, 2), (3, 2)))))
    assert evs == [Request(1, 0), Tick(0), Tick(1), Request(2, 2), Request(3, 2)]


def test_event_order_errors():
    alg = Dlineon(8)
    with pytest.raises(InstanceError):
        alg.request(1, 1)
    with pytest.raises(InstanceError):
        alg.tick(1)
    alg.tick(0)
    with pytest.raises(InstanceError):
        alg.request(1, 0)
    with pytest.raises(InstanceError):
        alg.feed([object()])


def test_three_request_golden(golden_dir):
    reqs = RequestSeq(8, ((3, 2), (5, 4), (1, 6)))
    alg = run_online(reqs)
    rep = validate_online(alg, run_square(reqs))
    assert rep.ok
    # per-request bounds by hand: radii 3, 2, 1 with delivery from node 0
    assert [d.radius for d in alg.deliveries] == [3, 2, 1]
    assert [d.online_radius for d in alg.deliveries] == [3, 5, 1]
    with open(os.path.join(golden_dir, "online_three_requests.json")) as f:
        assert json.load(f) == alg.to_json()


def test_root_always_holds_copy():
    rng = random.Random(3)
    for _ in range(40):
        reqs = random_instance(rng, 32, 10)
        alg = Dlineon(reqs.n)
        for ev in events_from_requests(reqs):
            assert 0 in alg.copies
            alg.feed([ev])


def test_random_instances_satisfy_bounds():
    rng = random.Random(21)
    for _ in range(200):
        reqs = random_instance(rng, 64, 20)
        alg = run_online(reqs)
        rep = validate_online(alg, run_square(reqs))
        assert rep.ok, rep.failures[:3]
        assert is_feasible(alg.solution(), reqs)


def test_tower_instances_satisfy_bounds():
    rng = random.Random(22)
    for _ in range(60):
        reqs = tower_instance(rng)
        assert validate_online(run_online(reqs)).ok


def test_injected_past_arc_fails_onlineness():
    alg = run_online(RequestSeq(8, ((3, 2), (5, 4))))
    alg.arcs.append((GridEdge(1, 3, ARC), 4))
    rep = validate_online(alg)
    assert rep.failed("online_arc")


def test_injected_past_horizontal_fails_onlineness():
    alg = run_online(RequestSeq(8, ((3, 2), (5, 4))))
    alg.hedges.append((GridEdge(2, 5, "h"), 4))
    assert validate_online(alg).failed("online_horizontal")


def test_mismatched_shadow_is_reported():
    a = RequestSeq(8, ((3, 2),))
    b = RequestSeq(8, ((5, 2),))
    assert validate_online(run_online(a), run_square(b)).failed("shadow_matches_square")
