import json
import os
import random

import pytest

from arbor.grid import (
    GridSolution,
    InstanceError,
    Replica,
    RequestSeq,
    arc,
    is_arborescence,
    is_feasible,
    qballs_edge_disjoint,
)
from arbor.oracle import opt_dmcd
from arbor.square import (
    SquareState,
    SquareStep,
    SquareTrace,
    classify_and_forest,
    run_square,
    spine_cost,
    square_step,
    validate_trace,
)
from conftest import chain_instance, random_instance, tower_instance


def test_single_request_hand_simulation():
    tr = run_square(RequestSeq(8, ((3, 2),)))
    s = tr.steps[0]
    assert s.radius == 3
    assert s.closest == (0, 2) and s.serving == (0, 2)
    assert s.covered
    assert len(s.spine_added) == 2
    kinds = [e.kind for e in s.edges_added]
    assert kinds.count("h") == 3 and kinds.count("a") == 12
    assert s.base_row == (0, 3) and s.tail_span == (2, 14)
    assert tr.cost == 17
    assert is_arborescence(tr.solution)


def test_empty_instance():
    tr = run_square(RequestSeq(8, ()))
    assert tr.cost == 0 and tr.solution.replicas() == {(0, 0)}
    assert validate_trace(tr).ok


def test_request_on_existing_replica_is_free():
    st = SquareState(8)
    square_step(st, (0, 3))
    step = square_step(st, (0, 3))
    assert step.radius == 0 and step.covered and not step.edges_added
    assert len(st.edges) == 3


def test_duplicate_request_idempotent():
    once = run_square(RequestSeq(8, ((3, 2),)))
    twice = run_square(RequestSeq(8, ((3, 2), (3, 2))))
    assert twice.steps[1].radius == 0
    assert twice.solution == once.solution


def test_same_time_second_radius():
    tr = run_square(RequestSeq(8, ((2, 1), (5, 1))))
    assert tr.steps[1].radius == 3
    assert tr.steps[1].closest == (2, 1)


def test_step_errors():
    st = SquareState(4)
    with pytest.raises(InstanceError):
        st.step((4, 0))
    st.step((1, 3))
    with pytest.raises(InstanceError):
        st.step((1, 2))


def test_two_request_golden(golden_dir):
    tr = run_square(RequestSeq(8, ((1, 1), (2, 2))))
    # hand simulation: first request costs 1 spine + 1 horizontal + 4 tail,
    # second reuses the tail and adds 2 horizontals plus one tail arc
    assert [s.radius for s in tr.steps] == [1, 1]
    assert [tuple(s.serving) for s in tr.steps] == [(0, 1), (0, 2)]
    assert tr.cost == 9
    with open(os.path.join(golden_dir, "square_two_requests.json")) as f:
        assert json.load(f) == json.loads(json.dumps(tr.to_json()))


def test_monotone_growth():
    rng = random.Random(5)
    for _ in range(50):
        reqs = random_instance(rng, 32, 10)
        st = SquareState(reqs.n)
        prev = set()
        for r in reqs:
            st.step(r)
            assert prev <= st.edges
            sol = st.solution()
            assert is_arborescence(sol)
            assert is_feasible(sol, [s.request for s in st.steps])
            prev = set(st.edges)


def test_forest_single_and_disjoint():
    tr = run_square(RequestSeq(8, ((3, 2),)))
    assert tr.parent == {} or all(p is None for p in tr.parent.values())
    # balls far apart: every uncovered request is a root
    rng = random.Random(2)
    for _ in range(100):
        tr = run_square(tower_instance(rng))
        for i in tr.roots():
            assert tr.parent[i] is None


def _synthetic(steps):
    tr = SquareTrace(RequestSeq(32, tuple(s.request for s in steps)), steps, GridSolution(32))
    classify_and_forest(tr)
    return tr


def _step(i, req, rho, serving):
    return SquareStep(i, Replica(*req), rho, Replica(*serving), Replica(*serving),
                      (serving[0], req[0]), (req[1], req[1] + 4 * rho),
                      req[0] - serving[0] >= rho)


def test_forest_crafted_overlap():
    j = _step(0, (6, 6), 2, (6, 4))
    i = _step(1, (7, 20), 16, (7, 4))
    assert not j.covered and not i.covered
    assert not qballs_edge_disjoint((6, 6), 2, (7, 20), 16)
    tr = _synthetic([j, i])
    assert tr.parent == {0: 1, 1: None}
    assert tr.roots() == [1] and tr.tree(1) == [0, 1]


def test_forest_crafted_disjoint():
    j = _step(0, (6, 6), 2, (6, 4))
    i = _step(1, (7, 20), 4, (7, 18))
    assert qballs_edge_disjoint((6, 6), 2, (7, 20), 4)
    assert _synthetic([j, i]).parent == {0: None, 1: None}


def test_validate_flags_bad_child():
    j = _step(0, (6, 6), 2, (6, 4))
    i = _step(1, (7, 8), 5, (7, 3))
    rep = validate_trace(_synthetic([j, i]))
    assert rep.failed("child_radius") and rep.failed("child_position")


def test_validate_flags_sibling_timing():
    a = _step(0, (10, 10), 2, (10, 8))
    b = _step(1, (10, 12), 2, (10, 10))
    root = _step(2, (9, 14), 16, (9, 0))
    tr = _synthetic([a, b, root])
    assert tr.children(2) == [0, 1]
    assert validate_trace(tr).failed("sibling_timing")


def test_truncated_tail_breaks_feasibility():
    tr = run_square(RequestSeq(8, ((1, 1), (2, 2))))
    assert validate_trace(tr).ok
    cut = GridSolution(8, tr.solution.edges - {arc(0, 1)})
    bad = SquareTrace(tr.reqs, tr.steps, cut, tr.parent)
    rep = validate_trace(bad)
    assert rep.failed("feasible")


def test_random_traces_pass_all_checks():
    rng = random.Random(11)
    for _ in range(200):
        reqs = random_instance(rng, 64, 20)
        rep = validate_trace(run_square(reqs))
        assert rep.ok, rep.failures[:3]


def test_tower_traces_pass_all_checks():
    rng = random.Random(12)
    uncovered = 0
    for _ in range(200):
        tr = run_square(tower_instance(rng))
        uncovered += len(tr.uncovered())
        assert validate_trace(tr).ok
    assert uncovered > 0


def test_chain_traces_have_disjoint_roots():
    rng = random.Random(14)
    pairs = uncovered = 0
    for _ in range(40):
        tr = run_square(chain_instance(rng))
        rep = validate_trace(tr)
        assert rep.ok, rep.failures
        uncovered += len(tr.uncovered())
        pairs += rep.counts.get("roots_disjoint", 0)
    assert uncovered >= 20 and pairs > 0


def test_opt_lower_bounds_from_ball_families():
    rng = random.Random(13)
    for _ in range(60):
        reqs = random_instance(rng, 16, 8)
        tr = run_square(reqs)
        opt = opt_dmcd(reqs).cost
        assert opt >= sum(tr.steps[i].radius for i in tr.covered())
        assert opt >= sum(tr.steps[i].radius for i in tr.roots())
        assert tr.cost - spine_cost(tr) <= 14 * tr.radius_sum
