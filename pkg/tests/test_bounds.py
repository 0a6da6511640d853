import math

import numpy as np
import pytest

from energame.bounds import (
    BoundId,
    check_path_ordering,
    is_bipartite,
    is_labeled_path,
    path_chain,
    run_all_bounds,
    worst_by_bound,
)
from energame.game import FAIL, PASS, SKIPPED, build_table
from energame.graph import (
    Graph,
    SizeCapError,
    complete,
    complete_bipartite,
    cycle,
    enumerate_labeled_trees,
    induced,
    path,
    star,
)
from energame.spectral import EnergyProfile, energy, p_energy, vertex_energies

from conftest import random_graph

GRID = (1.0, 1.5, 2.0, 3.0)


def by_id(reports, bound_id, **params):
    return [r for r in reports if r.bound_id == bound_id and all(r.params.get(k) == v for k, v in params.items())]


def test_star6_all_applicable_bounds_hold():
    reports = run_all_bounds(star(6), GRID)
    assert reports and all(r.status == PASS for r in reports)
    ids = {r.bound_id for r in reports}
    assert BoundId.BIPARTITE_BOUND in ids and BoundId.EDGE_CUT in ids


def test_star6_closed_forms():
    # spectrum +-sqrt(5): E_p = 2 * 5^(p/2), and m = 5 so the bipartite bound is tight
    reports = run_all_bounds(star(6), GRID)
    for r in by_id(reports, BoundId.BIPARTITE_BOUND):
        assert r.slack == pytest.approx(0, abs=1e-9)
    for r in by_id(reports, BoundId.EDGE_COUNT_BOUND):
        p = r.params["p"]
        e_p, edge_term = 2 * 5 ** (p / 2), 10 ** (p / 2)
        assert abs(r.slack) == pytest.approx(abs(e_p - edge_term), abs=1e-9)


def test_complete5_edge_count_reversal_and_bipartite_skip():
    reports = run_all_bounds(complete(5), [3])
    (edge,) = by_id(reports, BoundId.EDGE_COUNT_BOUND, p=3.0)
    assert edge.status == PASS
    assert edge.slack == pytest.approx(20**1.5 - 68)
    skips = by_id(reports, BoundId.BIPARTITE_BOUND) + by_id(reports, BoundId.BIPARTITE_SPLIT)
    assert skips and all(r.status == SKIPPED and "not bipartite" in r.reason for r in skips)


def test_k2_adjacent_pair_equality():
    (r,) = by_id(run_all_bounds(complete(2), [1]), BoundId.ADJACENT_PAIR)
    assert r.status == PASS and r.slack == pytest.approx(0, abs=1e-12)


def test_random_graphs_all_guaranteed_bounds_hold(rng):
    for _ in range(25):
        g = random_graph(rng, int(rng.integers(2, 11)), rng.random())
        failed = [r for r in run_all_bounds(g, GRID) if r.status == FAIL]
        assert not failed, (g, failed)


def test_edge_cut_against_direct(rng):
    g = random_graph(rng, 7)
    (r,) = by_id(run_all_bounds(g, [1]), BoundId.EDGE_CUT)
    full = (1 << g.n) - 1
    direct = min(energy(g) - energy(induced(g, s)) - energy(induced(g, full ^ s)) for s in range(1, full))
    assert r.slack == pytest.approx(direct, abs=1e-10)


def test_edge_cut_skipped_above_cap():
    reports = run_all_bounds(cycle(13), [1])
    (r,) = by_id(reports, BoundId.EDGE_CUT)
    assert r.status == SKIPPED and "12" in r.reason


def test_subgraph_inequality_witness(rng):
    g = random_graph(rng, 6)
    (r,) = by_id(run_all_bounds(g, [1.5]), BoundId.SUBGRAPH_INEQUALITY)
    e = vertex_energies(g, 1.5).per_vertex
    t = build_table(g, 1.5)
    coalition = r.witness["coalition"]
    assert r.slack == pytest.approx(e[coalition].sum() - t.value(coalition))


def test_vertex_holder_includes_sqrt_degree(rng):
    g = random_graph(rng, 8)
    reports = by_id(run_all_bounds(g, [1]), BoundId.VERTEX_HOLDER, r=1.0, s=2.0)
    assert len(reports) == 1 and reports[0].status == PASS
    assert np.all(vertex_energies(g).per_vertex <= np.sqrt(g.degrees) + 1e-9)


def test_degree_and_adjacent_skipped_on_edgeless():
    reports = run_all_bounds(Graph.from_edges(3, []), [1])
    for bid in (BoundId.DEGREE_BOUND, BoundId.ADJACENT_PAIR):
        (r,) = by_id(reports, bid)
        assert r.status == SKIPPED


def test_input_validation():
    with pytest.raises(SizeCapError):
        run_all_bounds(path(17), [1])
    with pytest.raises(ValueError):
        run_all_bounds(path(4), [0.5])


def test_pure():
    g = cycle(6)
    assert [r.as_dict() for r in run_all_bounds(g, GRID)] == [r.as_dict() for r in run_all_bounds(g, GRID)]


def test_holds_matches_slack(rng):
    for r in run_all_bounds(random_graph(rng, 7), GRID):
        if r.slack is not None:
            assert r.holds == (r.slack >= -1e-8)


def test_worst_by_bound():
    worst = worst_by_bound(run_all_bounds(path(4), GRID))
    assert set(worst) >= {"subgraph-inequality", "schatten-monotonicity", "vertex-holder"}


# -- bipartiteness -------------------------------------------------------------------

def test_is_bipartite_examples():
    assert is_bipartite(star(5)) == ((0,), (1, 2, 3, 4))
    assert is_bipartite(cycle(4)) == ((0, 2), (1, 3))
    assert is_bipartite(complete(3)) is None
    assert is_bipartite(cycle(5)) is None
    left, right = is_bipartite(complete_bipartite(2, 3))
    assert {left, right} == {(0, 1), (2, 3, 4)}


def test_is_bipartite_disconnected():
    g = path(2).disjoint_union(path(3))
    left, right = is_bipartite(g)
    for i, j in g.edges:
        assert (i in left) != (j in left)


# -- path ordering ------------------------------------------------------------------------

def test_path_chain_small():
    assert path_chain(2) == []
    # n = 4: ends are minimal, second vertices maximal, plus v1 < v2 from the k = 0 chain
    chain = path_chain(4)
    assert (0, 1) in chain and (0, 2) in chain and (3, 1) in chain


def test_path_chain_n8_links():
    chain = set(path_chain(8))
    # k = 1 (1-based): v1 < v3 < v4 < v2
    assert {(0, 2), (2, 3), (3, 1)} <= chain


@pytest.mark.parametrize("n", range(3, 13))
def test_path_ordering_holds(n):
    reports = by_id(run_all_bounds(path(n), [1]), BoundId.PATH_ORDERING) + \
        by_id(run_all_bounds(path(n), [1]), BoundId.PATH_ORDERING_STRICT)
    assert len(reports) == 2 and all(r.status == PASS for r in reports)


def test_path_ordering_detects_swap():
    e = vertex_energies(path(6)).per_vertex.copy()
    e[[0, 1]] = e[[1, 0]]
    reports = check_path_ordering(EnergyProfile(1.0, e, float(e.sum())))
    assert all(r.status == FAIL for r in reports)


def test_path_ordering_strict_needs_separation():
    e = vertex_energies(path(5)).per_vertex.copy()
    e[2] = e[0] + 5e-8  # v1 < v3 holds, but only by 5 * tol
    plain, strict = check_path_ordering(EnergyProfile(1.0, e, float(e.sum())))
    assert plain.status == PASS and strict.status == FAIL


def test_is_labeled_path():
    assert is_labeled_path(path(5))
    assert not is_labeled_path(path(5).relabel([1, 0, 2, 3, 4]))
    assert not is_labeled_path(cycle(5))


def test_tree_specialization_direction():
    # among trees the star minimizes E_p for p < 2 and maximizes it for p > 2
    trees = list(enumerate_labeled_trees(6))
    for p, pick in ((1.5, min), (3.0, max)):
        values = [p_energy(t, p) for t in trees]
        assert pick(values) == pytest.approx(p_energy(star(6), p))
    assert math.isclose(p_energy(star(6), 2), p_energy(path(6), 2))
