import numpy as np
import pytest

from helpers import brute_force_tour, random_stats
from qcsched.idle import n_idle_cyclic
from qcsched.ldpc import LayerStats
from qcsched.tsp import (
    CONSTRAINED,
    IdleGraph,
    InfeasibleTourError,
    Tour,
    atsp_to_stsp,
    atsp_tour_to_stsp,
    build_constrained_graph,
    build_plain_graph,
    default_sentinels,
    group_labels,
    held_karp,
    solve_exact,
    solve_heuristic,
    stsp_tour_to_atsp,
    tour_to_schedule,
    tour_weight,
    wrap_edges,
)


def two_layer_stats():
    # degrees 3 and 5 sharing all 3 columns of the first layer
    return LayerStats(np.array([3, 5]), np.zeros(2, int), np.array([[3, 3], [3, 5]]))


def test_plain_graph_toy4(toy4_stats):
    g = build_plain_graph(toy4_stats, 3)
    assert g.weight[0, 1] == 1 and g.weight[0, 2] == 0
    assert np.array_equal(g.weight, g.weight.T)


def test_plain_graph_zero_latency(toy4_stats):
    assert not build_plain_graph(toy4_stats, 0).weight.any()


def test_plain_graph_asymmetric():
    g = build_plain_graph(two_layer_stats(), 4)
    assert g.weight[0, 1] == 2
    assert g.weight[1, 0] == 4


def test_plain_graph_needs_two_layers():
    with pytest.raises(ValueError):
        build_plain_graph(LayerStats(np.array([3]), np.array([0]), np.array([[3]])), 2)


def test_group_labels_strict_order():
    stats = LayerStats(np.array([3, 3, 5]), np.array([0, 1, 0]), np.diag([3, 3, 5]))
    lab = group_labels(stats)
    assert lab.labels.tolist() == [1, 2, 3] and lab.num_groups == 3


def test_group_labels_toy4(toy4_stats):
    lab = group_labels(toy4_stats)
    assert lab.num_groups == 2
    assert [g.tolist() for g in lab.groups()] == [[1, 2], [0, 3]]


def test_group_labels_single_group():
    stats = LayerStats(np.array([4, 4]), np.array([1, 1]), np.array([[4, 1], [1, 4]]))
    lab = group_labels(stats)
    assert lab.num_groups == 1 and lab.labels.tolist() == [1, 1]


def test_constrained_graph_toy4(toy4_stats):
    g = build_constrained_graph(toy4_stats, 3)
    big_m, h = default_sentinels(4, 3)
    assert (g.big_m, g.h) == (big_m, h)
    assert g.weight[1, 0] == 1  # label 1 -> label 2
    assert g.weight[0, 1] == 1 + h  # label 2 -> label 1 wrap
    assert g.weight[0, 3] == 1  # same group
    assert g.weight[1, 2] == 1
    assert (g.weight < big_m).all()


def test_constrained_graph_forbids_skips():
    stats = LayerStats(np.array([3, 4, 5]), np.zeros(3, int), np.diag([3, 4, 5]))
    g = build_constrained_graph(stats, 2)
    assert g.weight[0, 2] == g.big_m
    assert g.weight[2, 1] == g.big_m
    assert g.weight[2, 0] == g.h  # no overlap, so only the wrap penalty


def test_constrained_single_group_equals_plain():
    stats = LayerStats(np.array([4, 4, 4]), np.zeros(3, int), np.array([[4, 2, 1], [2, 4, 0], [1, 0, 4]]))
    g = build_constrained_graph(stats, 3)
    assert g.mode == CONSTRAINED and not g.has_wrap
    assert np.array_equal(g.weight, build_plain_graph(stats, 3).weight)


def test_constrained_rejects_small_sentinels(toy4_stats):
    with pytest.raises(ValueError, match="h="):
        build_constrained_graph(toy4_stats, 3, h=16)
    with pytest.raises(ValueError, match="big_m"):
        build_constrained_graph(toy4_stats, 3, big_m=33, h=17)


def test_solve_exact_toy4(toy4_stats):
    tour = solve_exact(build_plain_graph(toy4_stats, 3))
    assert tour.weight == 2
    assert tour_weight(build_plain_graph(toy4_stats, 3).weight, tour.cycle) == 2


def test_solve_exact_toy4_constrained(toy4_stats):
    g = build_constrained_graph(toy4_stats, 3)
    tour = solve_exact(g)
    assert tour.weight == 2 + g.h
    assert len(wrap_edges(g, tour.cycle)) == 1


def test_solve_exact_two_nodes():
    w = np.array([[0, 5], [7, 0]])
    tour = solve_exact(IdleGraph(w))
    assert tour.weight == 12


def test_solve_exact_size_limit():
    with pytest.raises(ValueError):
        held_karp(np.zeros((17, 17), dtype=int))


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 7, 8])
def test_held_karp_matches_brute_force(n):
    rng = np.random.default_rng(n)
    for _ in range(5):
        w = rng.integers(0, 20, size=(n, n))
        cycle, cost = held_karp(w)
        assert cost == brute_force_tour(w)
        assert sorted(cycle.tolist()) == list(range(n))
        assert tour_weight(w, cycle) == cost


def test_heuristic_toy4(toy4_stats):
    tour = solve_heuristic(build_plain_graph(toy4_stats, 3), seed=1)
    assert tour.weight == 2


def test_heuristic_all_zero():
    tour = solve_heuristic(IdleGraph(np.zeros((9, 9), dtype=int)), restarts=2)
    assert tour.weight == 0


def test_heuristic_reproducible_and_thread_invariant():
    rng = np.random.default_rng(3)
    stats = random_stats(rng, 20)
    g = build_plain_graph(stats, 5)
    a = solve_heuristic(g, seed=7, restarts=8)
    b = solve_heuristic(g, seed=7, restarts=8, threads=4)
    assert a.weight == b.weight and np.array_equal(a.cycle, b.cycle)


@pytest.mark.parametrize("mode", ["plain", "constrained"])
def test_heuristic_matches_exact_small(mode):
    rng = np.random.default_rng(11)
    for _ in range(10):
        m = int(rng.integers(3, 11))
        stats = random_stats(rng, m)
        t = int(rng.integers(1, 8))
        g = build_plain_graph(stats, t) if mode == "plain" else build_constrained_graph(stats, t)
        exact = solve_exact(g)
        heur = solve_heuristic(g, seed=0, restarts=8)
        assert heur.weight >= exact.weight
        assert heur.weight == exact.weight


def test_tour_to_schedule_constrained_toy4(toy4_stats):
    g = build_constrained_graph(toy4_stats, 3)
    order = tour_to_schedule(Tour(np.array([1, 2, 0, 3]), 2 + g.h), g)
    assert order.tolist() == [1, 2, 0, 3]
    assert g.labels[order].tolist() == [1, 1, 2, 2]


def test_tour_to_schedule_plain_cuts_cheapest_edge():
    w = np.array([[0, 3, 9, 9], [9, 0, 0, 9], [9, 9, 0, 2], [4, 9, 9, 0]])
    g = IdleGraph(w)
    order = tour_to_schedule(Tour(np.array([0, 1, 2, 3]), 9), g)
    assert order.tolist() == [2, 3, 0, 1]  # cut 1 -> 2, the zero-weight edge


def test_tour_to_schedule_rejects_double_wrap():
    stats = LayerStats(np.array([3, 3, 5, 5]), np.zeros(4, int), np.diag([3, 3, 5, 5]))
    g = build_constrained_graph(stats, 2)
    with pytest.raises(InfeasibleTourError, match="wrap"):
        tour_to_schedule(Tour(np.array([0, 2, 1, 3]), 0), g)
    with pytest.raises(InfeasibleTourError, match="forbidden"):
        stats3 = LayerStats(np.array([3, 4, 5]), np.zeros(3, int), np.diag([3, 4, 5]))
        g3 = build_constrained_graph(stats3, 2)
        tour_to_schedule(Tour(np.array([0, 2, 1]), 0), g3)


def test_schedule_rescore_matches_tour_weight():
    rng = np.random.default_rng(5)
    for _ in range(20):
        stats = random_stats(rng, int(rng.integers(2, 10)))
        t = int(rng.integers(0, 9))
        for g in (build_plain_graph(stats, t), build_constrained_graph(stats, t)):
            tour = solve_exact(g)
            order = tour_to_schedule(tour, g)
            penalty = g.h if g.has_wrap else 0
            assert n_idle_cyclic(stats, t, order) == tour.weight - penalty
            if g.mode == CONSTRAINED:
                labels = g.labels[order]
                assert (np.diff(labels) >= 0).all()


def test_stsp_two_nodes_enumeration():
    w = np.array([[0, 3], [8, 0]])
    sym = atsp_to_stsp(w)
    assert np.array_equal(sym.weight, sym.weight.T)
    assert brute_force_tour(sym.weight) - sym.offset == 11


def test_stsp_symmetric_input_lossless():
    rng = np.random.default_rng(2)
    a = rng.integers(0, 9, size=(5, 5))
    w = a + a.T
    sym = atsp_to_stsp(w)
    cycle, cost = held_karp(sym.weight)
    assert cost - sym.offset == held_karp(w)[1]
    back = stsp_tour_to_atsp(cycle, 5)
    assert tour_weight(w, back) == cost - sym.offset


def test_stsp_toy4(toy4_stats):
    g = build_plain_graph(toy4_stats, 3)
    sym = atsp_to_stsp(g)
    cycle, cost = held_karp(sym.weight)
    assert cost - sym.offset == 2
    assert tour_weight(g.weight, stsp_tour_to_atsp(cycle, 4)) == 2


def test_stsp_tour_mapping_both_directions():
    m = 5
    cycle = np.array([2, 0, 4, 1, 3])
    sym_cycle = atsp_tour_to_stsp(cycle, m)
    back = stsp_tour_to_atsp(sym_cycle, m)
    assert np.array_equal(np.roll(back, -int(np.argmax(back == 2))), cycle)
    assert np.array_equal(stsp_tour_to_atsp(sym_cycle[::-1], m), back)
    with pytest.raises(ValueError):
        stsp_tour_to_atsp(np.array([0, 1, 5, 6, 2, 7, 3, 8, 4, 9]), m)
