"""Asymmetric TSP formulation of idle-cycle minimisation.

Nodes are layers and the weight of ``a -> b`` is the idle count of decoding
``b`` right after ``a``; a minimum Hamiltonian cycle is a minimum-idle
schedule. The constrained graph additionally forces layers to be visited in
ascending ``(degree, puncture count)`` group order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .idle import idle_matrix
from .ldpc import LayerStats

PLAIN = "plain"
CONSTRAINED = "constrained"

EXACT_MAX_NODES = 16
STALL_KICKS = 200
_INF = np.int64(1) << 60


class InfeasibleTourError(RuntimeError):
    """No tour avoiding forbidden edges was found."""


@dataclass(frozen=True, eq=False)
class GroupLabeling:
    """Layers grouped by identical ``(degree, punctures)``; labels run 1..P."""

    labels: np.ndarray
    keys: tuple[tuple[int, int], ...]

    @property
    def num_groups(self) -> int:
        return len(self.keys)

    def groups(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.labels == g) for g in range(1, self.num_groups + 1)]


@dataclass(frozen=True, eq=False)
class IdleGraph:
    weight: np.ndarray
    mode: str = PLAIN
    big_m: int | None = None
    h: int = 0
    labels: np.ndarray | None = None
    num_groups: int = 1

    @property
    def size(self) -> int:
        return self.weight.shape[0]

    @property
    def has_wrap(self) -> bool:
        """True when a single label-P -> label-1 wrap edge is mandatory."""
        return self.mode == CONSTRAINED and self.num_groups > 1

    def is_wrap_edge(self, a: int, b: int) -> bool:
        return self.has_wrap and self.labels[a] == self.num_groups and self.labels[b] == 1


@dataclass(frozen=True, eq=False)
class Tour:
    cycle: np.ndarray
    weight: int

    def __repr__(self):
        return f"Tour(cycle={self.cycle.tolist()}, weight={self.weight})"


def default_sentinels(m: int, t: int) -> tuple[int, int]:
    """``(big_m, h)`` large enough that no tour prefers a forbidden or second wrap edge."""
    h = m * (t + 1) + 1
    return 1000 * (m * (t + 1) + h), h


def build_plain_graph(stats: LayerStats, t: int) -> IdleGraph:
    m = stats.size
    if m < 2:
        raise ValueError("need at least two layers to build a tour graph")
    w = idle_matrix(stats, t)
    np.fill_diagonal(w, 0)
    w.setflags(write=False)
    return IdleGraph(w, PLAIN)


def group_labels(stats: LayerStats) -> GroupLabeling:
    pairs = list(zip(stats.degrees.tolist(), stats.punctures.tolist()))
    keys = tuple(sorted(set(pairs)))
    rank = {key: i + 1 for i, key in enumerate(keys)}
    labels = np.array([rank[p] for p in pairs], dtype=np.int64)
    labels.setflags(write=False)
    return GroupLabeling(labels, keys)


def build_constrained_graph(
    stats: LayerStats,
    t: int,
    labeling: GroupLabeling | None = None,
    big_m: int | None = None,
    h: int | None = None,
) -> IdleGraph:
    """Forbid every edge except same-group, next-group and last-to-first-group.

    Last-to-first edges carry an extra ``h`` so that exactly one of them is
    used. With a single group there is nothing to order, so no edge is
    forbidden or penalised.
    """
    m = stats.size
    if m < 2:
        raise ValueError("need at least two layers to build a tour graph")
    if labeling is None:
        labeling = group_labels(stats)
    default_big_m, default_h = default_sentinels(m, t)
    big_m = default_big_m if big_m is None else int(big_m)
    h = default_h if h is None else int(h)
    bound = m * (t + 1)
    if h <= bound:
        raise ValueError(f"wrap penalty h={h} must exceed m*(t+1)={bound}")
    if big_m <= bound + h:
        raise ValueError(f"big_m={big_m} must exceed m*(t+1)+h={bound + h}")

    p = labeling.num_groups
    la = labeling.labels[:, None]
    lb = labeling.labels[None, :]
    w = idle_matrix(stats, t)
    if p > 1:
        wrap = (la == p) & (lb == 1)
        allowed = (lb == la + 1) | (lb == la) | wrap
        w = np.where(allowed, w + np.where(wrap, h, 0), big_m)
    np.fill_diagonal(w, 0)
    w.setflags(write=False)
    return IdleGraph(w, CONSTRAINED, big_m=big_m, h=h, labels=labeling.labels, num_groups=p)


def tour_weight(weight: np.ndarray, cycle) -> int:
    cycle = np.asarray(cycle)
    return int(weight[cycle, np.roll(cycle, -1)].sum())


def _canonical(cycle) -> np.ndarray:
    cycle = np.asarray(cycle, dtype=np.int64)
    return np.roll(cycle, -int(np.argmin(cycle)))


def held_karp(weight: np.ndarray) -> tuple[np.ndarray, int]:
    """Minimum Hamiltonian cycle by dynamic programming over subsets.

    The cycle starts at node 0; among equal-cost predecessors the lowest
    index wins, so the result is deterministic.
    """
    w = np.asarray(weight, dtype=np.int64)
    n = w.shape[0]
    if n < 2:
        raise ValueError("need at least two nodes")
    if n > EXACT_MAX_NODES:
        raise ValueError(f"exact solver is limited to {EXACT_MAX_NODES} nodes, got {n}")
    k = n - 1  # nodes 1..n-1 live at bit positions 0..k-1
    inner = w[1:, 1:]
    full = (1 << k) - 1
    dp = np.full((1 << k, k), _INF, dtype=np.int64)
    parent = np.full((1 << k, k), -1, dtype=np.int8)
    for j in range(k):
        dp[1 << j, j] = w[0, j + 1]

    masks = np.arange(1 << k)
    popcount = np.zeros(1 << k, dtype=np.int64)
    for j in range(k):
        popcount += (masks >> j) & 1
    for level in range(2, k + 1):
        level_masks = masks[popcount == level]
        for j in range(k):
            sel = level_masks[(level_masks >> j) & 1 == 1]
            prev = sel ^ (1 << j)
            cand = dp[prev] + inner[:, j][None, :]
            best = np.argmin(cand, axis=1)
            dp[sel, j] = cand[np.arange(len(sel)), best]
            parent[sel, j] = best

    closing = dp[full] + w[1:, 0]
    last = int(np.argmin(closing))
    cost = int(closing[last])
    path = []
    mask = full
    j = last
    while j >= 0:
        path.append(j + 1)
        pj = int(parent[mask, j])
        mask ^= 1 << j
        j = pj
    cycle = np.array([0] + path[::-1], dtype=np.int64)
    return cycle, cost


def solve_exact(g: IdleGraph) -> Tour:
    cycle, cost = held_karp(g.weight)
    return Tour(_canonical(cycle), cost)


# -- heuristic ---------------------------------------------------------------

def _swap_segments(tour: np.ndarray, i: int, j: int, k: int) -> np.ndarray:
    # [..i] [i+1..j] [j+1..k] [k+1..]  ->  [..i] [j+1..k] [i+1..j] [k+1..]
    return np.concatenate((tour[:i + 1], tour[j + 1:k + 1], tour[i + 1:j + 1], tour[k + 1:]))


class _Neighbourhood:
    """Directed 3-opt moves that exchange two adjacent segments without reversal.

    Or-opt relocation of a segment is the special case where one of the two
    segments is short. All ``C(n, 3)`` moves are evaluated at once.
    """

    def __init__(self, weight: np.ndarray):
        self.w = weight
        n = weight.shape[0]
        i, j, k = np.ogrid[:n, :n, :n]
        self.valid = (i < j) & (j < k)
        self.ijk = (i, j, k)
        self.moves_per_scan = n * (n - 1) * (n - 2) // 6

    def best_move(self, tour: np.ndarray):
        w = self.w
        i, j, k = self.ijk
        nxt = np.roll(tour, -1)
        cut = w[tour, nxt]
        delta = (
            w[tour[i], nxt[j]] + w[tour[k], nxt[i]] + w[tour[j], nxt[k]]
            - cut[i] - cut[j] - cut[k]
        )
        delta = np.where(self.valid, delta, 0)
        flat = int(np.argmin(delta))
        return int(delta.flat[flat]), np.unravel_index(flat, delta.shape)


def _local_search(nb: _Neighbourhood, tour: np.ndarray, budget: list[int]) -> np.ndarray:
    if len(tour) < 3:
        return tour
    while budget[0] > 0:
        budget[0] -= nb.moves_per_scan
        gain, (i, j, k) = nb.best_move(tour)
        if gain >= 0:
            break
        tour = _swap_segments(tour, int(i), int(j), int(k))
    return tour


def _kick(tour: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    n = len(tour)
    for _ in range(2):
        i, j, k = np.sort(rng.choice(n - 1, size=3, replace=False))
        tour = _swap_segments(tour, int(i), int(j), int(k))
    return tour


def _nearest_neighbour(w: np.ndarray, start: int, rng: np.random.Generator) -> np.ndarray:
    n = w.shape[0]
    visited = np.zeros(n, dtype=bool)
    tour = [start]
    visited[start] = True
    for _ in range(n - 1):
        row = np.where(visited, _INF, w[tour[-1]])
        ties = np.flatnonzero(row == row.min())
        nxt = int(ties[rng.integers(len(ties))]) if len(ties) > 1 else int(ties[0])
        tour.append(nxt)
        visited[nxt] = True
    return np.array(tour, dtype=np.int64)


def _group_order_tour(g: IdleGraph, rng: np.random.Generator) -> np.ndarray:
    """Groups in label order, nearest neighbour inside each group; always feasible."""
    w = g.weight
    tour: list[int] = []
    for label in range(1, g.num_groups + 1):
        members = [int(v) for v in np.flatnonzero(g.labels == label)]
        if tour:
            prev = tour[-1]
            cur = min(members, key=lambda v: (w[prev, v], v))
        else:
            cur = members[int(rng.integers(len(members)))]
        members.remove(cur)
        tour.append(cur)
        while members:
            cur = min(members, key=lambda v: (w[tour[-1], v], v))
            members.remove(cur)
            tour.append(cur)
    return np.array(tour, dtype=np.int64)


def _restart(g: IdleGraph, nb: _Neighbourhood, index: int, seed: int, budget: int):
    rng = np.random.default_rng(seed + index)
    w = g.weight
    n = g.size
    if g.has_wrap and index == 0:
        tour = _group_order_tour(g, rng)
    else:
        tour = _nearest_neighbour(w, index % n, rng)
    left = [budget]
    tour = _local_search(nb, tour, left)
    cost = tour_weight(w, tour)
    # small graphs exhaust their neighbourhood long before the budget runs out
    stall = 0
    while left[0] > 0 and n >= 4 and cost > 0 and stall < STALL_KICKS:
        cand = _local_search(nb, _kick(tour, rng), left)
        cand_cost = tour_weight(w, cand)
        stall = 0 if cand_cost < cost else stall + 1
        if cand_cost <= cost:
            tour, cost = cand, cand_cost
    return cost, index, tour


def solve_heuristic(
    g: IdleGraph,
    seed: int = 0,
    restarts: int = 64,
    budget: int = 200_000,
    threads: int = 1,
) -> Tour:
    """Multi-start greedy construction plus iterated segment-exchange local search.

    ``budget`` caps move evaluations per restart. Restart ``r`` uses
    ``seed + r`` for its random stream and the best tour wins, ties going to
    the lower restart index, so the result does not depend on ``threads``.
    """
    if g.size < 2:
        raise ValueError("need at least two nodes")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    nb = _Neighbourhood(np.asarray(g.weight, dtype=np.int64))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda r: _restart(g, nb, r, seed, budget), range(restarts)))
    else:
        results = [_restart(g, nb, r, seed, budget) for r in range(restarts)]
    cost, _, tour = min(results, key=lambda item: (item[0], item[1]))
    if g.big_m is not None and g.mode == CONSTRAINED and g.num_groups > 1:
        if not is_feasible(g, tour):
            raise InfeasibleTourError("no tour avoiding forbidden edges was found")
    return Tour(_canonical(tour), int(cost))


def solve(g: IdleGraph, seed: int = 0, restarts: int = 64, budget: int = 200_000, threads: int = 1) -> Tour:
    """Exact for small graphs, heuristic otherwise."""
    if g.size <= EXACT_MAX_NODES:
        return solve_exact(g)
    return solve_heuristic(g, seed=seed, restarts=restarts, budget=budget, threads=threads)


def is_feasible(g: IdleGraph, cycle) -> bool:
    if g.big_m is None or not g.has_wrap:
        return True
    cycle = np.asarray(cycle)
    return bool((g.weight[cycle, np.roll(cycle, -1)] < g.big_m).all())


def wrap_edges(g: IdleGraph, cycle) -> list[tuple[int, int]]:
    cycle = [int(v) for v in cycle]
    pairs = zip(cycle, cycle[1:] + cycle[:1])
    return [(a, b) for a, b in pairs if g.is_wrap_edge(a, b)]


def tour_to_schedule(tour: Tour, g: IdleGraph) -> np.ndarray:
    """Cut a tour into a layer order.

    With a group constraint the cut is the single last-to-first-group edge,
    so the schedule starts in group 1. Otherwise the cheapest edge is cut,
    leaving the smallest possible wrap term; ties go to the lowest-indexed
    first layer.
    """
    cycle = np.asarray(tour.cycle, dtype=np.int64)
    n = len(cycle)
    if sorted(cycle.tolist()) != list(range(g.size)):
        raise ValueError("tour does not visit every node exactly once")
    if not is_feasible(g, cycle):
        raise InfeasibleTourError("tour uses a forbidden edge")
    nxt = np.roll(cycle, -1)
    if g.has_wrap:
        wraps = [i for i in range(n) if g.is_wrap_edge(int(cycle[i]), int(nxt[i]))]
        if len(wraps) != 1:
            raise InfeasibleTourError(
                f"tour has {len(wraps)} wrap edges; expected exactly one (check h)"
            )
        cut = wraps[0]
    else:
        edge_w = g.weight[cycle, nxt]
        cands = np.flatnonzero(edge_w == edge_w.min())
        cut = int(min(cands, key=lambda i: nxt[i]))
    return np.roll(cycle, -(cut + 1))


# -- asymmetric to symmetric ----------------------------------------------------

@dataclass(frozen=True, eq=False)
class SymmetricTSP:
    """Node-doubled symmetric instance of an asymmetric graph.

    Node ``i`` is the entry copy and ``m + i`` the exit copy of original node
    ``i``. An optimal symmetric tour weighs ``asymmetric optimum + offset``.
    """

    weight: np.ndarray
    offset: int
    m: int


def atsp_to_stsp(g: IdleGraph | np.ndarray) -> SymmetricTSP:
    w = np.asarray(g.weight if isinstance(g, IdleGraph) else g, dtype=np.int64)
    m = w.shape[0]
    off_diag = w[~np.eye(m, dtype=bool)]
    max_w = int(off_diag.max()) if off_diag.size else 0
    # every cross edge costs at least big, so skipping a mandatory in/out edge never pays
    big = m * max_w + 1
    inf = 2 * m * (big + max_w) + 1
    d = np.full((2 * m, 2 * m), inf, dtype=np.int64)
    ids = np.arange(m)
    d[ids, m + ids] = 0
    d[m + ids, ids] = 0
    cross = w + big
    for i in range(m):
        for j in range(m):
            if i != j:
                d[m + i, j] = cross[i, j]
                d[j, m + i] = cross[i, j]
    np.fill_diagonal(d, 0)
    return SymmetricTSP(d, m * big, m)


def atsp_tour_to_stsp(cycle, m: int) -> np.ndarray:
    return np.array([v for c in cycle for v in (int(c), m + int(c))], dtype=np.int64)


def stsp_tour_to_atsp(cycle, m: int) -> np.ndarray:
    """Recover the asymmetric tour; raises if the cycle skips a mandatory in/out edge."""
    cyc = [int(v) for v in cycle]
    if len(cyc) != 2 * m:
        raise ValueError(f"expected {2 * m} nodes, got {len(cyc)}")
    start = cyc.index(0)
    cyc = cyc[start:] + cyc[:start]
    if cyc[1] != m:
        cyc = [cyc[0]] + cyc[1:][::-1]
    entries = cyc[0::2]
    exits = cyc[1::2]
    if any(e >= m for e in entries) or [x - m for x in exits] != entries:
        raise ValueError("symmetric tour does not pair every entry with its exit copy")
    return np.array(entries, dtype=np.int64)
