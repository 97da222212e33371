"""Shared oracles and random instance generators for the test suite."""

import itertools

import numpy as np

from qcsched.ldpc import LayerStats


def brute_force_tour(weight):
    """Minimum Hamiltonian cycle weight by enumerating every order that starts at node 0."""
    w = np.asarray(weight)
    n = w.shape[0]
    best = None
    for rest in itertools.permutations(range(1, n)):
        cycle = (0,) + rest
        cost = sum(int(w[cycle[i - 1], cycle[i]]) for i in range(n))
        if best is None or cost < best:
            best = cost
    return best


def random_stats(rng, m, n_cols=24, dmin=3, dmax=8, n_punct=2):
    """Layer statistics of a random code; the first ``n_punct`` columns are punctured."""
    mask = np.zeros((m, n_cols), dtype=np.int64)
    for r in range(m):
        d = int(rng.integers(dmin, dmax + 1))
        mask[r, rng.choice(n_cols, size=d, replace=False)] = 1
    return LayerStats(mask.sum(axis=1), mask[:, :n_punct].sum(axis=1), mask @ mask.T)


def _popcount(x):
    bits = np.unpackbits(x.astype(">u2").view(np.uint8).reshape(-1, 2), axis=1)
    return bits.sum(axis=1, dtype=np.int64)


def brute_expected_idle(n_cols, d_i, d_j, t):
    """Average idle count over every pair of ``d_i``- and ``d_j``-subsets of ``n_cols`` columns."""
    if n_cols > 16:
        raise ValueError("bitmask oracle supports n_cols <= 16")
    masks = np.arange(1 << n_cols, dtype=np.uint32)
    pop = _popcount(masks)
    a = masks[pop == d_i]
    b = masks[pop == d_j]
    overlap = _popcount((a[:, None] & b[None, :]).ravel())
    return float(np.maximum(t - (d_j - overlap), 0).mean())
