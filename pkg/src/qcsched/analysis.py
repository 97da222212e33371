"""Expected idle cycles between randomly connected layers.

When two layers of degrees ``d_i`` and ``d_j`` pick their columns uniformly
at random among ``N``, their common degree is hypergeometric and the
expected idle count of the transition ``i -> j`` has a closed form whose
leading term decays like ``N ** -(d_j + 1 - t)``. That decay is why
low-degree layers should follow low-degree layers.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .ldpc import LayerStats

DEFAULT_CHUNK = 10_000


@dataclass(frozen=True)
class RandomLayerModel:
    n_cols: int
    d_i: int
    d_j: int
    t: int

    def __post_init__(self):
        if not (1 <= self.d_i <= self.n_cols and 1 <= self.d_j <= self.n_cols):
            raise ValueError(f"degrees must lie in [1, N={self.n_cols}]")
        if self.t < 0:
            raise ValueError("t must be >= 0")


def overlap_pmf(n_cols: int, d_i: int, d_j: int) -> list[Fraction]:
    """Exact distribution of ``|A & B|`` for random subsets of sizes ``d_i`` and ``d_j``."""
    total = math.comb(n_cols, d_j)
    return [
        Fraction(math.comb(d_i, k) * math.comb(n_cols - d_i, d_j - k), total)
        for k in range(min(d_i, d_j) + 1)
    ]


def expected_pair_idle_exact(model: RandomLayerModel) -> Fraction:
    """``E[max(t - (d_j - X), 0)]`` with ``X ~ Hypergeometric(N, d_i, d_j)``, as a rational."""
    pmf = overlap_pmf(model.n_cols, model.d_i, model.d_j)
    lo = max(model.d_j + 1 - model.t, 0)
    return sum(
        (pmf[k] * (k + model.t - model.d_j) for k in range(lo, len(pmf))),
        Fraction(0),
    )


def expected_pair_idle(model: RandomLayerModel) -> float:
    return float(expected_pair_idle_exact(model))


def _random_masks(rng: np.random.Generator, count: int, n_cols: int, degree: int) -> np.ndarray:
    """``count`` uniformly random ``degree``-subsets of ``n_cols`` as boolean rows."""
    keys = rng.random((count, n_cols))
    kth = np.partition(keys, degree - 1, axis=1)[:, degree - 1:degree]
    return keys <= kth


def _chunks(trials: int, chunk: int):
    for index, first in enumerate(range(0, trials, chunk)):
        yield index, min(chunk, trials - first)


def sample_pair_idle(model: RandomLayerModel, trials: int, seed: int = 0, chunk: int = DEFAULT_CHUNK):
    """Monte Carlo estimate of the expected idle count; returns ``(mean, stderr)``.

    Chunk ``c`` draws from ``default_rng([seed, c])``, so results depend only
    on ``(seed, chunk)`` and not on how chunks are distributed.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    total = 0.0
    total_sq = 0.0
    for index, count in _chunks(trials, chunk):
        rng = np.random.default_rng([seed, index])
        a = _random_masks(rng, count, model.n_cols, model.d_i)
        b = _random_masks(rng, count, model.n_cols, model.d_j)
        overlap = (a & b).sum(axis=1)
        idle = np.maximum(model.t - (model.d_j - overlap), 0).astype(float)
        total += idle.sum()
        total_sq += (idle**2).sum()
    mean = float(total / trials)
    var = max(total_sq / trials - mean**2, 0.0)
    stderr = math.sqrt(var / (trials - 1)) if trials > 1 else 0.0
    return mean, stderr


def asymptotic_slope(d_i: int, d_j: int, t: int, n_grid) -> float:
    """Least-squares slope of ``log E`` against ``log N``; tends to ``-(d_j + 1 - t)``."""
    grid = sorted(set(int(n) for n in n_grid))
    if len(grid) < 2:
        raise ValueError("need at least two distinct N values")
    if d_j + 1 - t < 1 or t < 1:
        raise ValueError("slope is defined only for 1 <= t <= d_j")
    values = [expected_pair_idle(RandomLayerModel(n, d_i, d_j, t)) for n in grid]
    if min(values) <= 0:
        raise ValueError("expected idle vanishes on part of the grid")
    slope, _ = np.polyfit(np.log(grid), np.log(values), 1)
    return float(slope)


@dataclass
class OrderComparison:
    degrees: tuple[int, ...]
    n_cols: int
    t: int
    codes: int
    means: dict[str, float]
    stderrs: dict[str, float]
    gap_stderr: dict[str, float]
    hypothesis_holds: bool

    @property
    def pass_flags(self) -> dict[str, bool]:
        asc, rnd, desc = (self.means[k] for k in ("ascending", "random", "descending"))
        return {
            "ascending_le_random": bool(asc - rnd <= 3 * self.gap_stderr["random-ascending"]),
            "random_le_descending": bool(rnd - desc <= 3 * self.gap_stderr["descending-random"]),
            "ascending_lt_descending_5se": bool(desc - asc > 5 * self.gap_stderr["descending-ascending"]),
        }

    def as_dict(self) -> dict:
        return {
            "config": {
                "degrees": list(self.degrees),
                "N": self.n_cols,
                "t": self.t,
                "codes": self.codes,
                "hypothesis_t_le_dmin": self.hypothesis_holds,
            },
            "means": self.means,
            "stderrs": self.stderrs,
            "gap_stderrs": self.gap_stderr,
            "pass_flags": self.pass_flags,
        }


def _linear_idle_batch(common: np.ndarray, degrees: np.ndarray, t: int, orders: np.ndarray) -> np.ndarray:
    """Linear idle count of ``orders[c]`` on code ``c``; ``common`` is ``(codes, L, L)``."""
    rows = np.arange(len(orders))[:, None]
    src = orders[:, :-1]
    dst = orders[:, 1:]
    overlap = common[rows, src, dst]
    return np.maximum(t - (degrees[dst] - overlap), 0).sum(axis=1)


def verify_prop1(
    degrees,
    n_cols: int,
    t: int,
    codes: int,
    seed: int = 0,
    force: bool = False,
    chunk: int = DEFAULT_CHUNK,
) -> OrderComparison:
    """Compare ascending-degree, random and descending-degree orders on random codes.

    Each code draws every layer's columns uniformly at random. The claim
    under test needs ``t <= min(degrees)``; violating it raises unless
    ``force`` is set, in which case a warning is issued.
    """
    degrees = np.asarray(sorted(int(d) for d in degrees), dtype=np.int64)
    if len(degrees) < 2:
        raise ValueError("need at least two layers")
    if degrees.max() > n_cols:
        raise ValueError("layer degree exceeds N")
    holds = t <= int(degrees.min())
    if not holds:
        msg = f"t={t} exceeds the minimum degree {int(degrees.min())}; ordering claim does not apply"
        if not force:
            raise ValueError(msg)
        warnings.warn(msg, stacklevel=2)
    num_layers = len(degrees)
    ascending = np.argsort(degrees, kind="stable")
    descending = np.argsort(-degrees, kind="stable")

    sums = {k: 0.0 for k in ("ascending", "random", "descending")}
    sq = dict(sums)
    gap_sum = {k: 0.0 for k in ("random-ascending", "descending-random", "descending-ascending")}
    gap_sq = dict(gap_sum)
    for index, count in _chunks(codes, chunk):
        rng = np.random.default_rng([seed, index])
        masks = np.stack(
            [_random_masks(rng, count, n_cols, int(d)) for d in degrees], axis=1
        ).astype(np.int32)
        common = np.einsum("cln,ckn->clk", masks, masks)
        random_orders = rng.permuted(np.tile(np.arange(num_layers), (count, 1)), axis=1)
        idle = {
            "ascending": _linear_idle_batch(common, degrees, t, np.tile(ascending, (count, 1))),
            "random": _linear_idle_batch(common, degrees, t, random_orders),
            "descending": _linear_idle_batch(common, degrees, t, np.tile(descending, (count, 1))),
        }
        for k, v in idle.items():
            sums[k] += float(v.sum())
            sq[k] += float((v.astype(float) ** 2).sum())
        for k in gap_sum:
            hi, lo = k.split("-")
            diff = (idle[hi] - idle[lo]).astype(float)
            gap_sum[k] += float(diff.sum())
            gap_sq[k] += float((diff**2).sum())

    def _se(total: float, total_sq: float) -> float:
        mean = total / codes
        var = max(total_sq / codes - mean**2, 0.0)
        return math.sqrt(var / (codes - 1)) if codes > 1 else 0.0

    return OrderComparison(
        degrees=tuple(int(d) for d in degrees),
        n_cols=n_cols,
        t=t,
        codes=codes,
        means={k: sums[k] / codes for k in sums},
        stderrs={k: _se(sums[k], sq[k]) for k in sums},
        gap_stderr={k: _se(gap_sum[k], gap_sq[k]) for k in gap_sum},
        hypothesis_holds=holds,
    )


def expected_idle_matrix(degrees, n_cols: int, t: int) -> np.ndarray:
    """Expected idle count of every ordered pair of layers under the random model."""
    degrees = [int(d) for d in degrees]
    return np.array(
        [[expected_pair_idle(RandomLayerModel(n_cols, di, dj, t)) for dj in degrees] for di in degrees]
    )


def random_layer_stats(degrees, n_cols: int, seed: int = 0) -> LayerStats:
    """One random code of the uniform-connection model as ``LayerStats`` (no punctures)."""
    rng = np.random.default_rng(seed)
    masks = np.stack([_random_masks(rng, 1, n_cols, int(d))[0] for d in degrees]).astype(np.int64)
    return LayerStats(masks.sum(axis=1), np.zeros(len(degrees), dtype=np.int64), masks @ masks.T)

