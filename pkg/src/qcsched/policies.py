"""Named scheduling policies."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .idle import n_idle_cyclic, read_schedule, validate_schedule
from .ldpc import LayerStats
from . import tsp

NATURAL = "natural"
LD = "ld"
IDLE = "idle"
IDLE_PERFORMANCE = "idle-performance"
EXTERNAL = "file"

POLICY_KINDS = (NATURAL, LD, IDLE, IDLE_PERFORMANCE)


@dataclass(frozen=True)
class SolverParams:
    seed: int = 0
    restarts: int = 64
    budget: int = 200_000
    threads: int = 1


@dataclass(frozen=True)
class PolicySpec:
    kind: str
    path: Path | None = None
    solver: SolverParams = SolverParams()

    @classmethod
    def parse(cls, text: str, solver: SolverParams = SolverParams()) -> PolicySpec:
        """Accept ``natural|ld|idle|idle-performance|file:<path>``."""
        if text.startswith(EXTERNAL + ":"):
            path = text[len(EXTERNAL) + 1:]
            if not path:
                raise ValueError("file policy needs a path")
            return cls(EXTERNAL, Path(path), solver)
        if text not in POLICY_KINDS:
            raise ValueError(f"unknown policy {text!r}; expected one of {POLICY_KINDS} or file:<path>")
        return cls(text, None, solver)

    def __str__(self):
        return f"{EXTERNAL}:{self.path}" if self.kind == EXTERNAL else self.kind


def schedule_natural(m: int) -> np.ndarray:
    if m < 1:
        raise ValueError("code must have at least one layer")
    return np.arange(m, dtype=np.int64)


def schedule_ld(stats: LayerStats) -> np.ndarray:
    """Layers by ascending degree, ties by index."""
    return np.argsort(stats.degrees, kind="stable").astype(np.int64)


def schedule_idle(stats: LayerStats, t: int, params: SolverParams = SolverParams()):
    """Minimum-idle schedule of the unconstrained tour graph; returns ``(order, n_idle)``."""
    if stats.size == 1:
        return schedule_natural(1), 0
    g = tsp.build_plain_graph(stats, t)
    tour = tsp.solve(g, **vars(params))
    order = tsp.tour_to_schedule(tour, g)
    return order, n_idle_cyclic(stats, t, order)


def schedule_idle_performance(stats: LayerStats, t: int, params: SolverParams = SolverParams()):
    """Minimum-idle schedule among those in ascending ``(degree, punctures)`` group order."""
    if stats.size == 1:
        return schedule_natural(1), 0
    g = tsp.build_constrained_graph(stats, t)
    tour = tsp.solve(g, **vars(params))
    order = tsp.tour_to_schedule(tour, g)
    return order, n_idle_cyclic(stats, t, order)


def make_schedule(spec: PolicySpec, stats: LayerStats, t: int = 0) -> np.ndarray:
    if spec.kind == NATURAL:
        return schedule_natural(stats.size)
    if spec.kind == LD:
        return schedule_ld(stats)
    if spec.kind == IDLE:
        return schedule_idle(stats, t, spec.solver)[0]
    if spec.kind == IDLE_PERFORMANCE:
        return schedule_idle_performance(stats, t, spec.solver)[0]
    if spec.kind == EXTERNAL:
        return read_schedule(spec.path, stats.size)
    raise ValueError(f"unknown policy kind {spec.kind!r}")


def satisfies_group_order(stats: LayerStats, order) -> bool:
    """Degrees nondecreasing, and punctures nondecreasing within equal-degree runs."""
    order = validate_schedule(order, stats.size)
    keys = list(zip(stats.degrees[order].tolist(), stats.punctures[order].tolist()))
    return all(a <= b for a, b in zip(keys, keys[1:]))
