"""Pipeline idle cycles of layer schedules."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .ldpc import LayerStats


class ScheduleError(ValueError):
    """Schedule is not a permutation of the code's layers."""


def validate_schedule(order, num_layers: int) -> np.ndarray:
    """Return ``order`` as an int array, raising unless it is a permutation of ``range(num_layers)``."""
    arr = np.asarray(order, dtype=np.int64).ravel()
    if len(arr) != num_layers:
        raise ScheduleError(f"schedule has {len(arr)} entries, code has {num_layers} layers")
    if num_layers and (arr.min() < 0 or arr.max() >= num_layers):
        raise ScheduleError(f"schedule index out of range [0, {num_layers})")
    if len(np.unique(arr)) != num_layers:
        seen, dup = set(), None
        for v in arr.tolist():
            if v in seen:
                dup = v
                break
            seen.add(v)
        raise ScheduleError(f"layer {dup} appears more than once")
    return arr


def parse_schedule(text: str) -> list[int]:
    tokens = []
    for line in text.splitlines():
        tokens.extend(line.split("#", 1)[0].split())
    try:
        return [int(tok) for tok in tokens]
    except ValueError as exc:
        raise ScheduleError(f"non-integer schedule entry: {exc}") from None


def read_schedule(path, num_layers: int | None = None) -> np.ndarray:
    order = parse_schedule(Path(path).read_text(encoding="utf-8"))
    if num_layers is None:
        num_layers = len(order)
    return validate_schedule(order, num_layers)


def format_schedule(order, comment: str | None = None) -> str:
    text = " ".join(str(int(v)) for v in order) + "\n"
    if comment:
        text += f"# {comment}\n"
    return text


def idle_matrix(stats: LayerStats, t: int) -> np.ndarray:
    """``W[a, b] = max(t - (d_b - common[a, b]), 0)``; the diagonal is meaningless."""
    if t < 0:
        raise ValueError(f"latency t must be >= 0, got {t}")
    d = stats.degrees.astype(np.int64)
    return np.maximum(t - (d[None, :] - stats.common), 0)


def pair_idle(stats: LayerStats, t: int, src: int, dst: int) -> int:
    """Idle cycles when layer ``dst`` is read right after ``src`` is written."""
    if t < 0:
        raise ValueError(f"latency t must be >= 0, got {t}")
    if src == dst:
        raise ValueError("self-transition is undefined")
    m = stats.size
    if not (0 <= src < m and 0 <= dst < m):
        raise IndexError(f"layer index out of range [0, {m})")
    return max(t - (int(stats.degrees[dst]) - int(stats.common[src, dst])), 0)


def transition_idles(stats: LayerStats, t: int, order) -> np.ndarray:
    """Idle cycles of every cyclic transition; entry ``i`` is ``order[i-1] -> order[i]``.

    Entry 0 is the wrap from the last layer back to the first.
    """
    arr = validate_schedule(order, stats.size)
    if len(arr) < 2:
        return np.zeros(len(arr), dtype=np.int64)
    w = idle_matrix(stats, t)
    return w[np.roll(arr, 1), arr]


def n_idle_cyclic(stats: LayerStats, t: int, order) -> int:
    """Idle cycles per iteration including the iteration-to-iteration wrap."""
    return int(transition_idles(stats, t, order).sum())


def n_idle_linear(stats: LayerStats, t: int, order) -> int:
    """Idle cycles per iteration without the wrap term."""
    return int(transition_idles(stats, t, order)[1:].sum())
