"""Sum-product belief propagation with flooding and layered schedules.

Both decoders accept one codeword of channel LLRs ``(n,)`` or a batch
``(B, n)``; positive LLR favours bit 0. Messages are stored per layer as
``(B, Z, d)`` arrays aligned with ``LiftedCode.layer_vars``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .idle import validate_schedule
from .ldpc import LiftedCode

DEFAULT_CLIP = 31.75
DEFAULT_MAX_ITERS = 20
ATANH_EPS = 1e-12


@dataclass
class DecodeResult:
    hard_decision: np.ndarray
    converged: np.ndarray
    iterations_used: np.ndarray
    posterior: np.ndarray
    trace: list[tuple[int, int, int]] | None = None


def v2c(m0: float, incoming, clip: float = DEFAULT_CLIP) -> float:
    """Channel LLR plus all other incoming check messages, saturated."""
    total = float(m0) + float(np.sum(np.asarray(incoming, dtype=float)))
    return float(np.clip(total, -clip, clip))


def c2v(incoming, clip: float = DEFAULT_CLIP) -> float:
    """Tanh-rule check message from the other variables' messages."""
    vals = np.asarray(incoming, dtype=float)
    if vals.size == 0:
        raise ValueError("check node needs at least one other neighbour")
    # append a dummy edge and read its extrinsic output
    row = np.concatenate((vals, [0.0]))[None, :]
    return float(check_update(row, clip)[0, -1])


def check_update(v: np.ndarray, clip: float = DEFAULT_CLIP) -> np.ndarray:
    """Extrinsic tanh-rule outputs along the last axis.

    Inputs at the clip level count as certain (``tanh = +-1``); an output whose
    other inputs are all certain is itself saturated to ``+-clip``.
    """
    v = np.clip(v, -clip, clip)
    t = np.tanh(0.5 * v)
    t = np.where(np.abs(v) >= clip, np.sign(v), t)
    d = v.shape[-1]
    ones = np.ones(v.shape[:-1] + (1,))
    # extrinsic product via prefix/suffix products; exact even when some t == 0
    prefix = np.concatenate((ones, np.cumprod(t[..., :-1], axis=-1)), axis=-1)
    suffix = np.concatenate((np.cumprod(t[..., :0:-1], axis=-1)[..., ::-1], ones), axis=-1)
    prod = prefix * suffix
    if d == 1:
        prod = np.zeros_like(t)
    certain = np.abs(prod) >= 1.0
    safe = np.clip(prod, -1.0 + ATANH_EPS, 1.0 - ATANH_EPS)
    out = np.clip(2.0 * np.arctanh(safe), -clip, clip)
    return np.where(certain, np.sign(prod) * clip, out)


def _as_batch(code: LiftedCode, llrs) -> tuple[np.ndarray, bool]:
    arr = np.asarray(llrs, dtype=float)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.ndim != 2 or arr.shape[1] != code.n:
        raise ValueError(f"expected LLRs of length {code.n}, got shape {np.shape(llrs)}")
    if not np.isfinite(arr).all():
        raise ValueError("channel LLRs must be finite")
    return arr, single


def _satisfied(code: LiftedCode, hard: np.ndarray) -> np.ndarray:
    ok = np.ones(hard.shape[0], dtype=bool)
    for block in code.layer_vars:
        ok &= ~np.bitwise_xor.reduce(hard[:, block], axis=-1).any(axis=-1)
    return ok


def _unsatisfied_count(code: LiftedCode, hard: np.ndarray) -> int:
    return int(sum(np.bitwise_xor.reduce(hard[:, block], axis=-1).sum() for block in code.layer_vars))


class _Run:
    """Bookkeeping for a batch where converged rows drop out early."""

    def __init__(self, code: LiftedCode, llrs: np.ndarray, max_iters: int, early_stop: bool):
        if max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        b = llrs.shape[0]
        self.code = code
        self.max_iters = max_iters
        self.early_stop = early_stop
        self.rows = np.arange(b)
        self.hard = np.zeros((b, code.n), dtype=np.uint8)
        self.posterior = llrs.copy()
        self.converged = np.zeros(b, dtype=bool)
        self.iterations = np.full(b, max_iters, dtype=np.int64)

    def finish_iteration(self, it: int, post: np.ndarray, state: list[np.ndarray]):
        """Record converged rows; return the compacted ``(post, state)`` for the rest."""
        hard = (post < 0).astype(np.uint8)
        ok = _satisfied(self.code, hard)
        last = it == self.max_iters
        if last:
            done = np.ones_like(ok)
        else:
            done = ok if self.early_stop else np.zeros_like(ok)
        if not done.any():
            return post, state
        rows = self.rows[done]
        self.hard[rows] = hard[done]
        self.posterior[rows] = post[done]
        self.converged[rows] = ok[done]
        if self.early_stop:
            self.iterations[rows] = it
        keep = ~done
        self.rows = self.rows[keep]
        return post[keep], [c[keep] for c in state]

    def result(self, single: bool, trace=None) -> DecodeResult:
        if single:
            return DecodeResult(self.hard[0], self.converged[0], self.iterations[0], self.posterior[0], trace)
        return DecodeResult(self.hard, self.converged, self.iterations, self.posterior, trace)


def decode_flooding(
    code: LiftedCode,
    channel_llrs,
    max_iters: int = DEFAULT_MAX_ITERS,
    clip: float = DEFAULT_CLIP,
    early_stop: bool = True,
) -> DecodeResult:
    """All checks update simultaneously from the previous iteration's messages."""
    llrs, single = _as_batch(code, channel_llrs)
    run = _Run(code, llrs, max_iters, early_stop)
    m0 = llrs
    c2v_msgs = [np.zeros((llrs.shape[0],) + block.shape) for block in code.layer_vars]
    for it in range(1, max_iters + 1):
        total = m0.copy()
        for block, msg in zip(code.layer_vars, c2v_msgs):
            total[:, block] += msg
        new_msgs = []
        for block, msg in zip(code.layer_vars, c2v_msgs):
            v = np.clip(total[:, block] - msg, -clip, clip)
            new_msgs.append(check_update(v, clip))
        post = m0.copy()
        for block, msg in zip(code.layer_vars, new_msgs):
            post[:, block] += msg
        state = [m0] + new_msgs
        post, state = run.finish_iteration(it, post, state)
        m0, c2v_msgs = state[0], state[1:]
        if not len(run.rows):
            break
    return run.result(single)


def decode_layered(
    code: LiftedCode,
    schedule,
    channel_llrs,
    max_iters: int = DEFAULT_MAX_ITERS,
    clip: float = DEFAULT_CLIP,
    early_stop: bool = True,
    trace: bool = False,
) -> DecodeResult:
    """Layer-by-layer updates on the soft-output (posterior) memory.

    For each layer in ``schedule`` the variable-to-check message is
    ``posterior - old c2v``; the new check messages are added back. All Z
    checks of a layer read the same pre-layer posterior. With ``trace`` the
    result carries ``(iteration, layer, unsatisfied checks)`` rows summed over
    the still-active batch.
    """
    order = validate_schedule(schedule, code.num_layers)
    llrs, single = _as_batch(code, channel_llrs)
    run = _Run(code, llrs, max_iters, early_stop)
    post = llrs.copy()
    c2v_msgs = [np.zeros((llrs.shape[0],) + block.shape) for block in code.layer_vars]
    rows: list[tuple[int, int, int]] | None = [] if trace else None
    for it in range(1, max_iters + 1):
        for layer in order:
            block = code.layer_vars[layer]
            v = post[:, block] - c2v_msgs[layer]
            new = check_update(v, clip)
            # saturate only the message sent to the check; the posterior keeps the exact sum
            post[:, block] = v + new
            c2v_msgs[layer] = new
            if rows is not None:
                rows.append((it, int(layer), _unsatisfied_count(code, (post < 0).astype(np.uint8))))
        post, c2v_msgs = run.finish_iteration(it, post, c2v_msgs)
        if not len(run.rows):
            break
    return run.result(single, rows)


def write_trace_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "layer", "n_unsatisfied_checks"])
        writer.writerows(rows)
