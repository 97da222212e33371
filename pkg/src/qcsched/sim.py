"""Monte Carlo BLER/BER of layered schedules over BPSK/AWGN."""

from __future__ import annotations

import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .decoder import DEFAULT_CLIP, DEFAULT_MAX_ITERS, decode_flooding, decode_layered
from .idle import validate_schedule
from .ldpc import LiftedCode, code_rate

CSV_HEADER = "snr_db,trials,block_errors,bler,ber,mean_iters"


def noise_sigma(snr_db: float, rate: float) -> float:
    """Noise standard deviation for unit-energy BPSK at the given Eb/N0."""
    return math.sqrt(1.0 / (2.0 * rate * 10.0 ** (snr_db / 10.0)))


def awgn_llrs(bits, snr_db: float, rate: float, seed=None, transmitted=None) -> np.ndarray:
    """BPSK over AWGN; bit b maps to 1 - 2b and LLR = 2y / sigma^2.

    Untransmitted positions (``transmitted == False``) get LLR 0.
    """
    if not 0 < rate <= 1:
        raise ValueError(f"rate must lie in (0, 1], got {rate}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    bits = np.asarray(bits, dtype=np.uint8)
    sigma = noise_sigma(snr_db, rate)
    y = 1.0 - 2.0 * bits + sigma * rng.standard_normal(bits.shape)
    llr = 2.0 * y / sigma**2
    if transmitted is not None:
        llr = np.where(transmitted, llr, 0.0)
    return llr


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if trials <= 0:
        return 0.0, 1.0
    p = successes / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def gf2_nullspace(h: np.ndarray) -> np.ndarray:
    """Basis (rows) of the binary null space of ``h``; for small codes only."""
    a = (np.asarray(h, dtype=np.uint8) & 1).copy()
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        hit = np.flatnonzero(a[r:, c]) + r if r < rows else []
        if len(hit) == 0:
            continue
        p = hit[0]
        a[[r, p]] = a[[p, r]]
        for i in np.flatnonzero(a[:, c]):
            if i != r:
                a[i] ^= a[r]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    free = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((len(free), cols), dtype=np.uint8)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for i, p in enumerate(pivots):
            basis[k, p] = a[i, f]
    return basis


@dataclass
class SimConfig:
    code: LiftedCode
    snr_db: tuple[float, ...]
    trials: int
    schedule: np.ndarray | None = None  # None selects the flooding decoder
    max_errors: int | None = 100
    max_iters: int = DEFAULT_MAX_ITERS
    clip: float = DEFAULT_CLIP
    seed: int = 0
    threads: int = 1
    chunk: int = 250
    generator: np.ndarray | None = None  # random codewords instead of all-zero
    label: dict = field(default_factory=dict)

    def __post_init__(self):
        self.snr_db = tuple(float(s) for s in self.snr_db)
        if not self.snr_db:
            raise ValueError("snr grid must be non-empty")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.max_errors is not None and self.max_errors < 1:
            raise ValueError("max_errors must be >= 1")
        if self.chunk < 1 or self.threads < 1:
            raise ValueError("chunk and threads must be >= 1")
        if self.schedule is not None:
            self.schedule = validate_schedule(self.schedule, self.code.num_layers)

    def echo(self) -> dict:
        """JSON-friendly description; deliberately excludes ``threads``."""
        bg = self.code.base
        return {
            "code": {
                "rows": bg.rows,
                "cols": bg.cols,
                "lift": bg.lift,
                "info_cols": bg.info_cols,
                "punct_cols": list(bg.punct_cols),
                "n": self.code.n,
                "k": self.code.k,
                "rate": str(code_rate(bg)),
            },
            "decoder": "flooding" if self.schedule is None else "layered",
            "schedule": None if self.schedule is None else self.schedule.tolist(),
            "snr_db": list(self.snr_db),
            "snr_definition": "Eb/N0, sigma^2 = 1 / (2 R 10^(snr/10))",
            "trials": self.trials,
            "max_errors": self.max_errors,
            "max_iters": self.max_iters,
            "clip": self.clip,
            "seed": self.seed,
            "chunk": self.chunk,
            "codewords": "all-zero" if self.generator is None else "random",
            **self.label,
        }


@dataclass
class SnrPoint:
    snr_db: float
    trials: int
    block_errors: int
    bit_errors: int
    iterations: int
    info_bits: int

    @property
    def bler(self) -> float:
        return self.block_errors / self.trials if self.trials else 0.0

    @property
    def ber(self) -> float:
        return self.bit_errors / (self.trials * self.info_bits) if self.trials else 0.0

    @property
    def mean_iters(self) -> float:
        return self.iterations / self.trials if self.trials else 0.0

    def bler_interval(self) -> tuple[float, float]:
        return wilson_interval(self.block_errors, self.trials)


@dataclass
class SimResult:
    points: list[SnrPoint]
    config: dict
    version: str = __version__

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for p in self.points:
            buf.write(f"{p.snr_db:g},{p.trials},{p.block_errors},{p.bler:.6e},{p.ber:.6e},{p.mean_iters:.4f}\n")
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "version": self.version,
            "config": self.config,
            "points": [
                {
                    "snr_db": p.snr_db,
                    "trials": p.trials,
                    "block_errors": p.block_errors,
                    "bit_errors": p.bit_errors,
                    "bler": p.bler,
                    "ber": p.ber,
                    "mean_iters": p.mean_iters,
                    "bler_wilson95": list(p.bler_interval()),
                }
                for p in self.points
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _run_chunk(cfg: SimConfig, snr_index: int, first: int, count: int):
    code = cfg.code
    rate = float(code_rate(code.base))
    snr = cfg.snr_db[snr_index]
    llrs = np.empty((count, code.n))
    sent = np.zeros((count, code.n), dtype=np.uint8)
    for row in range(count):
        rng = np.random.default_rng([cfg.seed, snr_index, first + row])
        if cfg.generator is not None:
            msg = rng.integers(0, 2, size=cfg.generator.shape[0], dtype=np.uint8)
            sent[row] = (msg @ cfg.generator) & 1
        llrs[row] = awgn_llrs(sent[row], snr, rate, rng, code.transmitted)
    if cfg.schedule is None:
        res = decode_flooding(code, llrs, cfg.max_iters, cfg.clip)
    else:
        res = decode_layered(code, cfg.schedule, llrs, cfg.max_iters, cfg.clip)
    k = code.k
    wrong = res.hard_decision[:, :k] != sent[:, :k]
    return int(wrong.any(axis=1).sum()), int(wrong.sum()), int(res.iterations_used.sum())


def run_bler(cfg: SimConfig) -> SimResult:
    """Decode noisy codewords per SNR point until ``trials`` or ``max_errors``.

    Trials are split into fixed-size chunks and the noise of trial ``i`` at
    SNR index ``s`` comes from ``default_rng([seed, s, i])``. Chunks are
    merged in order and the error stop is checked at chunk boundaries, so
    the result is the same for any ``threads``.
    """
    points = []
    n_chunks = -(-cfg.trials // cfg.chunk)
    pool = ThreadPoolExecutor(max_workers=cfg.threads) if cfg.threads > 1 else None
    try:
        for s, snr in enumerate(cfg.snr_db):
            trials = block = bits = iters = 0
            c = 0
            stop = False
            while c < n_chunks and not stop:
                wave = range(c, min(c + cfg.threads, n_chunks))
                spans = [(i * cfg.chunk, min(cfg.chunk, cfg.trials - i * cfg.chunk)) for i in wave]
                if pool is None:
                    outs = [_run_chunk(cfg, s, a, n) for a, n in spans]
                else:
                    outs = list(pool.map(lambda span: _run_chunk(cfg, s, *span), spans))
                for (_, n), (b, e, it) in zip(spans, outs):
                    trials += n
                    block += b
                    bits += e
                    iters += it
                    if cfg.max_errors is not None and block >= cfg.max_errors:
                        stop = True
                        break
                c += len(spans)
            points.append(SnrPoint(snr, trials, block, bits, iters, cfg.code.k))
    finally:
        if pool is not None:
            pool.shutdown()
    return SimResult(points, cfg.echo())
