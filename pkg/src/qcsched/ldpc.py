"""QC-LDPC base graphs, lifting, and per-layer statistics."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from importlib import resources
from pathlib import Path

import numpy as np

EMPTY = -1

# 3GPP TS 38.212 Table 5.3.2-1
NR_LIFTING_SETS = (
    (2, 4, 8, 16, 32, 64, 128, 256),
    (3, 6, 12, 24, 48, 96, 192, 384),
    (5, 10, 20, 40, 80, 160, 320),
    (7, 14, 28, 56, 112, 224),
    (9, 18, 36, 72, 144, 288),
    (11, 22, 44, 88, 176, 352),
    (13, 26, 52, 104, 208),
    (15, 30, 60, 120, 240),
)

NR_DEFAULT_PUNCT = (0, 1)


class BaseGraphError(ValueError):
    """Malformed or inconsistent base graph."""


@dataclass(frozen=True, eq=False)
class BaseGraph:
    """Protograph of circulant shifts.

    ``shifts`` is an ``(rows, cols)`` integer array with ``EMPTY`` (-1) for
    all-zero blocks. Each row lifts to one layer of ``lift`` checks.
    """

    shifts: np.ndarray
    lift: int
    info_cols: int
    punct_cols: tuple[int, ...] = NR_DEFAULT_PUNCT

    def __post_init__(self):
        shifts = np.array(self.shifts, dtype=np.int64)
        if shifts.ndim != 2 or shifts.size == 0:
            raise BaseGraphError("shift table must be a non-empty 2-D array")
        shifts.setflags(write=False)
        object.__setattr__(self, "shifts", shifts)
        object.__setattr__(self, "punct_cols", tuple(sorted(set(int(c) for c in self.punct_cols))))

        if self.lift < 1:
            raise BaseGraphError(f"lifting size must be >= 1, got {self.lift}")
        bad = (shifts != EMPTY) & ((shifts < 0) | (shifts >= self.lift))
        if bad.any():
            r, c = np.argwhere(bad)[0]
            raise BaseGraphError(
                f"shift out of range at ({r}, {c}): {shifts[r, c]} not in [0, {self.lift})"
            )
        mask = shifts != EMPTY
        if not mask.any(axis=1).all():
            raise BaseGraphError(f"empty row {int(np.flatnonzero(~mask.any(axis=1))[0])}")
        if not mask.any(axis=0).all():
            raise BaseGraphError(f"empty column {int(np.flatnonzero(~mask.any(axis=0))[0])}")
        if not 0 <= self.info_cols <= self.cols:
            raise BaseGraphError(f"info_cols {self.info_cols} outside [0, {self.cols}]")
        if any(not 0 <= c < self.cols for c in self.punct_cols):
            raise BaseGraphError(f"punctured columns {self.punct_cols} outside [0, {self.cols})")

    @property
    def rows(self) -> int:
        return self.shifts.shape[0]

    @property
    def cols(self) -> int:
        return self.shifts.shape[1]

    @property
    def mask(self) -> np.ndarray:
        """Boolean support of the shift table."""
        return self.shifts != EMPTY

    def __eq__(self, other):
        if not isinstance(other, BaseGraph):
            return NotImplemented
        return (
            self.lift == other.lift
            and self.info_cols == other.info_cols
            and self.punct_cols == other.punct_cols
            and np.array_equal(self.shifts, other.shifts)
        )

    def __repr__(self):
        return (
            f"BaseGraph(rows={self.rows}, cols={self.cols}, lift={self.lift}, "
            f"info_cols={self.info_cols}, punct_cols={self.punct_cols})"
        )


@dataclass(frozen=True)
class LayerStats:
    """Degree ``d_i``, puncture count ``p_i`` and common-degree table per layer."""

    degrees: np.ndarray
    punctures: np.ndarray
    common: np.ndarray

    @property
    def size(self) -> int:
        return len(self.degrees)

    def subset(self, layers) -> LayerStats:
        idx = np.asarray(layers, dtype=np.int64)
        return LayerStats(self.degrees[idx], self.punctures[idx], self.common[np.ix_(idx, idx)])


@dataclass(frozen=True, eq=False)
class LiftedCode:
    """Binary expansion of a base graph.

    ``layer_vars[r]`` is a ``(Z, d_r)`` array; row ``z`` lists the variables
    touched by lifted check ``r * Z + z`` in ascending block-column order.
    """

    base: BaseGraph
    layer_vars: tuple[np.ndarray, ...] = field(repr=False)

    @property
    def n(self) -> int:
        return self.base.cols * self.base.lift

    @property
    def m(self) -> int:
        return self.base.rows * self.base.lift

    @property
    def k(self) -> int:
        """Number of systematic (information) positions."""
        return self.base.info_cols * self.base.lift

    @property
    def num_layers(self) -> int:
        return self.base.rows

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(sorted(row.tolist())) for block in self.layer_vars for row in block)

    @cached_property
    def layer_of_check(self) -> np.ndarray:
        return np.repeat(np.arange(self.base.rows), self.base.lift)

    @cached_property
    def transmitted(self) -> np.ndarray:
        z = self.base.lift
        tx = np.ones(self.n, dtype=bool)
        for c in self.base.punct_cols:
            tx[c * z:(c + 1) * z] = False
        tx.setflags(write=False)
        return tx

    @property
    def num_edges(self) -> int:
        return sum(block.size for block in self.layer_vars)

    def parity_check_matrix(self) -> np.ndarray:
        """Dense 0/1 parity-check matrix; intended for small codes."""
        h = np.zeros((self.m, self.n), dtype=np.uint8)
        for check, vars_ in enumerate(self.adjacency):
            h[check, list(vars_)] = 1
        return h

    def syndrome(self, bits: np.ndarray) -> np.ndarray:
        """Per-check parity of ``bits`` (last axis = variables)."""
        bits = np.asarray(bits, dtype=np.uint8)
        out = [np.bitwise_xor.reduce(bits[..., block], axis=-1) for block in self.layer_vars]
        return np.concatenate(out, axis=-1)


def _parse_punct(value: str, line_no: int) -> tuple[int, ...]:
    if value == "default":
        return NR_DEFAULT_PUNCT
    if value == "":
        return ()
    try:
        cols = [int(tok) for tok in value.split(",")]
    except ValueError:
        raise BaseGraphError(f"line {line_no}: bad punct list {value!r}") from None
    if len(set(cols)) != len(cols):
        raise BaseGraphError(f"line {line_no}: duplicate entries in punct list {value!r}")
    return tuple(cols)


def parse_base_graph(text: str) -> BaseGraph:
    """Parse the text base-graph format.

    Header ``m_b n_b Z k_b punct=<default|c1,c2,...>`` followed by ``m_b``
    rows of ``n_b`` integers, ``-1`` for an empty block. ``#`` starts a comment.
    """
    lines = []
    for no, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if content:
            lines.append((no, content))
    if not lines:
        raise BaseGraphError("empty base-graph file")

    no, header = lines[0]
    fields = header.split()
    if len(fields) != 5 or not fields[4].startswith("punct="):
        raise BaseGraphError(f"line {no}: malformed header {header!r}")
    try:
        m_b, n_b, lift, k_b = (int(v) for v in fields[:4])
    except ValueError:
        raise BaseGraphError(f"line {no}: malformed header {header!r}") from None
    if m_b < 1 or n_b < 1:
        raise BaseGraphError(f"line {no}: dimensions must be positive")
    punct = _parse_punct(fields[4][len("punct="):], no)

    body = lines[1:]
    if len(body) != m_b:
        raise BaseGraphError(f"expected {m_b} shift rows, found {len(body)}")
    shifts = np.empty((m_b, n_b), dtype=np.int64)
    for r, (no, content) in enumerate(body):
        toks = content.split()
        if len(toks) != n_b:
            raise BaseGraphError(f"line {no}: expected {n_b} entries, found {len(toks)}")
        try:
            shifts[r] = [int(tok) for tok in toks]
        except ValueError:
            raise BaseGraphError(f"line {no}: non-integer entry") from None
        if (shifts[r] < EMPTY).any():
            raise BaseGraphError(f"line {no}: negative shift other than -1")
    return BaseGraph(shifts, lift=lift, info_cols=k_b, punct_cols=punct)


def serialize_base_graph(bg: BaseGraph) -> str:
    """Canonical text form: no comments, single spaces, trailing newline."""
    if bg.punct_cols == NR_DEFAULT_PUNCT:
        punct = "default"
    else:
        punct = ",".join(str(c) for c in bg.punct_cols)
    out = [f"{bg.rows} {bg.cols} {bg.lift} {bg.info_cols} punct={punct}"]
    out.extend(" ".join(str(int(v)) for v in row) for row in bg.shifts)
    return "\n".join(out) + "\n"


def load_base_graph(path) -> BaseGraph:
    return parse_base_graph(Path(path).read_text(encoding="utf-8"))


def lifting_set_index(z: int) -> int:
    for ils, values in enumerate(NR_LIFTING_SETS):
        if z in values:
            return ils
    raise BaseGraphError(f"Z={z} is not an NR lifting size")


def data_path(name: str) -> Path:
    """Path of a data file shipped with the package."""
    return Path(str(resources.files("qcsched") / "data" / name))


def nr_base_graph(graph: str = "bg1", lift: int = 384) -> BaseGraph:
    """Shipped 5G NR base graph with shifts reduced for lifting size ``lift``.

    Shift values within one lifting set are ``V mod Z``; because every ``Z`` of a
    set divides the set's largest member, reducing the stored table is exact.
    """
    graph = graph.lower()
    if graph not in ("bg1", "bg2"):
        raise BaseGraphError(f"unknown NR base graph {graph!r}")
    ils = lifting_set_index(lift)
    full = load_base_graph(data_path(f"{graph}_ls{ils}.txt"))
    return with_lift(full, lift)


def with_lift(bg: BaseGraph, lift: int) -> BaseGraph:
    """Same support with shifts taken modulo the new lifting size."""
    shifts = np.where(bg.mask, bg.shifts % lift, EMPTY)
    return BaseGraph(shifts, lift=lift, info_cols=bg.info_cols, punct_cols=bg.punct_cols)


def lift(bg: BaseGraph) -> LiftedCode:
    z = bg.lift
    rows = np.arange(z)[:, None]
    blocks = []
    for r in range(bg.rows):
        cols = np.flatnonzero(bg.mask[r])
        block = cols[None, :] * z + (rows + bg.shifts[r, cols][None, :]) % z
        block.setflags(write=False)
        blocks.append(block)
    return LiftedCode(bg, tuple(blocks))


def layer_stats(bg: BaseGraph) -> LayerStats:
    support = bg.mask.astype(np.int64)
    degrees = support.sum(axis=1)
    punct = list(bg.punct_cols)
    punctures = support[:, punct].sum(axis=1) if punct else np.zeros(bg.rows, dtype=np.int64)
    common = support @ support.T
    for arr in (degrees, punctures, common):
        arr.setflags(write=False)
    return LayerStats(degrees, punctures, common)


def select_rate(bg: BaseGraph, target_rate) -> BaseGraph:
    """Truncate an NR-style base graph to the first ``r`` rows and ``k_b + r`` columns.

    ``r = round(k_b / rate) - k_b + |punct|``, so the transmitted length
    ``k_b + r - |punct|`` gives the requested code rate. At least the four
    core parity rows are always kept.
    """
    rate = Fraction(target_rate).limit_denominator(10_000)
    if not 0 < rate <= 1:
        raise BaseGraphError(f"rate must lie in (0, 1], got {target_rate}")
    k_b = bg.info_cols
    n_punct = len(bg.punct_cols)
    r = round(Fraction(k_b) / rate) - k_b + n_punct
    min_rate = Fraction(k_b, bg.cols - n_punct)
    if r < 4 or r > bg.rows or k_b + r > bg.cols:
        raise BaseGraphError(
            f"unreachable rate {rate}: needs {r} parity rows, base graph supports "
            f"rates in [{min_rate}, {Fraction(k_b, k_b + 4 - n_punct)}]"
        )
    return BaseGraph(
        bg.shifts[:r, :k_b + r], lift=bg.lift, info_cols=k_b, punct_cols=bg.punct_cols
    )


def code_rate(bg: BaseGraph) -> Fraction:
    """Information bits over transmitted bits, assuming full-rank parity checks."""
    return Fraction(bg.info_cols, bg.cols - len(bg.punct_cols))
