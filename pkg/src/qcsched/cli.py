"""Command-line entry point: ``qcsched {idle,optimize,simulate,analyze}``.

Exit codes: 0 success, 1 usage error, 2 data or validation error,
3 infeasible optimisation.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from fractions import Fraction
from pathlib import Path

from . import __version__
from .analysis import (
    RandomLayerModel,
    asymptotic_slope,
    expected_pair_idle_exact,
    sample_pair_idle,
    verify_prop1,
)
from .idle import ScheduleError, n_idle_cyclic, n_idle_linear, read_schedule, transition_idles
from .ldpc import (
    BaseGraph,
    BaseGraphError,
    data_path,
    layer_stats,
    lift,
    load_base_graph,
    nr_base_graph,
    select_rate,
)
from .policies import (
    IDLE,
    IDLE_PERFORMANCE,
    PolicySpec,
    SolverParams,
    make_schedule,
    schedule_idle,
    schedule_idle_performance,
)
from .sim import SimConfig, run_bler
from .tsp import InfeasibleTourError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INFEASIBLE = 0, 1, 2, 3

FIXTURES = ("toy4", "hamming84", "tree7")
DEFAULT_SLOPE_GRID = "50,100,200,400,800,1600,3200"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _rate(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad rate {text!r}; use p/q") from None
    if not 0 < value <= 1:
        raise argparse.ArgumentTypeError(f"rate {text} outside (0, 1]")
    return value


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def _pos_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None


def resolve_base_graph(source: str) -> BaseGraph:
    """A file path, a shipped fixture name, or ``bg1[:Z]`` / ``bg2[:Z]``."""
    path = Path(source)
    if path.is_file():
        return load_base_graph(path)
    name, _, z = source.lower().partition(":")
    if name in FIXTURES and not z:
        return load_base_graph(data_path(f"{name}.txt"))
    if name in ("bg1", "bg2"):
        try:
            lift_size = int(z) if z else 384
        except ValueError:
            raise BaseGraphError(f"bad lifting size in {source!r}") from None
        return nr_base_graph(name, lift_size)
    raise BaseGraphError(f"no base-graph file or built-in named {source!r}")


def _load_bg(args) -> BaseGraph:
    bg = resolve_base_graph(args.bg)
    if getattr(args, "rate", None) is not None:
        bg = select_rate(bg, args.rate)
    return bg


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _solver(args) -> SolverParams:
    return SolverParams(seed=args.seed, restarts=args.restarts, budget=args.budget, threads=args.threads)


# -- subcommands -------------------------------------------------------------

def cmd_idle(args) -> int:
    bg = _load_bg(args)
    stats = layer_stats(bg)
    if args.schedule is not None:
        order = read_schedule(args.schedule, stats.size)
    else:
        order = make_schedule(PolicySpec.parse(args.policy, _solver(args)), stats, args.t)
    cyclic = n_idle_cyclic(stats, args.t, order)
    linear = n_idle_linear(stats, args.t, order)
    print(f"cyclic={cyclic} linear={linear}")
    if args.verbose:
        per = transition_idles(stats, args.t, order)
        m = len(order)
        for i in range(m):
            src, dst = int(order[i - 1]), int(order[i])
            tag = " (wrap)" if i == 0 else ""
            print(f"{src} -> {dst}: {int(per[i])}{tag}")
    return EXIT_OK


def cmd_optimize(args) -> int:
    bg = _load_bg(args)
    stats = layer_stats(bg)
    if args.mode == IDLE:
        order, n_idle = schedule_idle(stats, args.t, _solver(args))
        mode = "plain"
    else:
        order, n_idle = schedule_idle_performance(stats, args.t, _solver(args))
        mode = "constrained"
    linear = n_idle_linear(stats, args.t, order)
    text = " ".join(str(int(v)) for v in order) + "\n"
    text += f"# n_idle_cyclic={n_idle} t={args.t} mode={mode}\n"
    _write(text, args.output)
    print(f"n_idle_cyclic={n_idle} n_idle_linear={linear}", file=sys.stderr if args.output is None else sys.stdout)
    return EXIT_OK


def cmd_simulate(args) -> int:
    bg = _load_bg(args)
    code = lift(bg)
    stats = layer_stats(bg)
    if args.decoder == "flooding":
        schedule = None
        policy = None
    else:
        policy = PolicySpec.parse(args.policy, _solver(args))
        schedule = make_schedule(policy, stats, args.t)
    cfg = SimConfig(
        code=code,
        snr_db=tuple(args.snr),
        trials=args.trials,
        schedule=schedule,
        max_errors=args.max_errors or None,
        max_iters=args.max_iters,
        clip=args.clip,
        seed=args.seed,
        threads=args.threads,
        chunk=args.chunk,
        label={"policy": None if policy is None else str(policy), "t": args.t, "bg": args.bg},
    )
    result = run_bler(cfg)
    csv_path = Path(args.output)
    csv_path.write_text(result.to_csv(), encoding="utf-8")
    csv_path.with_suffix(".json").write_text(result.to_json(), encoding="utf-8")
    sys.stdout.write(result.to_csv())
    return EXIT_OK


def cmd_analyze(args) -> int:
    if args.degrees is not None and args.t > min(args.degrees) and not args.force:
        print(
            f"error: t={args.t} exceeds the minimum degree {min(args.degrees)}; the ordering "
            "claim assumes t <= d_min (use --force to run anyway)",
            file=sys.stderr,
        )
        return EXIT_USAGE
    model = RandomLayerModel(args.N, args.di, args.dj, args.t)
    exact = expected_pair_idle_exact(model)
    report = {
        "version": __version__,
        "config": {"N": args.N, "d_i": args.di, "d_j": args.dj, "t": args.t, "seed": args.seed},
        "exact": {"expected_pair_idle": float(exact), "fraction": str(exact)},
        "means": {},
        "stderrs": {},
        "slope": None,
        "pass_flags": {},
    }
    if args.trials:
        mean, se = sample_pair_idle(model, args.trials, args.seed)
        report["config"]["trials"] = args.trials
        report["means"]["pair_sample"] = mean
        report["stderrs"]["pair_sample"] = se
        report["pass_flags"]["sample_within_4se"] = bool(
            abs(mean - float(exact)) <= 4 * se if se else mean == float(exact)
        )
    # the fit needs E > 0, i.e. an overlap of d_j + 1 - t columns must be possible
    if 1 <= args.t <= args.dj and min(args.di, args.dj) >= args.dj + 1 - args.t:
        grid = args.slope_grid
        slope = asymptotic_slope(args.di, args.dj, args.t, grid)
        target = -(args.dj + 1 - args.t)
        report["slope"] = {"value": slope, "expected": target, "grid": grid}
        report["pass_flags"]["slope_within_10pct"] = abs(slope - target) <= 0.1 * abs(target)
    if args.degrees is not None:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            cmp = verify_prop1(args.degrees, args.N, args.t, args.codes, args.seed, force=args.force)
        ordering = cmp.as_dict()
        report["config"]["ordering"] = ordering["config"]
        report["means"].update(ordering["means"])
        report["stderrs"].update(ordering["stderrs"])
        report["stderrs"].update({f"gap:{k}": v for k, v in ordering["gap_stderrs"].items()})
        report["pass_flags"].update(ordering["pass_flags"])
    _write(json.dumps(report, indent=2, sort_keys=True) + "\n", args.output)
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qcsched", description=__doc__.splitlines()[0], allow_abbrev=False)
    parser.add_argument("--version", action="version", version=f"qcsched {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, need_bg=True):
        if need_bg:
            p.add_argument("--bg", required=True,
                           help="base-graph file, fixture name (toy4, hamming84, tree7) or bg1[:Z] / bg2[:Z]")
            p.add_argument("--rate", type=_rate, default=None,
                           help="truncate an NR base graph to this code rate, e.g. 1/2")
        p.add_argument("--seed", type=_nonneg_int, default=0, help="random seed (default 0)")
        p.add_argument("--threads", type=_pos_int, default=1, help="worker threads (default 1)")
        p.add_argument("-o", "--output", default=None, help="output file (default stdout)")

    def solver(p):
        p.add_argument("--restarts", type=_pos_int, default=64, help="heuristic restarts (default 64)")
        p.add_argument("--budget", type=_pos_int, default=200_000,
                       help="move evaluations per restart (default 200000)")

    p = sub.add_parser("idle", help="idle cycles of a schedule", allow_abbrev=False)
    common(p)
    p.add_argument("--t", type=_nonneg_int, required=True, help="SO data-path latency in cycles")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--schedule", help="schedule file (whitespace-separated layer indices)")
    src.add_argument("--policy", default="natural",
                     help="natural|ld|idle|idle-performance|file:<path> (default natural)")
    p.add_argument("--verbose", action="store_true", help="print every transition")
    solver(p)
    p.set_defaults(func=cmd_idle)

    p = sub.add_parser("optimize", help="find a low-idle schedule", allow_abbrev=False)
    common(p)
    p.add_argument("--t", type=_nonneg_int, required=True, help="SO data-path latency in cycles")
    p.add_argument("--mode", choices=(IDLE, IDLE_PERFORMANCE), default=IDLE,
                   help="idle: unconstrained; idle-performance: keep (degree, punctures) group order")
    solver(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("simulate", help="Monte Carlo BLER/BER over BPSK/AWGN", allow_abbrev=False)
    common(p)
    p.add_argument("--policy", default="natural",
                   help="natural|ld|idle|idle-performance|file:<path> (default natural)")
    p.add_argument("--t", type=_nonneg_int, default=4, help="latency used by idle policies (default 4)")
    p.add_argument("--decoder", choices=("layered", "flooding"), default="layered")
    p.add_argument("--snr", type=_float_list, required=True, help="comma-separated Eb/N0 grid in dB")
    p.add_argument("--trials", type=_pos_int, default=1000, help="max codewords per SNR point")
    p.add_argument("--max-errors", type=_nonneg_int, default=100,
                   help="stop a point after this many block errors; 0 disables (default 100)")
    p.add_argument("--max-iters", type=_pos_int, default=20, help="decoder iterations (default 20)")
    p.add_argument("--clip", type=float, default=31.75, help="LLR saturation (default 31.75)")
    p.add_argument("--chunk", type=_pos_int, default=250, help="trials per work unit (default 250)")
    solver(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="random-layer idle expectation and ordering check",
                       allow_abbrev=False)
    common(p, need_bg=False)
    p.add_argument("--N", type=_pos_int, required=True, help="number of variable-node columns")
    p.add_argument("--di", type=_pos_int, required=True, help="degree of the preceding layer")
    p.add_argument("--dj", type=_pos_int, required=True, help="degree of the following layer")
    p.add_argument("--t", type=_nonneg_int, required=True, help="SO data-path latency in cycles")
    p.add_argument("--trials", type=_nonneg_int, default=0, help="Monte Carlo pair samples (0 skips)")
    p.add_argument("--slope-grid", type=_int_list, default=_int_list(DEFAULT_SLOPE_GRID),
                   help=f"N values for the decay-exponent fit (default {DEFAULT_SLOPE_GRID})")
    p.add_argument("--degrees", type=_int_list, default=None,
                   help="layer degrees of the random ensemble for the ordering comparison")
    p.add_argument("--codes", type=_pos_int, default=100_000, help="random codes for the ordering comparison")
    p.add_argument("--force", action="store_true", help="run the ordering comparison even if t > d_min")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "simulate" and args.output is None:
        parser.error("simulate requires -o <results.csv>")
    try:
        return args.func(args)
    except InfeasibleTourError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (BaseGraphError, ScheduleError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
