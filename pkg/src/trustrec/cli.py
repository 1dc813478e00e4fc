"""Command-line entry point: ``trustrec <command> ...``.

Exit status is 0 on success, 1 on a usage error and 2 on a data error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .graph import GraphError
from .harness import (
    DEFAULT_SEED,
    ExperimentConfig,
    recommended_degree_distribution,
    run_experiment,
    sweep_length,
    sweep_theta,
    theta_grid,
)
from .ingest import DEFAULT_THRESHOLD, ParseError, load_raw, read_canonical, write_canonical
from .recommenders import METHODS, MethodConfig, canonical_method

log = logging.getLogger("trustrec")

USAGE_ERROR = 1
DATA_ERROR = 2
DEFAULT_THETA = 0.70
TABLE_METRICS = ("AUC", "RS", "P", "R", "F1", "H", "I", "N")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _methods(text: str) -> list[str]:
    try:
        return [canonical_method(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _float_range(text: str) -> list[float]:
    """``start:stop:step`` (inclusive) or a comma list."""
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0:
                raise ValueError
            return theta_grid(start, stop, step)
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; use start:stop:step or a,b,c") from None


def _int_range(text: str) -> list[int]:
    try:
        if ":" in text:
            parts = [int(x) for x in text.split(":")]
            start, stop = parts[0], parts[1]
            step = parts[2] if len(parts) > 2 else 1
            if step <= 0:
                raise ValueError
            return list(range(start, stop + 1, step))
        return [int(x) for x in text.split(",")]
    except (ValueError, IndexError):
        raise argparse.ArgumentTypeError(f"bad list {text!r}; use start:stop[:step] or a,b,c") from None


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _add_run_flags(p, folds=True):
    p.add_argument("dataset", help="canonical dataset file (see `ingest`)")
    p.add_argument("--folds", type=int, default=10, help="cross-validation folds, >= 2 (default: 10)")
    p.add_argument("--realizations", type=_positive, default=20,
                   help="independent fold partitions averaged (default: 20)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                   help=f"base seed; realization r uses seed + r (default: {DEFAULT_SEED})")
    p.add_argument("--workers", type=_positive, default=os.cpu_count() or 1,
                   help="worker processes (default: number of CPUs)")
    p.add_argument("--out", help="output CSV path (default: standard output)")
    p.add_argument("--json", dest="json_out", help="also write a JSON report with the full config")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="trustrec", description="Trust-aware diffusion recommenders and their evaluation.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to standard error")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="convert raw rating/trust TSV files to a canonical dataset")
    p.add_argument("--ratings", required=True, help="user<TAB>object<TAB>rating file")
    p.add_argument("--trust", help="truster<TAB>trustee file (optional)")
    p.add_argument("--threshold", type=int, default=DEFAULT_THRESHOLD,
                   help=f"keep ratings >= threshold (default: {DEFAULT_THRESHOLD})")
    p.add_argument("--out", required=True, help="canonical dataset file to write")

    p = sub.add_parser("evaluate", help="compare methods at one list length")
    _add_run_flags(p)
    p.add_argument("--methods", type=_methods, default=list(METHODS),
                   help=f"comma list from {','.join(METHODS)} (default: all)")
    p.add_argument("--L", type=_positive, default=10, help="recommendation list length (default: 10)")
    p.add_argument("--theta", type=float, default=DEFAULT_THETA,
                   help=f"CosRA_T scaling exponent in [0, 1] (default: {DEFAULT_THETA})")

    p = sub.add_parser("sweep-theta", help="CosRA_T over a theta grid")
    _add_run_flags(p)
    p.add_argument("--grid", type=_float_range, default=theta_grid(),
                   help="start:stop:step or a,b,c (default: 0:1:0.05)")
    p.add_argument("--L", type=_int_range, default=[10], help="list length(s) (default: 10)")

    p = sub.add_parser("sweep-length", help="metrics as a function of L")
    _add_run_flags(p)
    p.add_argument("--methods", type=_methods, default=list(METHODS),
                   help=f"comma list from {','.join(METHODS)} (default: all)")
    p.add_argument("--L", type=_int_range, default=list(range(1, 101)),
                   help="start:stop[:step] or a,b,c (default: 1:100)")
    p.add_argument("--theta", type=float, default=DEFAULT_THETA,
                   help=f"CosRA_T scaling exponent (default: {DEFAULT_THETA})")

    p = sub.add_parser("degree-dist", help="degree histogram of recommended objects in one fold")
    p.add_argument("dataset", help="canonical dataset file")
    p.add_argument("--method", type=canonical_method, default="CosRA_T",
                   help=f"one of {','.join(METHODS)} (default: CosRA_T)")
    p.add_argument("--L", type=_positive, default=10, help="list length (default: 10)")
    p.add_argument("--theta", type=float, default=DEFAULT_THETA,
                   help=f"CosRA_T scaling exponent (default: {DEFAULT_THETA})")
    p.add_argument("--folds", type=int, default=10, help="fold count, >= 2 (default: 10)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"split seed (default: {DEFAULT_SEED})")
    p.add_argument("--out", help="output CSV path (default: standard output)")
    return parser


def _emit(text: str, path):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _load(path):
    try:
        return read_canonical(path)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None


def _theta(value: float) -> float:
    if not 0.0 <= value <= 1.0:
        raise UsageError(f"--theta must lie in [0, 1], got {value}")
    return value


def _config(args, methods, L_values) -> ExperimentConfig:
    if args.folds < 2:
        raise UsageError(f"--folds must be >= 2, got {args.folds}")
    return ExperimentConfig(methods, L_values, args.folds, args.realizations, args.seed, args.workers)


def format_table(report, L: int) -> str:
    """Method-by-metric summary table, one row per method."""
    methods = []
    for r in report.rows:
        key = (r.method, r.theta)
        if key not in methods:
            methods.append(key)
    width = max(len(f"{m}({t:g})" if t is not None else m) for m, t in methods) + 2
    lines = ["Method".ljust(width) + "".join(f"{m:>10}" for m in TABLE_METRICS)]
    for name, theta in methods:
        label = f"{name}({theta:g})" if theta is not None else name
        cells = []
        for metric in TABLE_METRICS:
            v = report.value(name, metric, L, theta)
            cells.append(f"{v:>10.4f}" if metric != "N" else f"{v:>10.1f}")
        lines.append(label.ljust(width) + "".join(cells))
    return "\n".join(lines) + "\n"


def cmd_ingest(args) -> None:
    try:
        d = load_raw(args.ratings, args.trust, args.threshold)
    except OSError as exc:
        raise DataError(f"cannot read input: {exc}") from None
    if d.rating_graph.n_links == 0:
        raise DataError("no links after thresholding")
    write_canonical(d, args.out)
    s = d.stats()
    print(
        f"m={s['m']} n={s['n']} l_R={s['l_R']} S_R={s['S_R']:.3e} "
        f"l_T={s['l_T']} S_T={s['S_T']:.3e}",
        file=sys.stderr,
    )
    for line in d.report.lines():
        print(line, file=sys.stderr)


def cmd_evaluate(args) -> None:
    theta = _theta(args.theta)
    methods = [MethodConfig(m, theta if m == "CosRA_T" else 1.0) for m in args.methods]
    cfg = _config(args, methods, [args.L])
    d = _load(args.dataset)
    report = run_experiment(d, cfg, os.path.basename(args.dataset))
    _emit(report.to_csv(), args.out)
    if args.json_out:
        report.to_json(args.json_out)
    if args.out is not None:
        sys.stdout.write(format_table(report, args.L))
    else:
        sys.stderr.write(format_table(report, args.L))


def cmd_sweep_theta(args) -> None:
    for t in args.grid:
        _theta(t)
    cfg = _config(args, ["CosRA_T"], args.L)
    d = _load(args.dataset)
    report, summary = sweep_theta(d, cfg, args.grid, os.path.basename(args.dataset))
    _emit(report.to_csv(), args.out)
    if args.json_out:
        report.to_json(args.json_out)
    for (metric, L), th in summary.best.items():
        print(f"best theta for {metric}{'' if L is None else f'@{L}'}: {th:g}", file=sys.stderr)
    print(f"mean best theta: {summary.mean_best:.3f} +/- {summary.stderr_best:.3f}", file=sys.stderr)


def cmd_sweep_length(args) -> None:
    theta = _theta(args.theta)
    methods = [MethodConfig(m, theta if m == "CosRA_T" else 1.0) for m in args.methods]
    cfg = _config(args, methods, args.L)
    d = _load(args.dataset)
    report = sweep_length(d, cfg, args.L, os.path.basename(args.dataset))
    _emit(report.to_csv(), args.out)
    if args.json_out:
        report.to_json(args.json_out)


def cmd_degree_dist(args) -> None:
    theta = _theta(args.theta)
    if args.folds < 2:
        raise UsageError(f"--folds must be >= 2, got {args.folds}")
    method = MethodConfig(args.method, theta if args.method == "CosRA_T" else 1.0)
    d = _load(args.dataset)
    hist, res = recommended_degree_distribution(d, method, args.L, args.folds, args.seed)
    lines = ["degree,count"] + [f"{k},{c}" for k, c in hist]
    _emit("\n".join(lines) + "\n", args.out)
    n_l = res.get(method, "N", args.L).value
    print(f"N(L={args.L}) = {n_l:.4f} over {res.evaluable_users} users", file=sys.stderr)


COMMANDS = {
    "ingest": cmd_ingest,
    "evaluate": cmd_evaluate,
    "sweep-theta": cmd_sweep_theta,
    "sweep-length": cmd_sweep_length,
    "degree-dist": cmd_degree_dist,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"trustrec {args.command}: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (DataError, ParseError, GraphError, ValueError) as exc:
        print(f"trustrec {args.command}: {exc}", file=sys.stderr)
        return DATA_ERROR
    return 0


if __name__ == "__main__":
    sys.exit(main())
