"""Command-line front end: ``labelfuse {bounds,simulate,sweep,replay}``.

CSV goes to stdout, diagnostics to stderr. Exit codes: 0 success, 1 usage,
2 verification failure, 3 inconsistent replay log.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import bounds
from .algorithms import ReprConfig
from .errors import BudgetError, ConfigError, DomainError, IntegrityError
from .graph import ContractionGraph
from .harness import ExperimentConfig, ExperimentResult, run_experiment, sweep
from .problem import Distribution, ProblemConfig
from .teachers import ReplayPool, parse_replay_log

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_REPLAY = 0, 1, 2, 3

RESULT_COLUMNS = (
    "alg", "n", "c", "alpha", "beta", "p", "trials", "seed",
    "mean_labels", "mean_eff", "stderr", "ci_lo", "ci_hi", "bound", "upper",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting with status 2."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def fmt(x: float) -> str:
    return format(float(x), ".9g")


def parse_grid(text: str) -> list[float]:
    """``from:to:steps`` (inclusive, linear), ``logspace:from:to:steps`` or ``a,b,c``."""
    text = text.strip()
    try:
        if text.startswith("logspace:"):
            lo, hi, steps = text.split(":")[1:]
            lo, hi, steps = float(lo), float(hi), int(steps)
            if not (0 < lo < hi) or steps < 2:
                raise UsageError(f"bad log grid {text!r}: need 0 < from < to and steps >= 2")
            return [float(v) for v in np.geomspace(lo, hi, steps)]
        if ":" in text:
            lo, hi, steps = text.split(":")
            lo, hi, steps = float(lo), float(hi), int(steps)
            if not lo < hi or steps < 2:
                raise UsageError(f"bad grid {text!r}: need from < to and steps >= 2")
            return [float(v) for v in np.linspace(lo, hi, steps)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot parse grid {text!r}") from None


def _beta(text: str) -> float | None:
    if text.strip().lower() == "auto":
        return None
    return float(text)


def _beta_mode(text: str) -> str | float:
    t = text.strip().lower()
    return t if t in ("theorem", "exact") else float(t)


@dataclass(frozen=True)
class Option:
    name: str
    convert: Callable[[str], Any]
    default: Any
    help: str
    required: bool = False


_PROBLEM_OPTS = [
    Option("n", int, None, "number of instances", required=True),
    Option("c", int, None, "number of classes", required=True),
    Option("distribution", Distribution.parse, Distribution(), "uniform | zipf:<s> | explicit:<p1,...>"),
    Option("alg", str, "c3", "algorithm: c3 | repr | c4"),
    Option("beta", _beta, None, "representative fraction in (0,1) or 'auto'"),
    Option("trials", int, 10, "number of trials"),
    Option("seed", int, 0, "master seed"),
]

OPTIONS: dict[str, list[Option]] = {
    "bounds": [
        Option("alpha", parse_grid, parse_grid("0.1:3:30"), "alpha grid"),
        Option("p", parse_grid, [], "name-consistency values for extra c4 columns"),
        Option("beta_mode", _beta_mode, "theorem", "theorem | exact | fixed beta value"),
    ],
    "simulate": _PROBLEM_OPTS + [
        Option("alpha", float, None, "budget ratio l/c", required=True),
        Option("p", float, None, "name-consistency probability"),
        Option("trace", str, None, "write per-round trace CSV to this path"),
    ],
    "sweep": _PROBLEM_OPTS + [
        Option("alpha", parse_grid, None, "alpha grid", required=True),
        Option("p", parse_grid, None, "p grid"),
    ],
    "replay": [
        Option("components", str, None, "write instance,component CSV to this path"),
    ],
}


def build_parser() -> _Parser:
    parser = _Parser(prog="labelfuse", description="Label-fusion simulator and efficiency bounds.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for command, opts in OPTIONS.items():
        p = sub.add_parser(command)
        if command == "replay":
            p.add_argument("log", help="teacher<TAB>instance<TAB>name log with a #l=<int> header")
        else:
            p.add_argument("--config", help="key = value file; flags override it")
        for opt in opts:
            flag = "--" + opt.name.replace("_", "-")
            p.add_argument(flag, dest=opt.name, type=_wrap(opt), default=None, help=opt.help)
    return parser


def _wrap(opt: Option):
    def convert(text):
        try:
            return opt.convert(text)
        except (ConfigError, ValueError) as exc:
            raise argparse.ArgumentTypeError(f"invalid --{opt.name.replace('_', '-')} {text!r}: {exc}")

    convert.__name__ = opt.name
    return convert


def read_config_file(path: str | Path) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        if not eq:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def resolve_options(command: str, args: argparse.Namespace) -> dict[str, Any]:
    """Merge defaults < config file < flags and check required keys."""
    opts = {o.name: o for o in OPTIONS[command]}
    file_values = read_config_file(args.config) if getattr(args, "config", None) else {}
    values = {}
    for key, text in file_values.items():
        if key not in opts:
            raise UsageError(f"unknown config key {key!r} for {command}")
        try:
            values[key] = opts[key].convert(text)
        except (ConfigError, ValueError) as exc:
            raise UsageError(f"config key {key}: {exc}") from None
    for name, opt in opts.items():
        flag_value = getattr(args, name)
        if flag_value is not None:
            values[name] = flag_value
        elif name not in values:
            if opt.required:
                raise UsageError(f"{command}: --{name.replace('_', '-')} is required")
            values[name] = opt.default
    return values


def _experiment(values: dict[str, Any], alpha: float | None, p: float | None) -> ExperimentConfig:
    return ExperimentConfig(
        problem=ProblemConfig(n=values["n"], c=values["c"], distribution=values["distribution"]),
        algorithm=values["alg"],
        repr_config=ReprConfig(values["beta"]),
        alpha=alpha,
        p=p,
        trials=values["trials"],
        master_seed=values["seed"],
    )


def result_row(res: ExperimentResult) -> str:
    cfg = res.config
    p = cfg.naming.true_name_prob
    return ",".join(
        [
            cfg.algorithm,
            str(cfg.problem.n),
            str(cfg.problem.c),
            fmt(res.alpha),
            fmt(res.beta if res.beta is not None else 0.0),
            fmt(p),
            str(cfg.trials),
            str(cfg.master_seed),
            fmt(res.mean_labels),
            fmt(res.mean_efficiency),
            fmt(res.stderr),
            fmt(res.ci95_low),
            fmt(res.ci95_high),
            fmt(res.bound),
            fmt(res.upper),
        ]
    )


def _summary(res: ExperimentResult) -> str:
    cfg = res.config
    return (
        f"{cfg.algorithm} n={cfg.problem.n} c={cfg.problem.c} l={res.l}: "
        f"efficiency {res.mean_efficiency:.4f} +/- {res.stderr:.4f} "
        f"(95% CI {res.ci95_low:.4f}..{res.ci95_high:.4f}), bound {res.bound:.4f}, "
        f"upper {res.upper:.4f}; {cfg.trials} trial(s) verified"
    )


def cmd_bounds(values: dict[str, Any], out, err) -> int:
    grid = values["alpha"]
    if len(grid) < 2 or any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] <= 0:
        raise UsageError("bounds needs a strictly increasing positive alpha grid with at least 2 points")
    ps = values["p"]
    mode = values["beta_mode"]
    header = ["alpha", "c3", "repr_theorem", "repr_exact", "beta_star", "upper"] + [f"c4_p{p:g}" for p in ps]
    out.write(",".join(header) + "\n")
    for a in grid:
        if isinstance(mode, float):
            beta = mode
        else:
            beta = bounds.optimize_beta(a, mode)[0]
        row = [
            a,
            bounds.c3_bound(a),
            bounds.representatives_bound(a, beta),
            bounds.representatives_bound_exact(a, beta),
            beta,
            bounds.upper_bound(a),
        ] + [bounds.c4_bound(a, p) for p in ps]
        out.write(",".join(fmt(v) for v in row) + "\n")
    return EXIT_OK


def cmd_simulate(values: dict[str, Any], out, err) -> int:
    res = run_experiment(_experiment(values, values["alpha"], values["p"]), trace=values["trace"] is not None)
    out.write(",".join(RESULT_COLUMNS) + "\n")
    out.write(result_row(res) + "\n")
    if values["trace"] is not None:
        with open(values["trace"], "w", newline="\n") as fh:
            fh.write("trial,round,node_count,labels_used\n")
            for trial, rows in enumerate(res.traces):
                for r, nodes, labels in rows:
                    fh.write(f"{trial},{r},{nodes},{labels}\n")
    err.write(_summary(res) + "\n")
    return EXIT_OK


def cmd_sweep(values: dict[str, Any], out, err) -> int:
    table = sweep(_experiment(values, None, None), values["alpha"], values["p"])
    out.write(",".join(RESULT_COLUMNS) + "\n")
    for res in table.rows:
        out.write(result_row(res) + "\n")
        err.write(_summary(res) + "\n")
    return EXIT_OK


def cmd_replay(log_path: str, values: dict[str, Any], out, err) -> int:
    try:
        log = parse_replay_log(log_path)
    except BudgetError as exc:
        err.write(f"replay: {exc}\n")
        return EXIT_REPLAY
    pool = ReplayPool(log)
    if log.n == 0:
        components, violation = [], None
    else:
        graph = ContractionGraph(log.n)
        violation = pool.apply_to(graph)
        components = graph.components()
    if violation is not None:
        err.write(f"replay: inconsistent log at {violation}\n")
        return EXIT_REPLAY
    out.write("n,teachers,labels,components\n")
    out.write(f"{log.n},{pool.teachers_used},{pool.labels_used},{len(components)}\n")
    if values["components"] is not None:
        with open(values["components"], "w", newline="\n") as fh:
            fh.write("instance,component\n")
            label = np.empty(log.n, dtype=np.int64)
            for k, members in enumerate(components):
                label[members] = k
            for i, k in enumerate(label.tolist()):
                fh.write(f"{i},{k}\n")
    err.write(f"replay: {pool.teachers_used} teachers, {pool.labels_used} labels, {len(components)} components\n")
    return EXIT_OK


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
        values = resolve_options(args.command, args)
        if args.command == "bounds":
            return cmd_bounds(values, out, err)
        if args.command == "simulate":
            return cmd_simulate(values, out, err)
        if args.command == "sweep":
            return cmd_sweep(values, out, err)
        return cmd_replay(args.log, values, out, err)
    except UsageError as exc:
        err.write(f"{exc}\n")
        return EXIT_USAGE
    except (ConfigError, DomainError, OSError) as exc:
        err.write(f"labelfuse: {exc}\n")
        return EXIT_USAGE
    except IntegrityError as exc:
        err.write(f"labelfuse: verification failed: {exc}\n")
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
