"""``pong`` command line: run rally scenarios, check gradients, self-verify.

Exit status: 0 on success (a rally that ends infeasible is a normal outcome),
1 for configuration or usage errors, 2 when the attention solver did not
converge on a collision that was hit.
"""

import argparse
import csv
import json
import logging
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .attention_solver import SolverConfig
from .gradcheck import check_gradients
from .rally import SCENARIOS, ScenarioConfig, detect_steady_state, run_rally, summarize
from .svgplot import line_plot

logger = logging.getLogger(__name__)

SCENARIO_NAMES = tuple(SCENARIOS) + ("custom",)
RALLY_COLUMNS = ("i", "side", "attention_cost", "coord_cost", "control_cost", "delta_xp", "E",
                 "ball_pvert", "ball_vvert", "feasible")
SUMMARY_COLUMNS = ("scenario", "kind", "termination", "collisions_summed", "attention",
                   "control", "coordination", "steady_state", "zero_crossing_rate")
RUN_KEYS = ("scenario", "out", "svg", "seed")
SCENARIO_KEYS = tuple(f.name for f in fields(ScenarioConfig) if f.name != "solver")
SOLVER_KEYS = tuple(f.name for f in fields(SolverConfig))

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2


class ConfigError(ValueError):
    """A configuration file or command-line value is invalid."""


@dataclass
class RunConfig:
    scenario: str = "coordination-strong"
    overrides: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)
    out: str = "pong-out"
    svg: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.scenario not in SCENARIO_NAMES:
            raise ConfigError(f"unknown scenario {self.scenario!r}; "
                              f"choose from {', '.join(SCENARIO_NAMES)}")

    def scenario_config(self):
        """Resolve the named preset (or a bare config for ``custom``) with overrides applied."""
        kw = dict(self.overrides)
        if self.solver:
            kw["solver"] = SolverConfig(**self.solver)
        try:
            if self.scenario == "custom":
                return ScenarioConfig(**kw)
            return ScenarioConfig.preset(self.scenario, **kw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc


def _check_value(name, value, expected):
    """Type check one config value; ``bool`` is not accepted as a number."""
    number = isinstance(value, (int, float)) and not isinstance(value, bool)
    if expected is int and not (isinstance(value, int) and not isinstance(value, bool)):
        raise ConfigError(f"field {name!r}: expected an integer, got {value!r}")
    if expected is float and not number:
        raise ConfigError(f"field {name!r}: expected a number, got {value!r}")
    if expected is bool and not isinstance(value, bool):
        raise ConfigError(f"field {name!r}: expected true or false, got {value!r}")
    if expected is str and not isinstance(value, str):
        raise ConfigError(f"field {name!r}: expected a string, got {value!r}")
    if expected is tuple:
        if not (isinstance(value, list) and len(value) == 2
                and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
            raise ConfigError(f"field {name!r}: expected [velocity, position], got {value!r}")


_SCENARIO_TYPES = {"kind": str, "collisions": int, "N": int, "paddle_left": tuple,
                   "paddle_right": tuple}
_SOLVER_TYPES = {"active_dims": int, "outer_rounds": int, "max_inner": int, "stall_window": int}


def parse_config(data, source="<config>"):
    """Build a :class:`RunConfig` from an already decoded JSON object."""
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a JSON object")
    allowed = set(RUN_KEYS) | set(SCENARIO_KEYS) | {"solver"}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"{source}: unknown field(s): {', '.join(unknown)}")
    run = {}
    for key, kind in (("scenario", str), ("out", str), ("svg", bool), ("seed", int)):
        if key in data:
            _check_value(key, data[key], kind)
            run[key] = data[key]
    overrides = {}
    for key in SCENARIO_KEYS:
        if key in data:
            _check_value(key, data[key], _SCENARIO_TYPES.get(key, float))
            overrides[key] = tuple(data[key]) if isinstance(data[key], list) else data[key]
    solver = data.get("solver", {})
    if not isinstance(solver, dict):
        raise ConfigError(f"{source}: field 'solver' must be an object")
    unknown = sorted(set(solver) - set(SOLVER_KEYS))
    if unknown:
        raise ConfigError(f"{source}: unknown solver field(s): {', '.join(unknown)}")
    for key, value in solver.items():
        _check_value(f"solver.{key}", value, _SOLVER_TYPES.get(key, float))
    cfg = RunConfig(overrides=overrides, solver=dict(solver), **run)
    cfg.scenario_config()  # surface invalid values now, not mid-run
    return cfg


def load_config(path):
    """Read a JSON config file. An empty object gives all defaults."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return parse_config(data, str(path))


def _num(x):
    return repr(float(x))


def rally_rows(log):
    for rec in log.records:
        yield (rec.index, rec.side, _num(rec.attention_cost), _num(rec.coord_cost),
               _num(rec.control_cost), _num(rec.delta_xp), _num(rec.E),
               _num(rec.ball.p_vert), _num(rec.ball.v_vert), "true" if rec.feasible else "false")


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def summary_row(name, log):
    tot = summarize(log)
    if len(log.records) >= 2:
        steady = detect_steady_state(log, window=min(30, len(log.records)))
        kind, rate = steady.kind, _num(steady.zero_crossing_rate)
    else:
        kind, rate = "undetermined", ""
    return (name, log.config.kind, log.termination, tot.collisions, _num(tot.attention),
            _num(tot.control), _num(tot.coordination), kind, rate)


def _plots(log):
    by_side = {}
    for side in ("right", "left"):
        recs = [r for r in log.records if r.side == side]
        by_side[side] = ([r.index for r in recs], [r.attention_cost for r in recs])
    att = line_plot(by_side, "Attention per collision", "collision i", "q_p^T q_p")
    dx = line_plot({"delta_xp": ([r.index for r in log.records], log.series("delta_xp"))},
                   "Net paddle movement", "collision i", "delta x_p (m)")
    return att, dx


def run_scenario(cfg):
    """Run one rally and write its files. Returns the exit status."""
    scenario = cfg.scenario_config()
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    log = run_rally(scenario)
    write_csv(out / "rally.csv", RALLY_COLUMNS, rally_rows(log))
    write_csv(out / "summary.csv", SUMMARY_COLUMNS, [summary_row(cfg.scenario, log)])
    if cfg.svg:
        att, dx = _plots(log)
        (out / "attention.svg").write_text(att, encoding="utf-8")
        (out / "delta_xp.svg").write_text(dx, encoding="utf-8")
    print(f"{cfg.scenario}: {len(log.records)} collisions, {log.termination}; wrote {out}")
    stalled = [r.index for r in log.records if r.feasible and not r.converged]
    if stalled:
        print(f"solver did not converge at collision(s) {stalled}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the config-error status instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def build_parser():
    parser = _Parser(prog="pong", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run a rally scenario and export CSV (and SVG)")
    run.add_argument("--scenario", required=True, choices=SCENARIO_NAMES)
    run.add_argument("--config", help="JSON config file with field overrides")
    run.add_argument("--out", help="output directory (default pong-out)")
    run.add_argument("--collisions", type=_positive_int, help="number of collisions")
    run.add_argument("--svg", action="store_true", help="also write SVG line plots")

    grad = sub.add_parser("check-gradients", help="analytic dE/dq vs finite differences")
    grad.add_argument("--trials", type=_positive_int, default=50)
    grad.add_argument("--seed", type=int, default=0)

    sub.add_parser("verify", help="run the built-in oracle and scenario checks")
    return parser


def _cmd_run(args):
    cfg = load_config(args.config) if args.config else RunConfig()
    cfg = replace(cfg, scenario=args.scenario)
    if args.out:
        cfg.out = args.out
    if args.collisions:
        cfg.overrides = {**cfg.overrides, "collisions": args.collisions}
    if args.svg:
        cfg.svg = True
    return run_scenario(cfg)


def _cmd_check_gradients(args):
    report = check_gradients(seed=args.seed, trials=args.trials)
    for line in report.lines():
        print(line)
    return EXIT_OK if report.passed(1e-3) else EXIT_SOLVER


def _cmd_verify(args):
    from .verification import run_checks

    results = run_checks()
    for res in results:
        print(res.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_SOLVER


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"run": _cmd_run, "check-gradients": _cmd_check_gradients, "verify": _cmd_verify}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"pong: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
