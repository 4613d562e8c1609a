"""Command-line front end for experiments.

Subcommands: simulate, trajectory, transference, fixed-points,
velocity-field, periodic-demo.  Every experiment is configured either by
flags or by a JSON config file mirroring the flag names (flags win), all
randomness flows from --seed, and outputs are CSV files whose schemas
are documented in the README.  Identical invocations produce
byte-identical outputs.

Exit codes: 0 success, 1 configuration/validation error, 2 runtime
fault (integration failure or an enumeration guard).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from math import floor

import numpy as np

from .errors import ConfigError, FlipflowError, GuardExceededError, IntegrationFaultError
from .integrators import IntegratorOptions
from .rules import Rule, load_rule, make_rule, validate
from .simulate import run, transference_experiment, write_transference_csv
from .stepfun import StepGraphon, constant, load_graphon, two_block
from .trajectory import constant_fixed_points, integrate, planar_demo
from .velocity import velocity

MODES = (
    "simulate",
    "trajectory",
    "transference",
    "fixed-points",
    "velocity-field",
    "periodic-demo",
)

_STOCHASTIC_MODES = ("simulate", "transference")


@dataclass
class ExperimentConfig:
    """Validated experiment description; one per CLI invocation."""

    mode: str
    rule: str | None = None
    rule_file: str | None = None
    init: str | None = None
    init_file: str | None = None
    seed: int | None = None
    out: str | None = None
    n: int | None = None
    t_end: float | None = None
    steps: int | None = None
    checkpoints: int = 11
    grid: int = 21
    klass: str = "two-block-sym"
    replicates: int = 1
    start: str | None = None
    rtol: float = 1e-10
    atol: float = 1e-12
    method: str = "rk45_adaptive"
    step: float | None = None
    grid_n: int = 1001
    tol: float = 1e-10

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls(**json.loads(text))

    def integrator_options(self) -> IntegratorOptions:
        return IntegratorOptions(
            method=self.method, rtol=self.rtol, atol=self.atol, step=self.step
        )


def _normalize_key(key: str) -> str:
    key = key.replace("-", "_")
    return "klass" if key == "class" else key


def parse_config(args: argparse.Namespace) -> ExperimentConfig:
    """Merge config file and flags (flags win) and validate all at once."""
    values: dict = {}
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            with open(config_path, encoding="utf-8") as fh:
                values.update(
                    {_normalize_key(k): v for k, v in json.load(fh).items()}
                )
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError([f"cannot read config file {config_path}: {exc}"])
    for key, value in vars(args).items():
        if key in ("config", "func") or value is None:
            continue
        values[key] = value
    values["mode"] = args.mode

    known = {f for f in ExperimentConfig.__dataclass_fields__}
    problems = [f"unknown config key {k!r}" for k in values if k not in known]
    cfg = ExperimentConfig(**{k: v for k, v in values.items() if k in known})

    if cfg.mode not in MODES:
        problems.append(f"unknown mode {cfg.mode!r}")
    if cfg.mode in _STOCHASTIC_MODES and cfg.seed is None:
        problems.append(f"--seed is required in {cfg.mode} mode")
    if cfg.mode != "periodic-demo":
        if not cfg.rule and not cfg.rule_file:
            problems.append("--rule or --rule-file is required")
    if cfg.mode in ("simulate", "trajectory", "transference"):
        if not cfg.init and not cfg.init_file:
            problems.append("--init or --init-file is required")
    if cfg.mode in ("simulate", "transference") and not cfg.n:
        problems.append("--n is required for simulation modes")
    if cfg.mode == "simulate" and cfg.steps is None and cfg.t_end is None:
        problems.append("simulate needs --steps or --t-end")
    if cfg.mode in ("trajectory", "transference", "periodic-demo") and cfg.t_end is None:
        problems.append(f"--t-end is required in {cfg.mode} mode")
    out_modes = ("simulate", "trajectory", "transference", "velocity-field", "periodic-demo")
    if cfg.mode in out_modes and not cfg.out:
        problems.append(f"--out is required in {cfg.mode} mode")
    if cfg.checkpoints < 1:
        problems.append("--checkpoints must be >= 1")
    if cfg.grid < 2:
        problems.append("--grid must be >= 2")
    if problems:
        raise ConfigError(problems)
    return cfg


def _build_rule(cfg: ExperimentConfig) -> Rule:
    if cfg.rule_file:
        rule = load_rule(cfg.rule_file)
    else:
        rule = make_rule(cfg.rule)
    validate(rule)
    return rule


def _build_init(cfg: ExperimentConfig) -> StepGraphon:
    if cfg.init_file:
        return load_graphon(cfg.init_file)
    spec = cfg.init
    head, _, rest = spec.partition(":")
    if head == "const":
        return constant(float(rest))
    if head == "two-block":
        fields = [float(x) for x in rest.split(",")]
        if len(fields) != 5:
            raise ConfigError(
                ["two-block init needs mass1,mass2,x1,x2,y " f"(got {spec!r})"]
            )
        m1, m2, x1, x2, y = fields
        return two_block((m1, m2), x1, x2, y)
    raise ConfigError([f"unknown init spec {spec!r}"])


def _cell_labels(m: int) -> list[str]:
    return [f"cell_{i + 1}_{j + 1}" for i in range(m) for j in range(i, m)]


def _cells(w: StepGraphon) -> list[float]:
    iu = np.triu_indices(w.m)
    return [float(v) for v in w.values[iu]]


def _write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Read back any CSV this package writes: (header, float matrix)."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        rows = [[float(x) for x in line.split(",")] for line in fh if line.strip()]
    data = np.array(rows) if rows else np.empty((0, len(header)))
    if data.size and data.shape[1] != len(header):
        raise ValueError(f"ragged CSV {path}: {data.shape[1]} columns vs {len(header)} headers")
    return header, data


# ---------------------------------------------------------------------------
# Subcommand bodies


def _cmd_simulate(cfg: ExperimentConfig) -> int:
    from .stepfun import sample_graph
    from .streams import substream

    rule = _build_rule(cfg)
    w0 = _build_init(cfg)
    n = cfg.n
    total = cfg.steps if cfg.steps is not None else floor(cfg.t_end * n * n)
    marks = sorted({round(total * i / (cfg.checkpoints - 1)) for i in range(cfg.checkpoints)}) if cfg.checkpoints > 1 else [total]
    graph0 = sample_graph(n, w0, substream(cfg.seed, "init"))
    snapshots = run(rule, graph0, total, checkpoint_steps=marks, seed=cfg.seed)
    m = w0.m
    header = ["step", "t", "density"] + _cell_labels(m)
    rows = []
    for step_no, w in snapshots:
        rows.append([step_no, step_no / (n * n), w.edge_density()] + _cells(w))
    _write_csv(cfg.out, header, rows)
    return 0


def _cmd_trajectory(cfg: ExperimentConfig) -> int:
    rule = _build_rule(cfg)
    w0 = _build_init(cfg)
    times = np.linspace(0.0, cfg.t_end, cfg.checkpoints)
    traj = integrate(rule, w0, cfg.t_end, checkpoint_times=times, opts=cfg.integrator_options())
    header = ["t"] + _cell_labels(w0.m)
    rows = [[t] + _cells(w) for t, w in traj.checkpoints]
    _write_csv(cfg.out, header, rows)
    return 0


def _cmd_transference(cfg: ExperimentConfig) -> int:
    rule = _build_rule(cfg)
    w0 = _build_init(cfg)
    if cfg.replicates == 1:
        report = transference_experiment(
            rule, w0, cfg.n, cfg.t_end, cfg.checkpoints, cfg.seed,
            opts=cfg.integrator_options(),
        )
        write_transference_csv(report, cfg.out)
        return 0
    # replicate seeds are derived as seed, seed+1, ...; rows sorted by replicate
    with open(cfg.out, "w", encoding="utf-8") as fh:
        fh.write("replicate,t,cut_dist,l1_dist,sim_density,traj_density\n")
        for rep_id in range(cfg.replicates):
            report = transference_experiment(
                rule, w0, cfg.n, cfg.t_end, cfg.checkpoints, cfg.seed + rep_id,
                opts=cfg.integrator_options(),
            )
            for row in report.rows():
                fh.write(str(rep_id) + "," + ",".join(repr(float(x)) for x in row) + "\n")
    return 0


def _cmd_fixed_points(cfg: ExperimentConfig) -> int:
    rule = _build_rule(cfg)
    roots = constant_fixed_points(rule, grid_n=cfg.grid_n, tol=cfg.tol)
    for r in roots:
        print(format(r, ".12g"))
    if cfg.out:
        _write_csv(cfg.out, ["fixed_point"], [[r] for r in roots])
    return 0


def _cmd_velocity_field(cfg: ExperimentConfig) -> int:
    rule = _build_rule(cfg)
    if cfg.klass != "two-block-sym":
        raise ConfigError([f"unknown graphon class {cfg.klass!r}"])
    grid = np.linspace(0.0, 1.0, cfg.grid)
    rows = []
    for x in grid:
        for y in grid:
            w = two_block((0.5, 0.5), float(x), float(x), float(y))
            vel = velocity(rule, w)
            rows.append([x, y, vel.values[0, 0], vel.values[0, 1]])
    _write_csv(cfg.out, ["x", "y", "vx", "vy"], rows)
    return 0


def _cmd_periodic_demo(cfg: ExperimentConfig) -> int:
    start = (0.25, 0.8)
    if cfg.start:
        sx, sy = cfg.start.split(",")
        start = (float(sx), float(sy))
    trace = planar_demo(start, cfg.t_end, opts=cfg.integrator_options())
    rows = [[t, p[0], p[1]] for t, p in zip(trace.times, trace.points)]
    _write_csv(cfg.out, ["t", "x", "y"], rows)
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "trajectory": _cmd_trajectory,
    "transference": _cmd_transference,
    "fixed-points": _cmd_fixed_points,
    "velocity-field": _cmd_velocity_field,
    "periodic-demo": _cmd_periodic_demo,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flipflow",
        description="Flip-process simulations and graphon trajectories",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        p = sub.add_parser(mode)
        p.add_argument("--config", help="JSON config file; flags override it")
        p.add_argument("--rule", help="builtin rule spec, e.g. er, extremist:3")
        p.add_argument("--rule-file", dest="rule_file", help="JSON rule file")
        p.add_argument("--init", help="initial graphon, e.g. const:0.5 or two-block:0.5,0.5,0.95,0.95,0.18")
        p.add_argument("--init-file", dest="init_file", help="JSON graphon file")
        p.add_argument("--seed", type=int, help="master seed (required for stochastic modes)")
        p.add_argument("--out", help="output CSV path")
        p.add_argument("--n", type=int, help="number of simulated vertices")
        p.add_argument("--t-end", dest="t_end", type=float, help="final rescaled time")
        p.add_argument("--steps", type=int, help="number of flip steps (simulate)")
        p.add_argument("--checkpoints", type=int, help="number of checkpoints")
        p.add_argument("--grid", type=int, help="grid size (velocity-field)")
        p.add_argument("--class", dest="klass", help="graphon class for velocity-field")
        p.add_argument("--replicates", type=int, help="replicate count (transference)")
        p.add_argument("--start", help="start point x,y (periodic-demo)")
        p.add_argument("--rtol", type=float, help="integrator relative tolerance")
        p.add_argument("--atol", type=float, help="integrator absolute tolerance")
        p.add_argument("--method", choices=("rk45_adaptive", "rk4_fixed"), help="integrator")
        p.add_argument("--step", type=float, help="fixed step size for rk4_fixed")
        p.add_argument("--grid-n", dest="grid_n", type=int, help="root scan grid (fixed-points)")
        p.add_argument("--tol", type=float, help="root tolerance (fixed-points)")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        cfg = parse_config(args)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"error: {problem}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    try:
        return _COMMANDS[cfg.mode](cfg)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"error: {problem}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (IntegrationFaultError, GuardExceededError, FlipflowError) as exc:
        print(f"fault: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
