"""Command-line front end.

    python3 -m bsdegbt <command> [options]

Commands: solve, experiment, curve, scaling, convergence. Any option left
unset is taken from ``--config`` (flat ``key = value`` lines, optionally
grouped under ``[command]`` sections) and then from the example's preset.

Exit codes: 0 ok, 2 usage error, 3 numerical failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .gbt import GbtHyperParams
from .metrics import (ExperimentRecord, RunStats, convergence_probe, records_to_csv,
                      records_to_json, records_to_markdown, reference_values, run_experiment,
                      scaling_probe)
from .paths import build_grid
from .presets import preset
from .problems import ExampleSpec, canonical_id, make_example
from .schemes import (ConfigurationError, GbtRegressor, NumericalFailure, PolynomialOracle,
                      Scheme, SolverConfig, solve_with_regressor)

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4
COMMANDS = ("solve", "experiment", "curve", "scaling", "convergence")
FORMATS = ("csv", "md", "json")
_SCHEMES = {"1": "scheme1", "2": "scheme2", "scheme1": "scheme1", "scheme2": "scheme2",
            "shortcut": "shortcut", "mc": "shortcut", "0": "shortcut"}


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class CliConfig:
    command: str
    example: str = "ex1"
    dim: int = 100
    maturity: Optional[float] = None
    steps: Optional[int] = None
    samples: Optional[int] = None
    runs: int = 10
    scheme: Optional[str] = None
    seed: int = 0
    ky: Optional[int] = None
    kz: Optional[int] = None
    learning_rate: Optional[float] = None
    max_depth: Optional[int] = None
    reg_lambda: float = 1.0
    gamma: float = 0.0
    split_ratio: float = 0.75
    min_samples_leaf: int = 1
    picard: int = 10
    skip_unused_z: bool = False
    sigma: Optional[float] = None
    output: Optional[str] = None
    format: str = "csv"
    sweep: Optional[str] = None
    values: Optional[str] = None
    curve_step: int = 1
    curve_trees: int = 100
    oracle: bool = False
    omit_timings: bool = False
    heavy: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


_FIELD_TYPES = {f.name: f.type for f in fields(CliConfig)}
_BOOL_KEYS = {"skip_unused_z", "oracle", "omit_timings", "heavy"}
_INT_KEYS = {"dim", "steps", "samples", "runs", "seed", "ky", "kz", "max_depth",
             "min_samples_leaf", "picard", "curve_step", "curve_trees"}
_FLOAT_KEYS = {"maturity", "learning_rate", "reg_lambda", "gamma", "split_ratio", "sigma"}


def _coerce(key: str, raw: str):
    key = key.replace("-", "_")
    if key in ("eta",):
        key = "learning_rate"
    if key in ("lambda",):
        key = "reg_lambda"
    if key not in _FIELD_TYPES or key == "command":
        raise UsageError(f"unknown config key {key!r}")
    raw = raw.strip()
    try:
        if key in _BOOL_KEYS:
            low = raw.lower()
            if low not in ("1", "0", "true", "false", "yes", "no", "on", "off"):
                raise ValueError(raw)
            return key, low in ("1", "true", "yes", "on")
        if key in _INT_KEYS:
            return key, int(raw)
        if key in _FLOAT_KEYS:
            return key, float(raw)
    except ValueError:
        raise UsageError(f"invalid value {raw!r} for {key}") from None
    return key, raw


def read_config_file(path: str, command: str) -> dict:
    """Global ``key = value`` lines plus those in the ``[command]`` section."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read config file {path}: {exc.strerror}") from exc
    out, section = {}, None
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in COMMANDS:
                raise UsageError(f"{path}:{n}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        key, raw = line.split("=", 1)
        if section is None or section == command:
            k, v = _coerce(key.strip(), raw)
            out[k] = v
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bsdegbt", description="Theta-scheme BSDE solver with boosted-tree "
                "regressions.", formatter_class=argparse.RawDescriptionHelpFormatter,
                epilog="exit codes: 0 ok, 2 usage, 3 numerical failure, 4 I/O\n"
                       "env: BSDE_THREADS caps worker threads for repeated runs (0 = auto)")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    help_text = {
        "solve": "one solve, prints Y0 and writes Y0, Z0 and per-step diagnostics",
        "experiment": "repeated runs with error statistics, optionally over a sweep",
        "curve": "train/test MSE against the number of trees at one time step",
        "scaling": "wall time against M, N_T, d or K with the log-log slope",
        "convergence": "error against N_T with observed orders",
    }
    for name in COMMANDS:
        s = sub.add_parser(name, help=help_text[name], description=help_text[name])
        g = s.add_argument_group("problem")
        g.add_argument("--example", help="ex1 .. ex6")
        g.add_argument("--dim", type=int, help="dimension d")
        g.add_argument("--maturity", "-T", type=float, help="terminal time (example default)")
        g.add_argument("--sigma", type=float, help="volatility override (ex3, ex5)")
        g = s.add_argument_group("solver")
        g.add_argument("--steps", type=int, help="number of time steps N_T")
        g.add_argument("--samples", type=int, help="number of paths M")
        g.add_argument("--runs", type=int, help="independent runs (default 10)")
        g.add_argument("--scheme", help="1, 2 or shortcut")
        g.add_argument("--seed", type=int, help="base seed; run k uses seed + k")
        g.add_argument("--picard", type=int, help="Picard iterations (default 10)")
        g.add_argument("--skip-unused-z", action="store_const", const=True, default=None,
                       help="skip interior Z fits when the driver ignores z")
        g.add_argument("--oracle", action="store_const", const=True, default=None,
                       help="use the polynomial oracle instead of boosted trees")
        g = s.add_argument_group("boosted trees")
        g.add_argument("--ky", type=int, help="trees for Y")
        g.add_argument("--kz", type=int, help="trees for Z")
        g.add_argument("--learning-rate", "--eta", dest="learning_rate", type=float)
        g.add_argument("--max-depth", type=int)
        g.add_argument("--lambda", dest="reg_lambda", type=float)
        g.add_argument("--gamma", type=float)
        g.add_argument("--split-ratio", type=float)
        g.add_argument("--min-samples-leaf", type=int)
        g = s.add_argument_group("output")
        g.add_argument("--output", "-o", help="output file (curve: file prefix)")
        g.add_argument("--format", choices=FORMATS)
        g.add_argument("--omit-timings", action="store_const", const=True, default=None,
                       help="leave wall-clock fields empty so reruns are byte-identical")
        g.add_argument("--config", help="config file with key = value lines")
        g.add_argument("--heavy", action="store_const", const=True, default=None,
                       help="allow long-running configurations")
        if name in ("experiment", "scaling", "convergence"):
            s.add_argument("--sweep", help="experiment/scaling: M, N_T, d or K")
            s.add_argument("--values", help="comma-separated sweep values")
        if name == "curve":
            s.add_argument("--curve-step", type=int, help="time index to fit (default 1)")
            s.add_argument("--curve-trees", type=int, help="trees in the curve (default 100)")
    return p


def parse_args(argv: Sequence[str]) -> CliConfig:
    args = build_parser().parse_args(list(argv))
    if args.command is None:
        raise UsageError("missing command")
    given = {k: v for k, v in vars(args).items()
             if v is not None and k not in ("command", "config")}
    merged = {}
    if args.config:
        merged.update(read_config_file(args.config, args.command))
    merged.update(given)
    cfg = CliConfig(command=args.command, **merged)
    return _validate(cfg)


def _validate(cfg: CliConfig) -> CliConfig:
    try:
        ex = canonical_id(cfg.example)
    except ValueError as exc:
        raise UsageError(f"--example: {exc}") from None
    cfg = replace(cfg, example=ex)
    if cfg.dim < 1:
        raise UsageError("--dim must be >= 1")
    if cfg.scheme is not None:
        key = str(cfg.scheme).lower()
        if key not in _SCHEMES:
            raise UsageError(f"--scheme: unknown scheme {cfg.scheme!r}")
        cfg = replace(cfg, scheme=_SCHEMES[key])
    for name in ("steps", "samples", "ky", "kz", "max_depth", "runs", "picard"):
        v = getattr(cfg, name)
        if v is not None and v < (0 if name in ("ky", "kz", "max_depth") else 1):
            raise UsageError(f"--{name.replace('_', '-')} out of range: {v}")
    if cfg.samples is not None and cfg.samples < 2:
        raise UsageError("--samples must be >= 2")
    if cfg.seed < 0:
        raise UsageError("--seed must be non-negative")
    if cfg.format not in FORMATS:
        raise UsageError(f"--format must be one of {', '.join(FORMATS)}")
    if cfg.sweep is not None and cfg.sweep not in ("M", "N_T", "d", "K"):
        raise UsageError("--sweep must be M, N_T, d or K")
    if cfg.command == "scaling" and (cfg.sweep is None or cfg.values is None):
        raise UsageError("scaling needs --sweep and --values")
    if cfg.command == "scaling" and cfg.omit_timings:
        raise UsageError("--omit-timings makes no sense for scaling")
    if cfg.values is not None:
        _values(cfg)
    problem = _problem(cfg)
    scheme = _resolved(cfg).scheme
    if Scheme(scheme) is Scheme.SCHEME1 and not problem.has_gradient:
        raise UsageError(f"--scheme: {ex} has no terminal gradient, scheme 1 needs one")
    if cfg.command in ("curve",) and Scheme(scheme) is Scheme.MC_SHORTCUT:
        raise UsageError("--scheme: curve needs scheme 1 or 2")
    if _is_heavy(cfg) and not cfg.heavy:
        raise UsageError("this configuration is long-running; pass --heavy to run it")
    return cfg


def _values(cfg: CliConfig) -> list:
    try:
        vals = [float(v) for v in cfg.values.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--values: cannot parse {cfg.values!r}") from None
    if not vals:
        raise UsageError("--values is empty")
    if cfg.sweep in ("M", "N_T", "d", "K") or cfg.command == "convergence":
        if any(v != int(v) or v < 1 for v in vals):
            raise UsageError("--values must be positive integers")
        vals = [int(v) for v in vals]
    return vals


def _problem(cfg: CliConfig, dim: Optional[int] = None):
    kw = {}
    if cfg.maturity is not None:
        kw["maturity"] = cfg.maturity
    if cfg.sigma is not None:
        kw["sigma"] = cfg.sigma
    try:
        return make_example(ExampleSpec(cfg.example, dim or cfg.dim, **kw))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _resolved(cfg: CliConfig) -> CliConfig:
    """Fill unset solver knobs from the example preset."""
    pre = preset(cfg.example, cfg.dim)
    fill = {"steps": pre.n_steps, "samples": pre.n_samples, "scheme": pre.scheme.value,
            "ky": pre.k_y, "kz": pre.k_z, "learning_rate": pre.learning_rate,
            "max_depth": pre.max_depth}
    return replace(cfg, **{k: v for k, v in fill.items() if getattr(cfg, k) is None})


def _is_heavy(cfg: CliConfig) -> bool:
    r = _resolved(cfg)
    dims = [cfg.dim]
    steps = [r.steps]
    if cfg.values and cfg.sweep == "d":
        dims = _values(cfg)
    if cfg.values and (cfg.sweep == "N_T" or cfg.command == "convergence"):
        steps = _values(cfg)
    return max(dims) >= 5000 or (cfg.example == "ex6" and max(dims) >= 50 and max(steps) >= 400)


def solver_config(cfg: CliConfig, problem=None) -> SolverConfig:
    r = _resolved(cfg)
    problem = problem or _problem(cfg)
    try:
        hy = GbtHyperParams(n_trees=r.ky, learning_rate=r.learning_rate, max_depth=r.max_depth,
                            reg_lambda=r.reg_lambda, gamma=r.gamma,
                            min_samples_leaf=r.min_samples_leaf, split_ratio=r.split_ratio)
        hz = replace(hy, n_trees=r.kz)
        return SolverConfig(r.scheme, build_grid(problem.maturity, r.steps), r.samples,
                            picard_iters=r.picard, gbt_y=hy, gbt_z=hz, seed=r.seed,
                            skip_unused_z=r.skip_unused_z)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def threads_from_env() -> int:
    raw = os.environ.get("BSDE_THREADS", "1").strip() or "1"
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"BSDE_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise UsageError("BSDE_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


# ---------------------------------------------------------------------------
# commands


def _meta(cfg: CliConfig) -> dict:
    r = _resolved(cfg).to_dict()
    # the destination is not part of what the run computes
    r.pop("output")
    return {"tool": "bsdegbt", "version": __version__, "config": r}


def _regressor(cfg: CliConfig):
    return PolynomialOracle() if cfg.oracle else None


def _no_times(stats: RunStats) -> RunStats:
    return replace(stats, mean_wall_time=float("nan"), wall_times=())


def _write(path: Optional[str], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def _records_text(records, cfg, column="M") -> str:
    meta = _meta(cfg)
    if cfg.format == "json":
        return records_to_json(records, meta)
    if cfg.format == "md":
        return records_to_markdown(records, column=column, meta=meta)
    return records_to_csv(records, meta)


def _experiment_one(cfg: CliConfig, workers: int) -> ExperimentRecord:
    problem = _problem(cfg)
    sc = solver_config(cfg, problem)
    try:
        stats = run_experiment(problem, sc, cfg.runs, cfg.seed, regressor=_regressor(cfg),
                               workers=workers)
    except ConfigurationError as exc:
        raise UsageError(str(exc)) from None
    if cfg.omit_timings:
        stats = _no_times(stats)
    return ExperimentRecord.build(problem, sc, stats, cfg.seed)


def cmd_experiment(cfg: CliConfig) -> str:
    workers = threads_from_env()
    if cfg.sweep is None or cfg.values is None:
        cells = [cfg]
    else:
        key = {"M": "samples", "N_T": "steps", "d": "dim", "K": None}[cfg.sweep]
        cells = []
        for v in _values(cfg):
            cells.append(replace(cfg, ky=v, kz=v) if key is None else replace(cfg, **{key: v}))
    records = [_experiment_one(c, workers) for c in cells]
    _write(cfg.output, _records_text(records, cfg, "N_T" if cfg.sweep == "N_T" else "M"))
    last = records[-1].stats
    ez = "-" if last.error_z is None else f"{last.error_z:.5f}"
    return (f"{cfg.example} d={cfg.dim}: {len(records)} setting(s), last error_y="
            f"{last.error_y:.5f} error_z={ez} mean Y0={last.mean_y0:.5f}")


def cmd_solve(cfg: CliConfig) -> str:
    problem = _problem(cfg)
    sc = solver_config(cfg, problem)
    est = solve_with_regressor(problem, sc, _regressor(cfg) or GbtRegressor())
    y_ref, z_ref = reference_values(problem)
    result = {"y0": est.y0, "z0": [float(v) for v in est.z0], "seed": est.seed,
              "reference_y0": y_ref,
              "error_y": None if y_ref is None else abs(y_ref - est.y0),
              "error_z": None if z_ref is None else float(np.mean(np.abs(z_ref - est.z0))),
              "wall_time": None if cfg.omit_timings else est.wall_time,
              "steps": [{"index": s.index, "y_train_mse": _num(s.y_train_mse),
                         "y_test_mse": _num(s.y_test_mse), "z_train_mse": _num(s.z_train_mse),
                         "z_test_mse": _num(s.z_test_mse),
                         "seconds": None if cfg.omit_timings else s.seconds}
                        for s in est.per_step]}
    meta = _meta(cfg)
    if cfg.format == "json":
        text = json.dumps({"config": meta, "result": result}, sort_keys=True, indent=1) + "\n"
    elif cfg.format == "md":
        lines = ["<!-- config", json.dumps(meta, sort_keys=True, indent=1), "-->", "",
                 "| quantity | value |", "|---|---|",
                 f"| Y0 | {est.y0!r} |", f"| reference Y0 | {_s(y_ref)} |",
                 f"| error_y | {_s(result['error_y'])} |",
                 f"| error_z | {_s(result['error_z'])} |",
                 f"| mean of Z0 | {float(np.mean(est.z0))!r} |",
                 f"| runtime [s] | {_s(result['wall_time'])} |", "",
                 "| i | y train MSE | y test MSE | z train MSE | z test MSE |",
                 "|---|---|---|---|---|"]
        for s in result["steps"]:
            lines.append(f"| {s['index']} | {_s(s['y_train_mse'])} | {_s(s['y_test_mse'])} | "
                         f"{_s(s['z_train_mse'])} | {_s(s['z_test_mse'])} |")
        text = "\n".join(lines) + "\n"
    else:
        head = ["# " + ln for ln in json.dumps(meta, sort_keys=True, indent=1).splitlines()]
        head.append("# y0=" + repr(est.y0))
        head.append("# z0=" + json.dumps(result["z0"]))
        rows = ["index,y_train_mse,y_test_mse,z_train_mse,z_test_mse,seconds"]
        for s in result["steps"]:
            rows.append(",".join(_s(s[k], "") for k in ("index", "y_train_mse", "y_test_mse",
                                                           "z_train_mse", "z_test_mse",
                                                           "seconds")))
        text = "\n".join(head + rows) + "\n"
    _write(cfg.output, text)
    tail = "" if y_ref is None else f" (reference {y_ref:.5f}, error {abs(y_ref - est.y0):.5f})"
    return f"{cfg.example} d={cfg.dim}: Y0={est.y0:.6f}{tail}"


def _num(v: float) -> Optional[float]:
    return None if v is None or math.isnan(v) else float(v)


def _s(v, none="-") -> str:
    if v is None:
        return none
    return repr(v) if isinstance(v, float) else str(v)


class _CurveDone(Exception):
    def __init__(self, curves):
        self.curves = curves


class CurveRecorder(GbtRegressor):
    """Runs the recursion down to one time index, then fits there with many trees."""

    def __init__(self, step: int, n_trees: int):
        self.step, self.n_trees = step, n_trees

    def expect(self, i, x, dw, dt, z_targets, y_target, config):
        if i != self.step:
            return super().expect(i, x, dw, dt, z_targets, y_target, config)
        from .gbt import BoostingData
        seed = np.random.SeedSequence([config.seed, i]).generate_state(1)[0]
        data = BoostingData(x, config.gbt_y.split_ratio, int(seed))
        out = {}
        ym, _ = data.fit_many(y_target, replace(config.gbt_y, n_trees=self.n_trees))
        out["y"] = (ym[0].train_curve, ym[0].test_curve)
        if z_targets is not None:
            zm, _ = data.fit_many(z_targets, replace(config.gbt_z, n_trees=self.n_trees))
            out["z"] = (np.mean([m.train_curve for m in zm], axis=0),
                        np.mean([m.test_curve for m in zm], axis=0))
        raise _CurveDone(out)


def learning_curves(problem, config: SolverConfig, step: int, n_trees: int) -> dict:
    """{"y": (train, test), "z": (train, test)} MSE after k = 0..n_trees trees at ``step``.

    The Z curve is the average over coordinates of the per-coordinate curves.
    """
    if not 1 <= step < config.grid.n_steps:
        raise ConfigurationError(f"curve step must lie in 1..{config.grid.n_steps - 1}")
    try:
        solve_with_regressor(problem, config, CurveRecorder(step, n_trees))
    except _CurveDone as done:
        return done.curves
    raise ConfigurationError("curve step was never reached")


def cmd_curve(cfg: CliConfig) -> str:
    problem = _problem(cfg)
    sc = solver_config(cfg, problem)
    try:
        curves = learning_curves(problem, sc, cfg.curve_step, cfg.curve_trees)
    except ConfigurationError as exc:
        raise UsageError(f"--curve-step: {exc}") from None
    prefix = cfg.output or f"curve_{cfg.example}_d{cfg.dim}"
    head = ["# " + ln for ln in json.dumps(_meta(cfg), sort_keys=True, indent=1).splitlines()]
    written = []
    for comp, (train, test) in sorted(curves.items()):
        for part, arr in (("train", train), ("test", test)):
            path = f"{prefix}.{comp}.{part}.dat"
            lines = head + [f"# {comp} {part} MSE after k trees", "k mse"]
            lines += [f"{k} {float(v)!r}" for k, v in enumerate(arr)]
            _write(path, "\n".join(lines) + "\n")
            written.append(path)
    y_test = curves["y"][1]
    return (f"{cfg.example} step {cfg.curve_step}: wrote {len(written)} files, "
            f"Y test MSE minimal at k={int(np.argmin(y_test))}")


def cmd_scaling(cfg: CliConfig) -> str:
    vals = _values(cfg)
    if cfg.sweep == "d":
        sc = solver_config(cfg)
        source = lambda d: _problem(cfg, d)
    else:
        source = _problem(cfg)
        sc = solver_config(cfg, source)
    try:
        res = scaling_probe(source, sc, cfg.sweep, vals)
    except ConfigurationError as exc:
        raise UsageError(str(exc)) from None
    meta = _meta(cfg)
    rows = list(zip(res.values, res.wall_times))
    if cfg.format == "json":
        text = json.dumps({"config": meta, "axis": res.axis, "slope": res.slope,
                           "rows": [{"value": v, "wall_time": t} for v, t in rows]},
                          sort_keys=True, indent=1) + "\n"
    elif cfg.format == "md":
        lines = ["<!-- config", json.dumps(meta, sort_keys=True, indent=1), "-->", "",
                 f"| {res.axis} | wall time [s] |", "|---|---|"]
        lines += [f"| {v} | {t:.3f} |" for v, t in rows]
        lines += ["", f"log-log slope: {res.slope:.3f}"]
        text = "\n".join(lines) + "\n"
    else:
        head = ["# " + ln for ln in json.dumps(meta, sort_keys=True, indent=1).splitlines()]
        head.append(f"# slope={res.slope!r}")
        text = "\n".join(head + [f"{res.axis},wall_time"] + [f"{v},{t!r}" for v, t in rows])
        text += "\n"
    _write(cfg.output, text)
    return f"{cfg.example} scaling in {res.axis}: slope {res.slope:.3f}"


def cmd_convergence(cfg: CliConfig) -> str:
    problem = _problem(cfg)
    sc = solver_config(cfg, problem)
    steps = _values(cfg) if cfg.values else [5, 10, 20]
    try:
        res = convergence_probe(problem, sc, steps, n_runs=cfg.runs, base_seed=cfg.seed,
                                oracle=_regressor(cfg))
    except ConfigurationError as exc:
        raise UsageError(str(exc)) from None
    orders = (None,) + res.orders
    meta = _meta(cfg)
    if cfg.format == "json":
        text = json.dumps({"config": meta, "rows": [
            {"N_T": n, "error_y": ey, "error_z": ez, "order": o}
            for n, ey, ez, o in zip(res.steps, res.error_y, res.error_z, orders)]},
            sort_keys=True, indent=1) + "\n"
    elif cfg.format == "md":
        lines = ["<!-- config", json.dumps(meta, sort_keys=True, indent=1), "-->", "",
                 "| N_T | error_y | error_z | order |", "|---|---|---|---|"]
        lines += [f"| {n} | {ey:.6g} | {_s(ez)} | {'-' if o is None else f'{o:.3f}'} |"
                  for n, ey, ez, o in zip(res.steps, res.error_y, res.error_z, orders)]
        text = "\n".join(lines) + "\n"
    else:
        head = ["# " + ln for ln in json.dumps(meta, sort_keys=True, indent=1).splitlines()]
        body = ["N_T,error_y,error_z,order"]
        body += [f"{n},{ey!r},{_s(ez, '')},{_s(o, '')}"
                 for n, ey, ez, o in zip(res.steps, res.error_y, res.error_z, orders)]
        text = "\n".join(head + body) + "\n"
    _write(cfg.output, text)
    return f"{cfg.example} convergence: orders {', '.join(f'{o:.2f}' for o in res.orders)}"


_DISPATCH = {"solve": cmd_solve, "experiment": cmd_experiment, "curve": cmd_curve,
             "scaling": cmd_scaling, "convergence": cmd_convergence}


def run(cfg: CliConfig) -> int:
    try:
        # non-finite values are detected and reported explicitly
        with np.errstate(over="ignore", invalid="ignore"):
            summary = _DISPATCH[cfg.command](cfg)
    except UsageError as exc:
        print(f"bsdegbt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalFailure as exc:
        print(f"bsdegbt: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"bsdegbt: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(summary, file=sys.stderr if cfg.output is None else sys.stdout)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        build_parser().print_help()
        return EXIT_OK
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        print(f"bsdegbt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"bsdegbt: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return run(cfg)
