"""Multi-run error statistics, scaling and convergence probes, table writers.

Errors follow the usual benchmark convention: the mean absolute error of Y_0
over independent runs, the mean over runs of the coordinate-averaged absolute
error of Z_0, and sample standard deviations (n - 1 denominator) of Y_0 and of
the coordinate mean of Z_0.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .gbt import GbtHyperParams
from .paths import build_grid
from .problems import BsdeProblem
from .schemes import (ConfigurationError, Regressor, Scheme, SolutionEstimate, SolverConfig,
                      solve, solve_with_regressor)

CSV_COLUMNS = ("example", "d", "T", "N_T", "M", "scheme", "K_y", "K_z", "eta", "error_y",
               "std_y", "error_z", "std_z", "runtime_s", "seed")
# extra columns that make a CSV row a lossless copy of RunStats
RAW_COLUMNS = ("n_runs", "raw_y0", "raw_z0", "wall_times")


@dataclass(frozen=True)
class RunStats:
    n_runs: int
    error_y: float
    std_y: float
    error_z: Optional[float]
    std_z: Optional[float]
    mean_wall_time: float
    raw_y0: tuple[float, ...]
    raw_z0: tuple[tuple[float, ...], ...]
    wall_times: tuple[float, ...] = ()

    def __post_init__(self):
        if self.n_runs < 1:
            raise ValueError("n_runs must be >= 1")
        if len(self.raw_y0) != self.n_runs or len(self.raw_z0) != self.n_runs:
            raise ValueError("raw values do not match n_runs")

    @property
    def mean_y0(self) -> float:
        return float(np.mean(self.raw_y0))

    def to_dict(self) -> dict:
        return {"n_runs": self.n_runs, "error_y": self.error_y, "std_y": self.std_y,
                "error_z": self.error_z, "std_z": self.std_z,
                "mean_wall_time": self.mean_wall_time, "raw_y0": list(self.raw_y0),
                "raw_z0": [list(z) for z in self.raw_z0], "wall_times": list(self.wall_times)}

    @classmethod
    def from_dict(cls, d: dict) -> "RunStats":
        return cls(int(d["n_runs"]), float(d["error_y"]), float(d["std_y"]),
                   None if d["error_z"] is None else float(d["error_z"]),
                   None if d["std_z"] is None else float(d["std_z"]),
                   float(d["mean_wall_time"]), tuple(float(v) for v in d["raw_y0"]),
                   tuple(tuple(float(v) for v in z) for z in d["raw_z0"]),
                   tuple(float(v) for v in d.get("wall_times", ())))


def reference_values(problem: BsdeProblem) -> tuple[Optional[float], Optional[np.ndarray]]:
    """(Y_0, Z_0) from the closed form when available, else the stored references."""
    y_ref, z_ref = problem.reference_y0, problem.reference_z0
    if problem.analytic is not None:
        y, z = problem.analytic(0.0, problem.x0[None, :])
        if y_ref is None:
            y_ref = float(np.asarray(y)[0])
        if z_ref is None:
            z_ref = np.asarray(z, dtype=np.float64)[0]
    return y_ref, None if z_ref is None else np.asarray(z_ref, dtype=np.float64)


def _std(values: np.ndarray) -> float:
    return float(np.std(values, ddof=1)) if len(values) > 1 else 0.0


def summarize(y_ref: float, z_ref: Optional[np.ndarray], y0s: Sequence[float],
              z0s: Sequence[Sequence[float]], wall_times: Sequence[float]) -> RunStats:
    """Error statistics from per-run estimates."""
    y = np.asarray(y0s, dtype=np.float64)
    z = np.asarray(z0s, dtype=np.float64)
    error_y = float(np.mean(np.abs(y_ref - y)))
    error_z = std_z = None
    if z_ref is not None:
        error_z = float(np.mean(np.mean(np.abs(z_ref[None, :] - z), axis=1)))
        std_z = _std(z.mean(axis=1))
    times = tuple(float(t) for t in wall_times)
    return RunStats(len(y), error_y, _std(y), error_z, std_z, float(np.mean(times)),
                    tuple(float(v) for v in y), tuple(tuple(float(v) for v in row) for row in z),
                    times)


def run_experiment(problem: BsdeProblem, config: SolverConfig, n_runs: int = 10,
                   base_seed: int = 0, regressor: Optional[Regressor] = None,
                   workers: int = 1) -> RunStats:
    """Solve ``n_runs`` times with seeds base_seed + k and aggregate the errors."""
    if n_runs < 1:
        raise ConfigurationError("n_runs must be >= 1")
    y_ref, z_ref = reference_values(problem)
    if y_ref is None:
        raise ConfigurationError(f"{problem.name} (d={problem.dim}) has no reference Y0")

    def one(k: int) -> SolutionEstimate:
        cfg = replace(config, seed=base_seed + k, keep_values=False)
        if regressor is None:
            return solve(problem, cfg)
        return solve_with_regressor(problem, cfg, regressor)

    if workers > 1 and n_runs > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(one, range(n_runs)))
    else:
        runs = [one(k) for k in range(n_runs)]
    return summarize(y_ref, z_ref, [r.y0 for r in runs], [r.z0 for r in runs],
                     [r.wall_time for r in runs])


# ---------------------------------------------------------------------------
# probes


@dataclass(frozen=True)
class ScalingResult:
    axis: str
    values: tuple
    wall_times: tuple[float, ...]

    @property
    def slope(self) -> float:
        """Least-squares slope of log(time) against log(value)."""
        return loglog_slope(self.values, self.wall_times)


def loglog_slope(xs, ys) -> float:
    return float(np.polyfit(np.log(np.asarray(xs, dtype=float)),
                            np.log(np.asarray(ys, dtype=float)), 1)[0])


ProblemSource = Union[BsdeProblem, Callable[[int], BsdeProblem]]


def scaling_probe(problem: ProblemSource, config: SolverConfig, axis: str,
                  values: Sequence[int], repeats: int = 1) -> ScalingResult:
    """Wall time of single solves as one size parameter varies.

    ``axis`` is one of "M", "N_T", "d", "K". For "d" the problem must be a
    callable building the problem for a given dimension. With ``repeats`` > 1
    the fastest of the repeated solves is kept.
    """
    values = tuple(values)
    if len(values) < 3 or any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigurationError("scaling needs at least 3 ascending values")
    if axis not in ("M", "N_T", "d", "K"):
        raise ConfigurationError(f"unknown scaling axis {axis!r}")
    if axis == "d" and isinstance(problem, BsdeProblem):
        raise ConfigurationError("the d axis needs a problem factory")
    # a tiny solve first, so compilation of the tree kernels is not timed
    warm = problem(values[0]) if axis == "d" else (
        problem if isinstance(problem, BsdeProblem) else problem(None))
    solve(warm, replace(config, n_samples=min(config.n_samples, 64),
                        grid=build_grid(config.grid.maturity, min(config.grid.n_steps, 2))))
    times = []
    for v in values:
        prob = problem(v) if axis == "d" else (
            problem if isinstance(problem, BsdeProblem) else problem(None))
        cfg = config
        if axis == "M":
            cfg = replace(cfg, n_samples=int(v))
        elif axis == "N_T":
            cfg = replace(cfg, grid=build_grid(cfg.grid.maturity, int(v)))
        elif axis == "K":
            cfg = replace(cfg, gbt_y=replace(cfg.gbt_y, n_trees=int(v)),
                          gbt_z=replace(cfg.gbt_z, n_trees=int(v)))
        times.append(min(solve(prob, cfg).wall_time for _ in range(repeats)))
    return ScalingResult(axis, values, tuple(times))


@dataclass(frozen=True)
class ConvergenceResult:
    steps: tuple[int, ...]
    error_y: tuple[float, ...]
    error_z: tuple[Optional[float], ...]

    @property
    def orders(self) -> tuple[float, ...]:
        """log2 of successive error ratios (meaningful for doubling N_T)."""
        e = self.error_y
        return tuple(math.log2(a / b) for a, b in zip(e, e[1:]))

    @property
    def slope(self) -> float:
        """Fitted order: minus the log-log slope of error_y against N_T."""
        return -loglog_slope(self.steps, self.error_y)


def convergence_probe(problem: BsdeProblem, config: SolverConfig, steps: Sequence[int],
                      n_runs: int = 1, base_seed: int = 0,
                      oracle: Optional[Regressor] = None) -> ConvergenceResult:
    """error_y and error_z for each number of time steps."""
    if reference_values(problem)[0] is None:
        raise ConfigurationError(f"{problem.name} has no reference Y0")
    ey, ez = [], []
    for n in steps:
        cfg = replace(config, grid=build_grid(problem.maturity, int(n)))
        stats = run_experiment(problem, cfg, n_runs, base_seed, regressor=oracle)
        ey.append(stats.error_y)
        ez.append(stats.error_z)
    return ConvergenceResult(tuple(int(n) for n in steps), tuple(ey), tuple(ez))


# ---------------------------------------------------------------------------
# tables


@dataclass(frozen=True)
class ExperimentRecord:
    """One table cell group: the setting and its statistics."""

    example: str
    d: int
    T: float
    N_T: int
    M: int
    scheme: str
    K_y: int
    K_z: int
    eta: float
    seed: int
    stats: RunStats

    @classmethod
    def build(cls, problem: BsdeProblem, config: SolverConfig, stats: RunStats,
              base_seed: int) -> "ExperimentRecord":
        grid = config.effective_grid
        return cls(problem.name, problem.dim, problem.maturity, grid.n_steps, config.n_samples,
                   config.scheme.value, config.gbt_y.n_trees, config.gbt_z.n_trees,
                   config.gbt_z.learning_rate, base_seed, stats)

    def row(self) -> dict:
        s = self.stats
        return {"example": self.example, "d": self.d, "T": self.T, "N_T": self.N_T,
                "M": self.M, "scheme": self.scheme, "K_y": self.K_y, "K_z": self.K_z,
                "eta": self.eta, "error_y": s.error_y, "std_y": s.std_y,
                "error_z": s.error_z, "std_z": s.std_z, "runtime_s": s.mean_wall_time,
                "seed": self.seed}

    def to_dict(self) -> dict:
        out = self.row()
        out["stats"] = self.stats.to_dict()
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentRecord":
        return cls(d["example"], int(d["d"]), float(d["T"]), int(d["N_T"]), int(d["M"]),
                   d["scheme"], int(d["K_y"]), int(d["K_z"]), float(d["eta"]), int(d["seed"]),
                   RunStats.from_dict(d["stats"]))


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _header(meta: Optional[dict]) -> list[str]:
    if not meta:
        return []
    return ["# " + line for line in json.dumps(meta, sort_keys=True, indent=1).splitlines()]


def records_to_csv(records: Sequence[ExperimentRecord], meta: Optional[dict] = None) -> str:
    """CSV text; ``meta`` is embedded as JSON in leading comment lines."""
    buf = io.StringIO()
    for line in _header(meta):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS + RAW_COLUMNS)
    for r in records:
        row = r.row()
        s = r.stats
        raws = [s.n_runs, json.dumps(list(s.raw_y0)), json.dumps([list(z) for z in s.raw_z0]),
                json.dumps(list(s.wall_times))]
        w.writerow([_fmt(row[c]) for c in CSV_COLUMNS] + [_fmt(v) for v in raws])
    return buf.getvalue()


def _split_comments(text: str) -> tuple[Optional[dict], list[str]]:
    lines = text.splitlines()
    comment = [ln[2:] for ln in lines if ln.startswith("# ")]
    body = [ln for ln in lines if not ln.startswith("#")]
    meta = json.loads("\n".join(comment)) if comment else None
    return meta, body


def records_from_csv(text: str) -> tuple[list[ExperimentRecord], Optional[dict]]:
    meta, body = _split_comments(text)
    out = []
    for row in csv.DictReader(body):
        opt = lambda k: None if row[k] == "" else float(row[k])
        stats = RunStats(int(row["n_runs"]), float(row["error_y"]), float(row["std_y"]),
                         opt("error_z"), opt("std_z"), float(row["runtime_s"]),
                         tuple(json.loads(row["raw_y0"])),
                         tuple(tuple(z) for z in json.loads(row["raw_z0"])),
                         tuple(json.loads(row["wall_times"])))
        out.append(ExperimentRecord(row["example"], int(row["d"]), float(row["T"]),
                                    int(row["N_T"]), int(row["M"]), row["scheme"],
                                    int(row["K_y"]), int(row["K_z"]), float(row["eta"]),
                                    int(row["seed"]), stats))
    return out, meta


def records_to_json(records: Sequence[ExperimentRecord], meta: Optional[dict] = None) -> str:
    doc = {"config": meta or {}, "records": [r.to_dict() for r in records]}
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def records_from_json(text: str) -> tuple[list[ExperimentRecord], dict]:
    doc = json.loads(text)
    return [ExperimentRecord.from_dict(r) for r in doc["records"]], doc["config"]


def _cell(err: Optional[float], std: Optional[float]) -> str:
    if err is None:
        return "-"
    return f"{err:.5f}({std:.5f})"


def records_to_markdown(records: Sequence[ExperimentRecord], column: str = "M",
                        meta: Optional[dict] = None) -> str:
    """Benchmark layout: one row block per (example, d, T, scheme), one column per value
    of ``column`` ("M" or "N_T"), cells error(std) with a runtime row underneath."""
    if column not in ("M", "N_T"):
        raise ValueError("column must be 'M' or 'N_T'")
    other = "N_T" if column == "M" else "M"
    cols = sorted({getattr(r, column) for r in records})
    groups: dict[tuple, dict] = {}
    for r in records:
        key = (r.example, r.d, r.T, r.scheme, getattr(r, other))
        groups.setdefault(key, {})[getattr(r, column)] = r
    lines = []
    if meta:
        lines += ["<!-- config", json.dumps(meta, sort_keys=True, indent=1), "-->", ""]
    lines.append("| example | d | T | scheme | " + other + " | row | "
                 + " | ".join(f"{column}={c}" for c in cols) + " |")
    lines.append("|" + "---|" * (6 + len(cols)))
    for key in sorted(groups):
        ex, d, T, scheme, o = key
        cells = groups[key]
        rows = [("error_y(std)", lambda r: _cell(r.stats.error_y, r.stats.std_y)),
                ("error_z(std)", lambda r: _cell(r.stats.error_z, r.stats.std_z)),
                ("mean Y0", lambda r: f"{r.stats.mean_y0:.5f}"),
                ("runtime [s]", lambda r: f"{r.stats.mean_wall_time:.2f}")]
        for label, fmt in rows:
            vals = [fmt(cells[c]) if c in cells else "" for c in cols]
            lines.append(f"| {ex} | {d} | {T:g} | {scheme} | {o} | {label} | "
                         + " | ".join(vals) + " |")
    return "\n".join(lines) + "\n"
