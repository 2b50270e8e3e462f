"""Backward theta-schemes for decoupled FBSDEs with regression-based expectations.

Scheme 1 is the Crank-Nicolson member (theta = 1/2, needs the terminal
gradient) and Scheme 2 the implicit Euler member (theta = 1). One backward step
from t_{i+1} to t_i builds a combined regression target per equation:

    scheme 1   Z: (2/dt) y' dW + f' dW - z'       Y: y' + dt/2 f'
    scheme 2   Z: (1/dt) y' dW                    Y: y'

where primes denote values at t_{i+1} and f' = f(t_{i+1}, X', y', z'). The
conditional expectation of each target given X_i is estimated by a regressor,
and the implicit Y equation y = E[.] + theta dt f(t_i, X_i, y, z) is solved by
a fixed number of Picard sweeps.
"""
from __future__ import annotations

import enum
import itertools
import time
from dataclasses import dataclass, field, replace
from typing import Optional, Protocol

import numpy as np

from .gbt import BoostingData, GbtHyperParams
from .paths import (EulerGeneric, GeometricBrownian, PathEnsemble, ScaledBrownian, TimeGrid,
                    build_grid, sample_paths)
from .problems import BsdeProblem


class ConfigurationError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    pass


class Scheme(str, enum.Enum):
    SCHEME1 = "scheme1"
    SCHEME2 = "scheme2"
    MC_SHORTCUT = "shortcut"

    @property
    def theta(self) -> float:
        return 0.5 if self is Scheme.SCHEME1 else 1.0


@dataclass(frozen=True)
class SolverConfig:
    scheme: Scheme
    grid: TimeGrid
    n_samples: int
    picard_iters: int = 10
    gbt_y: GbtHyperParams = GbtHyperParams()
    gbt_z: GbtHyperParams = GbtHyperParams()
    seed: int = 0
    # shortcut only: True uses the terminal gradient (scheme 1 estimator)
    shortcut_gradient: bool = True
    # drop interior Z regressions when the driver ignores z (Y is unchanged)
    skip_unused_z: bool = False
    keep_values: bool = False

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if self.n_samples < 2:
            raise ConfigurationError(f"need at least 2 samples, got {self.n_samples}")
        if self.picard_iters < 1:
            raise ConfigurationError("picard_iters must be >= 1")
        if self.seed < 0:
            raise ConfigurationError("seed must be non-negative")

    @property
    def effective_scheme(self) -> Scheme:
        """Scheme run on the grid; the shortcut is a one-step scheme 1 or 2."""
        if self.scheme is Scheme.MC_SHORTCUT:
            return Scheme.SCHEME1 if self.shortcut_gradient else Scheme.SCHEME2
        return self.scheme

    @property
    def effective_grid(self) -> TimeGrid:
        if self.scheme is Scheme.MC_SHORTCUT:
            return build_grid(self.grid.maturity, 1)
        return self.grid


@dataclass
class StepValues:
    """Values and regression diagnostics at one time index."""

    index: int
    y: Optional[np.ndarray] = None
    z: Optional[np.ndarray] = None
    y_train_mse: float = float("nan")
    y_test_mse: float = float("nan")
    z_train_mse: float = float("nan")
    z_test_mse: float = float("nan")
    seconds: float = 0.0


@dataclass
class SolutionEstimate:
    y0: float
    z0: np.ndarray
    per_step: list[StepValues] = field(default_factory=list)
    wall_time: float = 0.0
    seed: int = 0


# ---------------------------------------------------------------------------
# conditional expectation estimators


class Regressor(Protocol):
    def expect(self, i: int, x: np.ndarray, dw: np.ndarray, dt: float,
               z_targets: Optional[np.ndarray], y_target: np.ndarray,
               config: SolverConfig) -> tuple[Optional[np.ndarray], np.ndarray, dict]:
        """Estimates of E[target | X_i] at every sample, plus diagnostics."""


def _step_seed(seed: int, i: int) -> int:
    return int(np.random.SeedSequence([seed, i]).generate_state(1)[0])


class GbtRegressor:
    """Boosted trees on X_i; plain sample means at t_0 where X_0 is constant."""

    def expect(self, i, x, dw, dt, z_targets, y_target, config):
        M = x.shape[0]
        if i == 0:
            zh = None if z_targets is None else np.broadcast_to(z_targets.mean(axis=0), z_targets.shape)
            return zh, np.full(M, y_target.mean()), {}
        seed = _step_seed(config.seed, i)
        diag = {}
        data_y = BoostingData(x, config.gbt_y.split_ratio, seed)
        zh = None
        if z_targets is not None:
            data_z = data_y
            if config.gbt_z.split_ratio != config.gbt_y.split_ratio:
                data_z = BoostingData(x, config.gbt_z.split_ratio, seed)
            models, zp = data_z.fit_many(z_targets, config.gbt_z, keep_models=True)
            zh = np.ascontiguousarray(zp.T)
            diag["z_train_mse"] = float(np.mean([m.train_curve[-1] for m in models]))
            diag["z_test_mse"] = float(np.mean([m.test_curve[-1] for m in models]))
        models, yp = data_y.fit_many(y_target, config.gbt_y, keep_models=True)
        diag["y_train_mse"] = float(models[0].train_curve[-1])
        diag["y_test_mse"] = float(models[0].test_curve[-1])
        return zh, yp[0], diag


def gaussian_moment(k: int, var: float) -> float:
    if k % 2:
        return 0.0
    return float(np.prod(np.arange(k - 1, 0, -2, dtype=np.float64))) * var ** (k // 2)


class PolynomialOracle:
    """Exact conditional expectations for targets polynomial in (X_i, dW_i).

    Fits every target by least squares on all monomials of total degree
    <= ``degree`` in (x, dW) and then integrates the dW part against its
    N(0, dt) law. When the targets lie in that span the result is exact up
    to rounding, so a solve driven by this oracle carries time-discretization
    error only.
    """

    def __init__(self, degree: int = 2):
        self.degree = degree

    def _powers(self, n_vars: int) -> list[tuple[int, ...]]:
        out = []
        for total in range(self.degree + 1):
            for combo in itertools.combinations_with_replacement(range(n_vars), total):
                p = [0] * n_vars
                for v in combo:
                    p[v] += 1
                out.append(tuple(p))
        return out

    def expect(self, i, x, dw, dt, z_targets, y_target, config):
        d = x.shape[1]
        xw = np.hstack([x, dw])
        powers = self._powers(2 * d)
        design = np.empty((x.shape[0], len(powers)))
        integrated = np.empty_like(design)
        for c, p in enumerate(powers):
            px = np.prod(x ** np.array(p[:d]), axis=1)
            design[:, c] = np.prod(xw ** np.array(p), axis=1)
            integrated[:, c] = px * np.prod([gaussian_moment(k, dt) for k in p[d:]])
        cols = [y_target[:, None]] if z_targets is None else [z_targets, y_target[:, None]]
        rhs = np.hstack(cols)
        coef, *_ = np.linalg.lstsq(design, rhs, rcond=None)
        est = integrated @ coef
        if z_targets is None:
            return None, est[:, 0], {}
        return est[:, :d], est[:, d], {}


# ---------------------------------------------------------------------------
# building blocks


def picard_solve_y(e_part, z, x, t, dt, theta, driver, iters=10):
    """Fixed-point sweeps for y = e_part + theta*dt*f(t, x, y, z) from y = e_part."""
    if iters < 1:
        raise ValueError("iters must be >= 1")
    y = np.array(e_part, dtype=np.float64, copy=True)
    for _ in range(iters):
        fy = np.asarray(driver(t, x, y, z), dtype=np.float64)
        if not np.all(np.isfinite(fy)):
            raise NumericalFailure(f"driver returned non-finite values at t={t:g}")
        y = e_part + theta * dt * fy
    return y


def terminal_z(problem: BsdeProblem, x: np.ndarray) -> np.ndarray:
    """Z_T = b(T, x)^T grad g(x) for the problem's forward dynamics."""
    grad = np.asarray(problem.terminal_gradient(x), dtype=np.float64)
    sde = problem.sde
    if isinstance(sde, ScaledBrownian):
        return grad * np.asarray(sde.scale, dtype=np.float64)
    if isinstance(sde, GeometricBrownian):
        return grad * np.asarray(sde.sigma, dtype=np.float64) * x
    if isinstance(sde, EulerGeneric):
        b = np.asarray(sde.diffusion(problem.maturity, x), dtype=np.float64)
        if b.ndim == 3:
            return np.einsum("mjk,mj->mk", b, grad)
        return grad * b
    raise TypeError(f"unsupported dynamics {type(sde).__name__}")


def _check(arr, what, i):
    if not np.all(np.isfinite(arr)):
        raise NumericalFailure(f"non-finite {what} at time step {i}")


def theta_backstep(i: int, paths: PathEnsemble, nxt: StepValues, problem: BsdeProblem,
                   config: SolverConfig, scheme: Scheme, regressor: Regressor) -> StepValues:
    """One step from t_{i+1} back to t_i; ``nxt`` must carry y (and z for scheme 1)."""
    start = time.perf_counter()
    grid = paths.grid
    t_i, t_n = grid.times[i], grid.times[i + 1]
    dt = t_n - t_i
    x_i, x_n, dw = paths.X[:, i], paths.X[:, i + 1], paths.dW[:, i]
    y_n, z_n = nxt.y, nxt.z
    d = paths.dim
    want_z = not (config.skip_unused_z and problem.z_free and i > 0)

    if scheme is Scheme.SCHEME1:
        z_arg = z_n if z_n is not None else np.zeros((paths.n_samples, d))
        f_n = np.asarray(problem.driver(t_n, x_n, y_n, z_arg), dtype=np.float64)
        _check(f_n, "driver", i + 1)
        y_target = y_n + 0.5 * dt * f_n
        if want_z and z_n is not None:
            z_targets = (2.0 / dt) * y_n[:, None] * dw + f_n[:, None] * dw - z_n
        elif want_z:
            # z_{i+1} was skipped: fall back to the one-sided estimator
            z_targets = y_n[:, None] * dw / dt
        else:
            z_targets = None
    else:
        y_target = y_n
        z_targets = y_n[:, None] * dw / dt if want_z else None

    z_hat, e_part, diag = regressor.expect(i, x_i, dw, dt, z_targets, y_target, config)
    if z_hat is None:
        z_i = None
        z_eval = np.zeros((paths.n_samples, d))
    else:
        z_i = np.ascontiguousarray(z_hat)
        _check(z_i, "Z estimate", i)
        z_eval = z_i
    _check(e_part, "Y regression", i)
    y_i = picard_solve_y(e_part, z_eval, x_i, t_i, dt, scheme.theta, problem.driver,
                         config.picard_iters)
    _check(y_i, "Y", i)
    return StepValues(i, y_i, z_i, seconds=time.perf_counter() - start, **diag)


def scheme1_backstep(i, paths, nxt, problem, config, regressor=None):
    return theta_backstep(i, paths, nxt, problem, config, Scheme.SCHEME1,
                          regressor or GbtRegressor())


def scheme2_backstep(i, paths, nxt, problem, config, regressor=None):
    return theta_backstep(i, paths, nxt, problem, config, Scheme.SCHEME2,
                          regressor or GbtRegressor())


# ---------------------------------------------------------------------------
# drivers


def _validate(problem: BsdeProblem, config: SolverConfig) -> None:
    if config.effective_scheme is Scheme.SCHEME1 and not problem.has_gradient:
        raise ConfigurationError(
            f"{problem.name} has no terminal gradient; scheme 1 and the gradient shortcut need one")
    if abs(config.grid.maturity - problem.maturity) > 1e-12 * problem.maturity:
        raise ConfigurationError(
            f"grid maturity {config.grid.maturity} differs from the problem's {problem.maturity}")


def solve_with_regressor(problem: BsdeProblem, config: SolverConfig,
                         regressor: Regressor) -> SolutionEstimate:
    _validate(problem, config)
    scheme = config.effective_scheme
    grid = config.effective_grid
    start = time.perf_counter()
    paths = sample_paths(problem.sde, problem.x0, grid, config.n_samples, config.seed)
    N = grid.n_steps
    x_T = paths.X[:, N]
    y = np.asarray(problem.terminal(x_T), dtype=np.float64)
    _check(y, "terminal value", N)
    z = None
    if scheme is Scheme.SCHEME1:
        z = terminal_z(problem, x_T)
        _check(z, "terminal Z", N)
    cur = StepValues(N, y, z)
    steps = []
    for i in range(N - 1, -1, -1):
        cur = theta_backstep(i, paths, cur, problem, config, scheme, regressor)
        if cur.z is None and i == 0:
            raise NumericalFailure("no Z estimate at t_0")
        steps.append(cur if config.keep_values else replace(cur, y=None, z=None))
    y0 = float(cur.y[0])
    z0 = np.array(cur.z[0], dtype=np.float64)
    return SolutionEstimate(y0, z0, steps[::-1], time.perf_counter() - start, config.seed)


def solve(problem: BsdeProblem, config: SolverConfig) -> SolutionEstimate:
    """Run the configured scheme with boosted-tree regressions."""
    return solve_with_regressor(problem, config, GbtRegressor())


def solve_with_oracle(problem: BsdeProblem, config: SolverConfig,
                      oracle: Optional[Regressor] = None) -> SolutionEstimate:
    """Same recursion with an exact conditional-expectation oracle."""
    return solve_with_regressor(problem, config, oracle or PolynomialOracle())


def mc_shortcut(problem: BsdeProblem, n_samples: int, seed: int,
                with_gradient: bool = True, picard_iters: int = 10) -> tuple[float, np.ndarray]:
    """Single-step Monte-Carlo estimate of (Y_0, Z_0) over the whole horizon."""
    config = SolverConfig(Scheme.MC_SHORTCUT, build_grid(problem.maturity, 1), n_samples,
                          picard_iters=picard_iters, seed=seed, shortcut_gradient=with_gradient)
    est = solve(problem, config)
    return est.y0, est.z0
