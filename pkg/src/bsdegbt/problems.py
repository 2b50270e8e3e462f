"""Benchmark BSDEs with known solutions or reference values.

All callables are vectorised over samples: ``x`` has shape (M, d), ``y`` (M,)
and ``z`` (M, d); ``t`` is a scalar. ``terminal_gradient`` is the gradient of
``g`` in x; the solver turns it into a terminal Z through the diffusion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .paths import GeometricBrownian, ScaledBrownian, SdeKind

Driver = Callable[[float, np.ndarray, np.ndarray, np.ndarray], np.ndarray]
Terminal = Callable[[np.ndarray], np.ndarray]
Analytic = Callable[[float, np.ndarray], "tuple[np.ndarray, np.ndarray]"]


@dataclass(frozen=True)
class BsdeProblem:
    name: str
    dim: int
    maturity: float
    x0: np.ndarray
    sde: SdeKind
    driver: Driver
    terminal: Terminal
    terminal_gradient: Optional[Terminal] = None
    analytic: Optional[Analytic] = None
    reference_y0: Optional[float] = None
    reference_z0: Optional[np.ndarray] = None
    # True when the driver never reads z, so Z regressions do not feed back into Y
    z_free: bool = False
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        x0 = np.atleast_1d(np.asarray(self.x0, dtype=np.float64))
        if x0.shape != (self.dim,):
            raise ValueError(f"x0 has shape {x0.shape}, expected ({self.dim},)")
        object.__setattr__(self, "x0", x0)

    @property
    def has_gradient(self) -> bool:
        return self.terminal_gradient is not None


EXAMPLE_IDS = ("ex1", "ex2", "ex3", "ex4", "ex5", "ex6")
_ALIASES = {
    "ex1quadraticz": "ex1", "ex2reactiondiffusion": "ex2", "ex3tworateoption": "ex3",
    "ex4allencahn": "ex4", "ex5burgers": "ex5", "ex6oscillatory": "ex6",
}
_DEFAULT_T = {"ex1": 1.0, "ex2": 1.0, "ex3": 0.5, "ex4": 0.3, "ex5": 0.5, "ex6": 1.0}

# Y0 references for the Allen-Cahn example at T = 0.3, keyed by dimension
ALLEN_CAHN_Y0 = {10: 0.89060, 50: 1.01830, 100: 1.04510, 200: 1.06220, 300: 1.07217,
                 500: 1.08124, 1000: 1.09100, 5000: 1.10691, 10000: 1.11402}
TWO_RATE_Y0 = 21.2988


def canonical_id(name: str) -> str:
    key = name.strip().lower().replace("_", "").replace("-", "")
    key = _ALIASES.get(key, key)
    if key not in EXAMPLE_IDS:
        raise ValueError(f"unknown example {name!r}; choose from {', '.join(EXAMPLE_IDS)}")
    return key


@dataclass(frozen=True)
class ExampleSpec:
    """Selects a benchmark and its parameters; None means the example default."""

    example: str
    dim: int
    maturity: Optional[float] = None
    alpha: float = 0.4
    kappa: float = 0.7
    zeta: Optional[float] = None
    mu: float = 0.06
    sigma: Optional[float] = None
    r_lend: float = 0.04
    r_borrow: float = 0.06
    strike1: float = 120.0
    strike2: float = 150.0
    spot: float = 100.0

    def __post_init__(self):
        object.__setattr__(self, "example", canonical_id(self.example))
        if self.dim < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dim}")
        if self.maturity is not None and not self.maturity > 0:
            raise ValueError("maturity must be positive")
        if not 0.0 < self.alpha <= 0.5:
            raise ValueError(f"alpha must lie in (0, 1/2], got {self.alpha}")
        if self.sigma is not None and not self.sigma > 0:
            raise ValueError("sigma must be positive")

    @property
    def T(self) -> float:
        return self.maturity if self.maturity is not None else _DEFAULT_T[self.example]


def make_example(spec: ExampleSpec) -> BsdeProblem:
    builder = {"ex1": _quadratic_z, "ex2": _reaction_diffusion, "ex3": _two_rate_option,
               "ex4": _allen_cahn, "ex5": _burgers, "ex6": _oscillatory}[spec.example]
    return builder(spec)


def example(name: str, dim: int, **kw) -> BsdeProblem:
    return make_example(ExampleSpec(name, dim, **kw))


def analytic_solution(problem: BsdeProblem, t: float, x: np.ndarray):
    """(Y, Z) at time t for rows of x, or None when no closed form is wired."""
    if problem.analytic is None:
        return None
    if not 0.0 <= t <= problem.maturity:
        raise ValueError(f"t={t} outside [0, {problem.maturity}]")
    return problem.analytic(t, np.atleast_2d(np.asarray(x, dtype=np.float64)))


def _sum(x):
    return x.sum(axis=1)


# ---------------------------------------------------------------------------
# ex1: psi(t, w) = sin(s**alpha), s = T - t + |w|^2 / d


def _quadratic_z(spec: ExampleSpec) -> BsdeProblem:
    d, T, a = spec.dim, spec.T, spec.alpha

    def radius(t, x):
        return T - t + _sum(x * x) / d

    def phi1(s):
        return a * s ** (a - 1) * np.cos(s ** a)

    def phi2(s):
        return a * (a - 1) * s ** (a - 2) * np.cos(s ** a) - a * a * s ** (2 * a - 2) * np.sin(s ** a)

    def grad(t, x):
        return (phi1(radius(t, x)) * 2.0 / d)[:, None] * x

    def driver(t, x, y, z):
        s = radius(t, x)
        r2 = _sum(x * x) / (d * d)
        # |z|^2 - |grad psi|^2 - (d/dt + Laplacian/2) psi
        return _sum(z * z) - 4.0 * phi1(s) ** 2 * r2 - 2.0 * phi2(s) * r2

    def analytic(t, x):
        return np.sin(radius(t, x) ** a), grad(t, x)

    return BsdeProblem(
        "ex1", d, T, np.zeros(d), ScaledBrownian(1.0), driver,
        lambda x: np.sin(radius(T, x) ** a), lambda x: grad(T, x), analytic,
        reference_y0=math.sin(T ** a), reference_z0=np.zeros(d),
        params=dict(alpha=a))


# ---------------------------------------------------------------------------
# ex2: bounded reaction term, solution 1 + kappa + sin(zeta sum x) exp(zeta^2 d (t-T)/2)


def _reaction_diffusion(spec: ExampleSpec) -> BsdeProblem:
    d, T, k = spec.dim, spec.T, spec.kappa
    zeta = spec.zeta if spec.zeta is not None else 1.0 / math.sqrt(d)

    def decay(t):
        return math.exp(zeta * zeta * d * (t - T) / 2.0)

    def driver(t, x, y, z):
        gap = y - k - 1.0 - np.sin(zeta * _sum(x)) * decay(t)
        return np.minimum(1.0, gap * gap)

    def analytic(t, x):
        sx = zeta * _sum(x)
        y = 1.0 + k + np.sin(sx) * decay(t)
        zc = zeta * np.cos(sx) * decay(t)
        return y, np.repeat(zc[:, None], d, axis=1)

    def terminal(x):
        return 1.0 + k + np.sin(zeta * _sum(x))

    def gradient(x):
        return np.repeat((zeta * np.cos(zeta * _sum(x)))[:, None], d, axis=1)

    return BsdeProblem(
        "ex2", d, T, np.zeros(d), ScaledBrownian(1.0), driver, terminal, gradient, analytic,
        reference_y0=1.0 + k, reference_z0=np.full(d, zeta * decay(0.0)),
        params=dict(kappa=k, zeta=zeta))


# ---------------------------------------------------------------------------
# ex3: call spread under different lending and borrowing rates


def _two_rate_option(spec: ExampleSpec) -> BsdeProblem:
    d, T = spec.dim, spec.T
    mu, rl, rb, k1, k2 = spec.mu, spec.r_lend, spec.r_borrow, spec.strike1, spec.strike2
    sigma = spec.sigma if spec.sigma is not None else 0.2

    def driver(t, x, y, z):
        sz = _sum(z)
        return -rl * y - (mu - rl) / sigma * sz + (rb - rl) * np.maximum(0.0, sz / sigma - y)

    def terminal(x):
        m = x.max(axis=1)
        return np.maximum(m - k1, 0.0) - 2.0 * np.maximum(m - k2, 0.0)

    default = (d == 100 and T == 0.5 and mu == 0.06 and sigma == 0.2 and rl == 0.04
               and rb == 0.06 and k1 == 120.0 and k2 == 150.0 and spec.spot == 100.0)
    return BsdeProblem(
        "ex3", d, T, np.full(d, spec.spot), GeometricBrownian(mu, sigma), driver, terminal,
        reference_y0=TWO_RATE_Y0 if default else None,
        params=dict(mu=mu, sigma=sigma, r_lend=rl, r_borrow=rb, strike1=k1, strike2=k2,
                    spot=spec.spot))


# ---------------------------------------------------------------------------
# ex4: Allen-Cahn


def _allen_cahn(spec: ExampleSpec) -> BsdeProblem:
    d, T = spec.dim, spec.T

    def driver(t, x, y, z):
        return y - y ** 3

    def terminal(x):
        return np.arctan(x.max(axis=1))

    def gradient(x):
        j = np.argmax(x, axis=1)  # first maximiser on ties
        out = np.zeros_like(x)
        rows = np.arange(x.shape[0])
        out[rows, j] = 1.0 / (1.0 + x[rows, j] ** 2)
        return out

    ref = ALLEN_CAHN_Y0.get(d) if T == 0.3 else None
    return BsdeProblem("ex4", d, T, np.zeros(d), ScaledBrownian(math.sqrt(2.0)), driver,
                       terminal, gradient, reference_y0=ref, z_free=True)


# ---------------------------------------------------------------------------
# ex5: Burgers type, logistic solution


def _logistic(u):
    return 0.5 * (1.0 + np.tanh(0.5 * u))


def _burgers(spec: ExampleSpec) -> BsdeProblem:
    d, T = spec.dim, spec.T
    sigma = spec.sigma if spec.sigma is not None else d / math.sqrt(2.0)
    shift = (2.0 + d) / (2.0 * d)

    def driver(t, x, y, z):
        return (y - shift) * _sum(z)

    def analytic(t, x):
        s = _logistic(t + _sum(x) / d)
        zc = sigma / d * s * (1.0 - s)
        return s, np.repeat(zc[:, None], d, axis=1)

    def terminal(x):
        return _logistic(T + _sum(x) / d)

    def gradient(x):
        s = _logistic(T + _sum(x) / d)
        return np.repeat((s * (1.0 - s) / d)[:, None], d, axis=1)

    return BsdeProblem("ex5", d, T, np.zeros(d), ScaledBrownian(sigma), driver, terminal,
                       gradient, analytic, reference_y0=0.5,
                       reference_z0=np.full(d, sigma / d * 0.25), params=dict(sigma=sigma))


# ---------------------------------------------------------------------------
# ex6: unbounded oscillatory solution
#   u(t, x) = (T - t)/d * sum h(x_j) + cos(sum j x_j),  h = sin on x < 0, identity on x >= 0


def _oscillatory(spec: ExampleSpec) -> BsdeProblem:
    d, T = spec.dim, spec.T
    weights = np.arange(1, d + 1, dtype=np.float64)
    C = (d + 1) * (2 * d + 1) / 12.0
    x0 = np.full(d, 0.5)

    def parts(x):
        neg = x < 0
        A = np.where(neg, np.sin(x), 0.0).sum(axis=1) / d
        B = np.where(neg, 0.0, x).sum(axis=1) / d
        return A, B

    def driver(t, x, y, z):
        A, B = parts(x)
        return (1.0 + (T - t) / (2.0 * d)) * A + B + C * np.cos(x @ weights)

    def terminal(x):
        return np.cos(x @ weights)

    def gradient(x):
        return -np.sin(x @ weights)[:, None] * weights[None, :]

    A0, B0 = parts(x0[None, :])
    y0 = float(T * (A0 + B0)[0] + math.cos(float(x0 @ weights)))
    return BsdeProblem("ex6", d, T, x0, ScaledBrownian(1.0 / math.sqrt(d)), driver, terminal,
                       gradient, reference_y0=y0, z_free=True)


def oscillatory_solution(problem: BsdeProblem, t: float, x: np.ndarray) -> np.ndarray:
    """Y of the oscillatory example at (t, x); no Z is provided for it."""
    if problem.name != "ex6":
        raise ValueError("only defined for ex6")
    d, T = problem.dim, problem.maturity
    x = np.atleast_2d(x)
    h = np.where(x < 0, np.sin(x), x).sum(axis=1)
    return (T - t) / d * h + np.cos(x @ np.arange(1, d + 1, dtype=np.float64))
