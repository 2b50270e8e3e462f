"""Time grids and seeded forward-path ensembles.

Random stream layout: every Gaussian draw is addressed by (sample m, fine
step i, coordinate j) and taken from word ``(m * n_fine + i) * d + j`` of a
Philox4x64 stream keyed by the seed. The 64-bit word is mapped to a uniform on
(0, 1) from its top 53 bits and then through the inverse normal CDF. Because
Philox is counter based, any block of samples can be produced on its own and
the result is independent of how the work is chunked.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.special import ndtri

_WORDS_PER_BLOCK = 4
_CHUNK_WORDS = 1 << 22


@dataclass(frozen=True)
class TimeGrid:
    maturity: float
    times: np.ndarray

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    @property
    def dt(self) -> np.ndarray:
        return np.diff(self.times)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        if t.ndim != 1 or len(t) < 2:
            raise ValueError("a time grid needs at least two points")
        if t[0] != 0.0 or t[-1] != self.maturity or np.any(np.diff(t) <= 0):
            raise ValueError("times must increase strictly from 0 to the maturity")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)


def build_grid(T: float, n_steps: int) -> TimeGrid:
    """Equidistant grid on [0, T] with ``n_steps`` steps."""
    if not T > 0 or not np.isfinite(T):
        raise ValueError(f"maturity must be positive, got {T}")
    if int(n_steps) != n_steps or n_steps < 1:
        raise ValueError(f"number of steps must be a positive integer, got {n_steps}")
    n_steps = int(n_steps)
    times = T * (np.arange(n_steps + 1) / n_steps)
    times[-1] = T
    return TimeGrid(float(T), times)


# ---------------------------------------------------------------------------
# forward dynamics


@dataclass(frozen=True)
class ScaledBrownian:
    """X_t = x0 + scale * W_t, scale a scalar or a per-coordinate vector."""

    scale: Union[float, np.ndarray] = 1.0

    def check(self, d: int) -> None:
        s = np.asarray(self.scale, dtype=np.float64)
        if s.ndim > 1 or (s.ndim == 1 and len(s) != d):
            raise ValueError(f"scale has shape {s.shape}, expected scalar or ({d},)")


@dataclass(frozen=True)
class GeometricBrownian:
    """Independent coordinates dX = mu X dt + sigma X dW, sampled exactly."""

    mu: float
    sigma: float

    def check(self, d: int) -> None:
        for name in ("mu", "sigma"):
            v = np.asarray(getattr(self, name), dtype=np.float64)
            if v.ndim > 1 or (v.ndim == 1 and len(v) != d):
                raise ValueError(f"{name} has shape {v.shape}, expected scalar or ({d},)")
        if np.any(np.asarray(self.sigma) <= 0):
            raise ValueError("sigma must be positive")


@dataclass(frozen=True)
class EulerGeneric:
    """dX = a(t, X) dt + b(t, X) dW stepped with Euler-Maruyama.

    ``drift(t, X)`` returns shape (M, d). ``diffusion(t, X)`` returns either
    (M, d) for a diagonal diffusion or (M, d, d) for a full matrix.
    ``substeps`` refines every scheme step for the simulation only.
    """

    drift: Callable[[float, np.ndarray], np.ndarray]
    diffusion: Callable[[float, np.ndarray], np.ndarray]
    substeps: int = 1

    def check(self, d: int) -> None:
        if self.substeps < 1:
            raise ValueError("substeps must be >= 1")


SdeKind = Union[ScaledBrownian, GeometricBrownian, EulerGeneric]


@dataclass(frozen=True)
class PathEnsemble:
    """Forward states X (M, N+1, d) and Brownian increments dW (M, N, d)."""

    X: np.ndarray
    dW: np.ndarray
    grid: TimeGrid
    seed: int

    @property
    def n_samples(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[2]


# ---------------------------------------------------------------------------
# random stream


def uniform_words(seed: int, start: int, count: int) -> np.ndarray:
    """Words ``start .. start+count-1`` of the stream as uniforms in (0, 1)."""
    block, lane = divmod(start, _WORDS_PER_BLOCK)
    bitgen = np.random.Philox(key=seed, counter=[block, 0, 0, 0])
    raw = bitgen.random_raw(lane + count)[lane:]
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53


def standard_normals(seed: int, n_samples: int, n_fine: int, d: int,
                     first_sample: int = 0) -> np.ndarray:
    """N(0, 1) draws for samples ``first_sample .. first_sample+n_samples-1``.

    Shape (n_samples, n_fine, d); identical to slicing a single big draw.
    """
    if seed < 0:
        raise ValueError("seed must be non-negative")
    per_sample = n_fine * d
    out = np.empty((n_samples, n_fine, d))
    flat = out.reshape(n_samples, per_sample)
    chunk = max(1, _CHUNK_WORDS // max(per_sample, 1))
    for a in range(0, n_samples, chunk):
        b = min(n_samples, a + chunk)
        u = uniform_words(seed, (first_sample + a) * per_sample, (b - a) * per_sample)
        flat[a:b] = ndtri(u).reshape(b - a, per_sample)
    return out


# ---------------------------------------------------------------------------
# samplers


def sample_paths(kind: SdeKind, x0, grid: TimeGrid, n_samples: int, seed: int) -> PathEnsemble:
    """Draw ``n_samples`` forward paths on ``grid`` started at ``x0``."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=np.float64))
    if x0.ndim != 1:
        raise ValueError("x0 must be a vector")
    if n_samples < 1:
        raise ValueError(f"need at least one sample, got {n_samples}")
    d, N = len(x0), grid.n_steps
    kind.check(d)
    dt = grid.dt
    sub = kind.substeps if isinstance(kind, EulerGeneric) else 1
    xi = standard_normals(seed, n_samples, N * sub, d)
    fine_dt = np.repeat(dt / sub, sub)
    fine_dW = xi * np.sqrt(fine_dt)[None, :, None]
    if sub == 1:
        dW = fine_dW
    else:
        dW = fine_dW.reshape(n_samples, N, sub, d).sum(axis=2)

    X = np.empty((n_samples, N + 1, d))
    X[:, 0] = x0
    if isinstance(kind, ScaledBrownian):
        scale = np.asarray(kind.scale, dtype=np.float64)
        for i in range(N):
            X[:, i + 1] = X[:, i] + scale * dW[:, i]
    elif isinstance(kind, GeometricBrownian):
        mu = np.asarray(kind.mu, dtype=np.float64)
        sig = np.asarray(kind.sigma, dtype=np.float64)
        for i in range(N):
            X[:, i + 1] = X[:, i] * np.exp((mu - 0.5 * sig * sig) * dt[i] + sig * dW[:, i])
    elif isinstance(kind, EulerGeneric):
        x = X[:, 0].copy()
        for i in range(N):
            for s in range(sub):
                k = i * sub + s
                t = grid.times[i] + s * fine_dt[k]
                x = x + _euler_increment(kind, t, x, fine_dt[k], fine_dW[:, k])
            X[:, i + 1] = x
    else:
        raise TypeError(f"unsupported dynamics {type(kind).__name__}")
    X.setflags(write=False)
    dW.setflags(write=False)
    return PathEnsemble(X, dW, grid, seed)


def _euler_increment(kind: EulerGeneric, t: float, x: np.ndarray, h: float,
                     dw: np.ndarray) -> np.ndarray:
    a = np.asarray(kind.drift(t, x), dtype=np.float64)
    b = np.asarray(kind.diffusion(t, x), dtype=np.float64)
    if b.ndim == 3:
        noise = np.einsum("mjk,mk->mj", b, dw)
    else:
        noise = b * dw
    return a * h + noise
