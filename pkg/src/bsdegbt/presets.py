"""Default solver settings per benchmark example.

These are the settings used for the published benchmark tables; the CLI
falls back to them for any knob not given explicitly.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .gbt import GbtHyperParams
from .paths import build_grid
from .problems import BsdeProblem, canonical_id
from .schemes import Scheme, SolverConfig


@dataclass(frozen=True)
class ExamplePreset:
    scheme: Scheme
    n_steps: int
    n_samples: int
    k_y: int
    k_z: int
    learning_rate: float
    max_depth: int = 2

    def config(self, problem: BsdeProblem, seed: int = 0, **overrides) -> SolverConfig:
        gy = GbtHyperParams(n_trees=self.k_y, learning_rate=self.learning_rate,
                            max_depth=self.max_depth)
        gz = GbtHyperParams(n_trees=self.k_z, learning_rate=self.learning_rate,
                            max_depth=self.max_depth)
        kw = dict(scheme=self.scheme, grid=build_grid(problem.maturity, self.n_steps),
                  n_samples=self.n_samples, gbt_y=gy, gbt_z=gz, seed=seed)
        kw.update(overrides)
        return SolverConfig(**kw)


# oscillatory example: (K_z, K_y, N_T, M) by dimension
_OSC = {1: (10, 100, 10, 10000), 2: (8, 150, 10, 10000), 5: (2, 150, 10, 10000),
        8: (12, 12, 20, 20000), 10: (40, 40, 20, 20000), 20: (16, 16, 30, 20000),
        50: (10, 10, 400, 20000)}


def preset(example: str, dim: Optional[int] = None) -> ExamplePreset:
    ex = canonical_id(example)
    if ex in ("ex1", "ex2"):
        return ExamplePreset(Scheme.MC_SHORTCUT, 1, 10000, 20, 20, 0.9)
    if ex == "ex3":
        return ExamplePreset(Scheme.SCHEME2, 10, 10000, 20, 20, 0.9)
    if ex == "ex4":
        return ExamplePreset(Scheme.SCHEME1, 10, 2000, 20, 20, 0.9)
    if ex == "ex5":
        return ExamplePreset(Scheme.SCHEME1, 10, 10000, 6, 6, 0.1)
    kz, ky, n, m = _OSC.get(dim, _OSC[1])
    return ExamplePreset(Scheme.SCHEME1, n, m, ky, kz, 0.1)
