"""Train/test MSE against the number of trees at one time step.

Writes two-column ``k mse`` files (one per target and data split) for the
tuning plots of examples 3, 5 and 6.
"""
import argparse
import os

from bsdegbt.cli import learning_curves
from bsdegbt.gbt import GbtHyperParams
from bsdegbt.paths import build_grid
from bsdegbt.problems import example
from bsdegbt.schemes import SolverConfig

# (example, d, scheme, N_T, M, learning rate, trees)
SETUPS = {
    "ex3": ("ex3", 100, "scheme2", 10, 10000, 0.9, 300),
    "ex5": ("ex5", 100, "scheme1", 10, 10000, 0.1, 100),
    "ex6": ("ex6", 1, "scheme1", 10, 10000, 0.1, 200),
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("which", nargs="*", default=sorted(SETUPS), choices=sorted(SETUPS))
    ap.add_argument("--step", type=int, default=1, help="time index of the fit")
    ap.add_argument("--samples", type=int, help="override M")
    ap.add_argument("--trees", type=int, help="override the number of trees")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results")
    args = ap.parse_args(argv)
    os.makedirs(args.out, exist_ok=True)
    for key in args.which:
        ex, d, scheme, n, m, eta, k = SETUPS[key]
        k = args.trees or k
        problem = example(ex, d)
        hp = GbtHyperParams(n_trees=k, learning_rate=eta, max_depth=2)
        cfg = SolverConfig(scheme, build_grid(problem.maturity, n), args.samples or m,
                           gbt_y=hp, gbt_z=hp, seed=args.seed)
        curves = learning_curves(problem, cfg, args.step, k)
        for comp, (train, test) in curves.items():
            for part, values in (("train", train), ("test", test)):
                path = os.path.join(args.out, f"curve_{key}.{comp}.{part}.dat")
                with open(path, "w") as fh:
                    fh.write("k mse\n")
                    fh.writelines(f"{i} {v:.10g}\n" for i, v in enumerate(values))
        y_test = curves["y"][1]
        best = min(range(len(y_test)), key=y_test.__getitem__)
        print(f"{key}: lowest Y test MSE {y_test[best]:.6g} at k={best}")


if __name__ == "__main__":
    main()
