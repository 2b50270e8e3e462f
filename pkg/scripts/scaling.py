"""Wall time against M, N_T, d or K, with the fitted log-log slope."""
import argparse

from bsdegbt.metrics import scaling_probe
from bsdegbt.presets import preset
from bsdegbt.problems import example


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--example", default="ex3")
    ap.add_argument("--dim", type=int, default=100)
    ap.add_argument("--axis", choices=["M", "N_T", "d", "K"], default="M")
    ap.add_argument("--values", default="10000,20000,50000,100000")
    ap.add_argument("--repeats", type=int, default=1)
    ap.add_argument("--heavy", action="store_true", help="allow d >= 5000")
    args = ap.parse_args(argv)
    values = [int(v) for v in args.values.split(",")]
    if args.axis == "d" and max(values) >= 5000 and not args.heavy:
        ap.error("dimensions of 5000 and above need --heavy")
    problem = example(args.example, args.dim)
    cfg = preset(args.example, args.dim).config(problem)
    source = (lambda d: example(args.example, d)) if args.axis == "d" else problem
    res = scaling_probe(source, cfg, args.axis, values, repeats=args.repeats)
    print(f"{args.axis:>8} {'seconds':>10}")
    for v, t in zip(res.values, res.wall_times):
        print(f"{v:>8} {t:>10.3f}")
    print(f"log-log slope {res.slope:.3f}")


if __name__ == "__main__":
    main()
