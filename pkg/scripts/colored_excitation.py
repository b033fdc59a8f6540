"""Partition error versus m for white and colored excitations (k=2, n=500).

Usage: python3 scripts/colored_excitation.py [--quick] [--out results/colored]
"""

import argparse

from blindcomm.experiments import ExperimentConfig, run_experiment, write_record


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ms", type=int, nargs="+", default=[100, 500, 1000, 5000, 10000])
    ap.add_argument("--n", type=int, default=500)
    ap.add_argument("--wishart", type=int, nargs="+", default=[10, 50, 250])
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--seed", type=int, default=99)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--quick", action="store_true", help="n=100, 3 trials, m up to 2000")
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    if args.quick:
        args.n, args.trials, args.ms = 100, 3, [100, 500, 2000]

    kinds = [("white", {"kind": "whiteGaussian"}), ("diagonal", {"kind": "diagonal"})]
    kinds += [(f"wishart{p}", {"kind": "wishart", "p": p}) for p in args.wishart]
    kinds.append(("adversarial", {"kind": "adversarial"}))
    print(f"{'excitation':>12} " + " ".join(f"m={m:>6}" for m in args.ms))
    for name, exc in kinds:
        cfg = ExperimentConfig.from_json({
            "model": {"n": args.n, "k": 2, "aLogFactor": 4, "gamma": 0.3},
            "filter": {"preset": "diffusion", "order": 5},
            "excitation": exc, "m": args.ms, "trials": args.trials, "seed": args.seed,
            "task": "partition"})
        rec = run_experiment(cfg, workers=args.workers)
        print(f"{name:>12} " + " ".join(f"{p['errorRate']['mean']:8.4f}" for p in rec["points"]))
        if args.out:
            write_record(rec, f"{args.out}/{name}")


if __name__ == "__main__":
    main()
