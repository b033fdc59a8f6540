"""Partition error versus sample count for two-community PPMs (n=100).

Usage: python3 scripts/error_vs_m.py [--trials 10] [--out results/error_vs_m]
"""

import argparse

from blindcomm.experiments import ExperimentConfig, run_experiment, write_record


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--gammas", type=float, nargs="+", default=[0.3, 0.5])
    ap.add_argument("--ms", type=int, nargs="+", default=[10, 30, 100, 300, 1000, 3000, 10000])
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    print(f"{'gamma':>6} {'m':>7} {'error':>8} {'stderr':>8}")
    for gamma in args.gammas:
        cfg = ExperimentConfig.from_json({
            "model": {"n": 100, "k": 2, "aLogFactor": 4, "gamma": gamma},
            "filter": {"preset": "diffusion", "order": 5},
            "excitation": {"kind": "whiteUniform"},
            "m": args.ms, "trials": args.trials, "seed": args.seed, "task": "partition"})
        rec = run_experiment(cfg, workers=args.workers)
        for p in rec["points"]:
            print(f"{gamma:6.2f} {p['m']:7d} {p['errorRate']['mean']:8.4f} {p['errorRate']['stderr']:8.4f}")
        if args.out:
            write_record(rec, f"{args.out}/gamma_{gamma:g}")


if __name__ == "__main__":
    main()
