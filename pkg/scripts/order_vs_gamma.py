"""Estimated number of communities versus gamma = b/a (k=3, n=500).

Compares the MDL estimate with the threshold baseline that knows the
population spectrum. Usage: python3 scripts/order_vs_gamma.py [--quick]
"""

import argparse

from blindcomm.experiments import ExperimentConfig, run_experiment, write_record


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--gammas", type=float, nargs="+", default=[0.1, 0.2, 0.3, 0.4, 0.5, 0.6])
    ap.add_argument("--ms", type=int, nargs="+", default=[500, 1000, 5000])
    ap.add_argument("--n", type=int, default=500)
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--quick", action="store_true", help="n=150, 3 trials")
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    if args.quick:
        args.n, args.trials = 150, 3

    print(f"{'gamma':>6} {'m':>6} {'k* MDL':>8} {'MDL ok':>7} {'k* thr':>8} {'thr ok':>7}")
    for gamma in args.gammas:
        cfg = ExperimentConfig.from_json({
            "model": {"n": args.n, "k": 3, "aLogFactor": 4, "gamma": gamma},
            "filter": {"preset": "diffusion", "order": 5},
            "excitation": {"kind": "whiteGaussian"},
            "m": args.ms, "trials": args.trials, "seed": args.seed, "task": "order"})
        rec = run_experiment(cfg, workers=args.workers)
        for p in rec["points"]:
            thr = p.get("kStarThreshold", {}).get("mean", float("nan"))
            print(f"{gamma:6.2f} {p['m']:6d} {p['kStarMdl']['mean']:8.2f} {p['mdlCorrect']:7d} "
                  f"{thr:8.2f} {p.get('thresholdCorrect', 0):7d}")
        if args.out:
            write_record(rec, f"{args.out}/gamma_{gamma:g}")


if __name__ == "__main__":
    main()
