"""Partition error versus m when the graph is only redrawn with probability p per signal.

p = 1 gives an independent graph per signal; p = 0 keeps a single graph.
Usage: python3 scripts/graph_process.py [--quick] [--out results/process]
"""

import argparse

from blindcomm.experiments import ExperimentConfig, run_experiment, write_record


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ps", type=float, nargs="+", default=[0.0, 0.01, 0.1, 0.5, 1.0])
    ap.add_argument("--ms", type=int, nargs="+", default=[100, 500, 1000, 5000, 10000])
    ap.add_argument("--n", type=int, default=500)
    ap.add_argument("--gamma", type=float, default=0.3)
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--seed", type=int, default=31)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--quick", action="store_true", help="n=100, 3 trials, m up to 2000")
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    if args.quick:
        args.n, args.trials, args.ms = 100, 3, [100, 500, 2000]

    print(f"{'p':>6} " + " ".join(f"m={m:>6}" for m in args.ms))
    for p in args.ps:
        cfg = ExperimentConfig.from_json({
            "model": {"n": args.n, "k": 2, "aLogFactor": 4, "gamma": args.gamma},
            "filter": {"preset": "diffusion", "order": 5},
            "excitation": {"kind": "whiteGaussian"},
            "graphProcess": {"kind": "bernoulli", "p": p},
            "m": args.ms, "trials": args.trials, "seed": args.seed, "task": "partition"})
        rec = run_experiment(cfg, workers=args.workers)
        print(f"{p:6.2f} " + " ".join(f"{q['errorRate']['mean']:8.4f}" for q in rec["points"]))
        if args.out:
            write_record(rec, f"{args.out}/p_{p:g}")


if __name__ == "__main__":
    main()
