"""Overlap score versus number of communities at fixed community size.

Two schemes: a fixed between-group probability, and one divided by k-1 so
each community keeps the same expected number of outgoing edges.
Usage: python3 scripts/snr_sweep.py [--quick] [--out results/snr]
"""

import argparse

from blindcomm.experiments import ExperimentConfig, run_experiment, write_record


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ks", type=int, nargs="+", default=[2, 3, 4, 5, 6, 8])
    ap.add_argument("--block-size", type=int, default=50)
    ap.add_argument("--p-in", type=float, default=0.1)
    ap.add_argument("--p-out", type=float, default=0.06)
    ap.add_argument("--m", type=int, default=500)
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=5)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--quick", action="store_true", help="3 trials, k up to 4")
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    if args.quick:
        args.trials, args.ks = 3, [2, 3, 4]

    cfg = ExperimentConfig.from_json({
        "model": {"n": 100, "k": 2, "aLogFactor": 4, "gamma": 0.3},
        "filter": {"preset": "diffusion", "order": 5},
        "excitation": {"kind": "whiteGaussian"},
        "m": [args.m], "trials": args.trials, "seed": args.seed, "task": "snrSweep",
        "snr": {"blockSize": args.block_size, "ks": args.ks, "pIn": args.p_in, "pOut": args.p_out}})
    rec = run_experiment(cfg, workers=args.workers)
    print(f"{'scheme':>11} {'k':>3} {'n':>5} {'pOut':>7} {'overlap':>8} {'stderr':>7}")
    for p in rec["points"]:
        print(f"{p['scheme']:>11} {p['k']:3d} {p['n']:5d} {p['pOut']:7.4f} "
              f"{p['overlap']['mean']:8.4f} {p['overlap']['stderr']:7.4f}")
    if args.out:
        write_record(rec, args.out)


if __name__ == "__main__":
    main()
