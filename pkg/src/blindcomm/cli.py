"""Command line entry point: ``blindcomm theory|order|detect|score|experiment|ingest``.

Exit codes: 0 success, 2 configuration error, 3 degenerate data.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .covariance import SignalBatch, read_signal_csv, spectral_summary, write_signal_csv
from .errors import ConfigError, DegenerateDataError
from .experiments import (dumps_record, ingest_prices, load_config, run_experiment,
                          theory_report, write_record)
from .metrics import error_rate
from .order_selection import select_order_mdl
from .partition import KMeansConfig, recover_partition
from .rng import SEED_MASK

EXIT_CONFIG, EXIT_DEGENERATE = 2, 3


def _emit(obj: dict, out_dir, name: str) -> None:
    text = dumps_record(obj)
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)
    else:
        sys.stdout.write(text)


def _signals(path, deterministic):
    try:
        batch = read_signal_csv(path)
    except OSError as exc:
        raise ConfigError(f"cannot read signals {path}: {exc}") from exc
    except ValueError as exc:
        raise DegenerateDataError(f"bad signal file {path}: {exc}") from exc
    return batch, spectral_summary(batch, deterministic=deterministic)


def _read_labels(path) -> np.ndarray:
    """Labeling from JSON ``{"assignments": [...]}`` / a JSON list, or CSV with one label per cell."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read labeling {path}: {exc}") from exc
    if p.suffix.lower() == ".json":
        try:
            obj = json.loads(text)
            values = obj["assignments"] if isinstance(obj, dict) else obj
        except (json.JSONDecodeError, KeyError) as exc:
            raise DegenerateDataError(f"labeling {path} is not a labeling JSON: {exc}") from exc
    else:
        values = [cell for row in csv.reader(text.splitlines()) for cell in row if cell.strip()]
    try:
        raw = np.array([int(float(v)) for v in values])
    except (TypeError, ValueError) as exc:
        raise DegenerateDataError(f"labeling {path} has non-integer entries") from exc
    # Any integer ids are accepted; they are mapped to 0..k-1.
    return np.unique(raw, return_inverse=True)[1]


def cmd_theory(args) -> dict:
    cfg = load_config(args.config, args.seed)
    return {"config": cfg.to_json(), "theory": theory_report(cfg)}


def cmd_order(args) -> dict:
    batch, s = _signals(args.signals, args.deterministic)
    return select_order_mdl(s, batch.m).to_json()


def cmd_detect(args) -> dict:
    batch, s = _signals(args.signals, args.deterministic)
    out = {}
    if args.k == "auto":
        est = select_order_mdl(s, batch.m)
        k = est.k_star
        out["order"] = {"kStar": k, "method": est.method}
    else:
        try:
            k = int(args.k)
        except ValueError:
            raise ConfigError(f"k must be an integer or 'auto', got {args.k!r}") from None
        if not 1 <= k <= batch.n:
            raise ConfigError(f"k must lie in 1..{batch.n}")
    cfg = KMeansConfig(restarts=args.restarts)
    seed = 0 if args.seed is None else args.seed & SEED_MASK
    lab = recover_partition(s, k, cfg, np.random.default_rng(seed))
    out.update(lab.to_json())
    out["kmeans"] = cfg.to_json()
    return out


def cmd_score(args) -> dict:
    a, b = _read_labels(args.labeling), _read_labels(args.reference)
    if a.size != b.size:
        raise DegenerateDataError(f"labelings have different lengths: {a.size} vs {b.size}")
    k = int(max(a.max(), b.max())) + 1
    return error_rate(a, b, k if k >= 2 else None).to_json()


def cmd_experiment(args) -> dict:
    cfg = load_config(args.config, args.seed)
    record = run_experiment(cfg, workers=args.workers, deterministic=args.deterministic)
    if args.out:
        return {"result": str(write_record(record, args.out))}
    return record


def cmd_ingest(args) -> dict:
    try:
        table = ingest_prices(args.prices)
    except OSError as exc:
        raise ConfigError(f"cannot read prices {args.prices}: {exc}") from exc
    summary = {"assets": len(table.assets), "rows": table.rows, "logReturns": table.log_returns,
               "normalized": table.normalized}
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_signal_csv(SignalBatch(table.matrix), out / "signals.csv", header=table.assets)
        summary["signals"] = str(out / "signals.csv")
    return summary


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="64-bit seed (overrides the config)")
    common.add_argument("--out", default=None, help="output directory (default: print to stdout)")
    common.add_argument("--deterministic", action="store_true",
                        help="serial execution and fixed-order accumulation")

    parser = argparse.ArgumentParser(prog="blindcomm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("theory", parents=[common], help="population constants and spectrum")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_theory, out_name="theory.json")

    p = sub.add_parser("order", parents=[common], help="MDL order selection on a signal CSV")
    p.add_argument("signals")
    p.set_defaults(func=cmd_order, out_name="order.json")

    p = sub.add_parser("detect", parents=[common], help="spectral partition of a signal CSV")
    p.add_argument("signals")
    p.add_argument("--k", default="auto", help="group count or 'auto' for MDL")
    p.add_argument("--restarts", type=int, default=20)
    p.set_defaults(func=cmd_detect, out_name="labeling.json")

    p = sub.add_parser("score", parents=[common], help="error rate between two labelings")
    p.add_argument("labeling")
    p.add_argument("reference")
    p.set_defaults(func=cmd_score, out_name="score.json")

    p = sub.add_parser("experiment", parents=[common], help="run a configured experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_experiment, out_name=None)

    p = sub.add_parser("ingest", parents=[common], help="price CSV to normalized log-returns")
    p.add_argument("prices")
    p.set_defaults(func=cmd_ingest, out_name=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegenerateDataError as exc:
        print(f"degenerate data: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    if args.out_name is None:
        sys.stdout.write(dumps_record(result))
    else:
        _emit(result, args.out, args.out_name)
    return 0


if __name__ == "__main__":
    sys.exit(main())
