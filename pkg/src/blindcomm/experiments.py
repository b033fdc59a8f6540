"""Configuration-driven experiment harness and price-table ingestion.

An experiment draws a signal batch per trial, shuffles node order, and runs
order selection and/or partition recovery on growing prefixes of the batch.
Results are plain JSON-serializable dicts that embed the resolved config.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .covariance import SignalBatch, eigendecompose, sample_covariance
from .errors import ConfigError, DegenerateDataError
from .excitation import ExcitationSource, ExcitationSpec, excitation_variance
from .graph_filter import FilterSpec
from .graph_model import PpmParams, balanced_sbm, expected_adjacency, model_labels
from .metrics import error_rate, overlap_from_error
from .order_selection import select_order_mdl, select_order_threshold
from .partition import KMeansConfig, recover_partition
from .rng import SEED_MASK, stream
from .simulate import generate_signals
from .theory import (adjacency_constants, analytic_spectrum, monte_carlo_constants,
                     sample_bounds)

TASKS = ("order", "partition", "pipeline", "theory", "snrSweep")
PROCESSES = ("independent", "bernoulli")

# Top-level stream keys; trial streams live under TRIAL_KEY.
TRIAL_KEY, THEORY_KEY, SNR_KEY = 0, 1, 2


# --- configuration -------------------------------------------------------


@dataclass(frozen=True)
class ModelConfig:
    """PPM intensities. JSON accepts ``a`` or ``aLogFactor`` (a = factor * ln n), and ``b`` or ``gamma``."""

    n: int
    k: int
    a: float
    b: float

    @classmethod
    def from_json(cls, obj: dict) -> ModelConfig:
        try:
            n, k = int(obj["n"]), int(obj["k"])
            a = float(obj["a"]) if "a" in obj else float(obj["aLogFactor"]) * math.log(n)
            b = float(obj["b"]) if "b" in obj else float(obj["gamma"]) * a
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad model config: {exc!r}") from exc
        if n < 1 or not 1 <= k <= n:
            raise ConfigError(f"model needs 1 <= k <= n, got n={n}, k={k}")
        if not (0 <= a <= n and 0 <= b <= n):
            raise ConfigError("a/n and b/n must be probabilities")
        return cls(n, k, a, b)

    def to_json(self) -> dict:
        return {"n": self.n, "k": self.k, "a": self.a, "b": self.b}

    @property
    def gamma(self) -> float:
        return self.b / self.a if self.a else math.inf

    def params(self):
        """PpmParams when k divides n, otherwise near-equal groups with the same probabilities."""
        if self.n % self.k == 0:
            return PpmParams(self.n, self.k, self.a, self.b)
        return balanced_sbm(self.n, self.k, self.a, self.b)


@dataclass(frozen=True)
class SnrConfig:
    """Community-count sweep at fixed community size.

    ``p_out`` is the between-group probability at k = 2. The normalized scheme
    uses ``p_out / (k - 1)`` so each community keeps the same expected number
    of outgoing edges.
    """

    block_size: int = 50
    ks: tuple = (2, 3, 4, 5, 6)
    p_in: float = 0.1
    p_out: float = 0.06

    @classmethod
    def from_json(cls, obj: dict | None) -> SnrConfig:
        obj = obj or {}
        try:
            out = cls(block_size=int(obj.get("blockSize", 50)),
                      ks=tuple(int(k) for k in obj.get("ks", (2, 3, 4, 5, 6))),
                      p_in=float(obj.get("pIn", 0.1)), p_out=float(obj.get("pOut", 0.06)))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad snr config: {exc!r}") from exc
        if not out.ks or min(out.ks) < 2:
            raise ConfigError("snr sweep needs a nonempty list of k >= 2")
        if out.block_size < 2:
            raise ConfigError("block size must be at least 2")
        if not (0 <= out.p_in <= 1 and 0 <= out.p_out <= 1):
            raise ConfigError("pIn and pOut must be probabilities")
        return out

    def to_json(self) -> dict:
        return {"blockSize": self.block_size, "ks": list(self.ks), "pIn": self.p_in,
                "pOut": self.p_out}


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelConfig
    filter: dict
    excitation: ExcitationSpec
    m: tuple
    trials: int
    seed: int
    task: str = "partition"
    process: str = "independent"
    redraw_p: float = 1.0
    self_loops: bool = False
    kmeans: KMeansConfig = field(default_factory=KMeansConfig)
    snr: SnrConfig = field(default_factory=SnrConfig)
    theory_draws: int = 200

    @classmethod
    def from_json(cls, obj: dict, seed: int | None = None) -> ExperimentConfig:
        if not isinstance(obj, dict):
            raise ConfigError("experiment config must be a JSON object")
        try:
            ms = obj.get("m", 1000)
            ms = tuple(int(v) for v in (ms if isinstance(ms, list) else [ms]))
            process = obj.get("graphProcess", {"kind": "independent"})
            if isinstance(process, str):
                process = {"kind": process}
            kind = process.get("kind", "independent")
            redraw = float(process.get("p", 1.0)) if kind == "bernoulli" else 1.0
            cfg = cls(
                model=ModelConfig.from_json(obj.get("model", {})),
                filter=dict(obj.get("filter", {"preset": "diffusion", "order": 5})),
                excitation=ExcitationSpec.from_json(obj.get("excitation", {})),
                m=ms,
                trials=int(obj.get("trials", 10)),
                seed=int(seed if seed is not None else obj.get("seed", 0)) & SEED_MASK,
                task=obj.get("task", "partition"),
                process=kind,
                redraw_p=redraw,
                self_loops=bool(obj.get("selfLoops", False)),
                kmeans=KMeansConfig.from_json(obj.get("kmeans")),
                snr=SnrConfig.from_json(obj.get("snr")),
                theory_draws=int(obj.get("theoryDraws", 200)),
            )
        except ConfigError:
            raise
        except (AttributeError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad experiment config: {exc!r}") from exc
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.task not in TASKS:
            raise ConfigError(f"task must be one of {TASKS}, got {self.task!r}")
        if self.process not in PROCESSES:
            raise ConfigError(f"graph process must be one of {PROCESSES}")
        if not 0 <= self.redraw_p <= 1:
            raise ConfigError("redraw probability must lie in [0, 1]")
        if not self.m or min(self.m) < 2:
            raise ConfigError("m must be a nonempty list of sample counts >= 2")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.task != "snrSweep":
            self.filter_spec()
        if self.excitation.kind == "adversarial" and self.model.k >= self.model.n:
            raise ConfigError("adversarial excitation needs k < n")

    def filter_spec(self, model: ModelConfig | None = None) -> FilterSpec:
        model = model or self.model
        return FilterSpec.from_json(self.filter, gamma=model.gamma, n=model.n)

    def to_json(self) -> dict:
        return {
            "model": self.model.to_json(),
            "filter": self.filter,
            "excitation": self.excitation.to_json(),
            "m": list(self.m),
            "trials": self.trials,
            "seed": self.seed,
            "task": self.task,
            "graphProcess": {"kind": self.process, "p": self.redraw_p},
            "selfLoops": self.self_loops,
            "kmeans": self.kmeans.to_json(),
            "snr": self.snr.to_json(),
            "theoryDraws": self.theory_draws,
        }


def load_config(path, seed: int | None = None) -> ExperimentConfig:
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return ExperimentConfig.from_json(obj, seed=seed)


# --- population constants ------------------------------------------------


def population_constants(cfg: ExperimentConfig, model: ModelConfig | None = None):
    """Constants of the population covariance for white excitations, else None.

    Closed form for the adjacency filter with self-loops; Monte Carlo otherwise.
    """
    model = model or cfg.model
    variance = excitation_variance(cfg.excitation)
    if variance is None:
        return None
    spec = cfg.filter_spec(model)
    params = model.params()
    if (spec.shift == "adjacency" and spec.coefficients == (0.0, 1.0) and cfg.self_loops
            and isinstance(params, PpmParams)):
        return adjacency_constants(params).scaled(variance)
    return monte_carlo_constants(spec, params, cfg.theory_draws, stream(cfg.seed, THEORY_KEY),
                                 self_loops=cfg.self_loops, variance=variance)


def theory_report(cfg: ExperimentConfig) -> dict:
    c = population_constants(cfg)
    if c is None:
        return {"available": False, "reason": "colored excitation has no PPM constants"}
    out = {"available": True, "constants": c.to_json(), "assumptionHolds": c.assumption_holds(),
           "rho": c.rho if c.c3 != c.c1 else None}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        spec = analytic_spectrum(c)
    out["spectrum"] = {"values": list(spec.values), "multiplicities": list(spec.multiplicities)}
    if c.assumption_holds():
        m_order, m_partition = sample_bounds(c)
        out["difficulty"] = {"order": m_order, "partition": m_partition}
    else:
        warnings.warn("constants violate c3 > c1 > c2 >= 0", RuntimeWarning, stacklevel=2)
    return out


# --- trials --------------------------------------------------------------


def _trial(cfg: ExperimentConfig, t: int, constants) -> dict:
    params = cfg.model.params()
    labels = model_labels(params)
    n, k = labels.n, labels.k
    spec = cfg.filter_spec()
    ea = expected_adjacency(params, labels) if cfg.excitation.kind == "adversarial" else None
    source = ExcitationSource(cfg.excitation, n, stream(cfg.seed, TRIAL_KEY, t, 0),
                              expected_adjacency=ea, k=k)
    batch = generate_signals(params, labels, spec, source, max(cfg.m),
                             stream(cfg.seed, TRIAL_KEY, t, 1), redraw_p=cfg.redraw_p,
                             self_loops=cfg.self_loops)
    # Hide the contiguous node order from inference.
    perm = stream(cfg.seed, TRIAL_KEY, t, 2).permutation(n)
    batch = batch.permute_nodes(perm)
    truth = labels.labels[perm]
    points = []
    for i, m in enumerate(cfg.m):
        s = eigendecompose(sample_covariance(batch.head(m), deterministic=True))
        rec = {"m": int(m)}
        if cfg.task in ("order", "pipeline"):
            est = select_order_mdl(s, m)
            rec["kStarMdl"] = est.k_star
            if constants is not None and constants.assumption_holds():
                rec["kStarThreshold"] = select_order_threshold(s, constants).k_star
        if cfg.task in ("partition", "pipeline"):
            km_rng = stream(cfg.seed, TRIAL_KEY, t, 3, i)
            lab = recover_partition(s, k, cfg.kmeans, km_rng)
            rec["errorRate"] = error_rate(lab.assignments, truth, k).error_rate
            if cfg.task == "pipeline":
                k_star = rec["kStarMdl"]
                if k_star == k:
                    rec["pipelineErrorRate"] = rec["errorRate"]
                else:
                    piped = recover_partition(s, k_star, cfg.kmeans, stream(cfg.seed, TRIAL_KEY, t, 3, i))
                    rec["pipelineErrorRate"] = error_rate(piped.assignments, truth).error_rate
        points.append(rec)
    return {"trial": t, "points": points}


def _mean_stderr(values) -> dict:
    v = np.asarray(values, dtype=float)
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
    return {"mean": float(v.mean()), "stderr": se}


def _aggregate(cfg: ExperimentConfig, trials: list) -> list:
    k = cfg.model.k
    out = []
    for i, m in enumerate(cfg.m):
        recs = [tr["points"][i] for tr in trials]
        point = {"m": int(m)}
        for key in ("errorRate", "pipelineErrorRate", "kStarMdl", "kStarThreshold"):
            if key in recs[0]:
                point[key] = _mean_stderr([r[key] for r in recs])
        for key, name in (("kStarMdl", "mdlCorrect"), ("kStarThreshold", "thresholdCorrect")):
            if key in recs[0]:
                point[name] = sum(int(r[key] == k) for r in recs)
        out.append(point)
    return out


def _monotone_warnings(cfg: ExperimentConfig, points: list) -> list:
    """Soft check: for white excitation the error should not grow with m."""
    if cfg.excitation.kind not in ("whiteUniform", "whiteGaussian") or cfg.process != "independent":
        return []
    out = []
    ordered = sorted((p for p in points if "errorRate" in p), key=lambda p: p["m"])
    for prev, cur in zip(ordered, ordered[1:]):
        slack = 2 * (prev["errorRate"]["stderr"] + cur["errorRate"]["stderr"])
        if cur["errorRate"]["mean"] > prev["errorRate"]["mean"] + slack:
            msg = (f"error rate rose from {prev['errorRate']['mean']:.4f} at m={prev['m']} "
                   f"to {cur['errorRate']['mean']:.4f} at m={cur['m']}")
            warnings.warn(msg, RuntimeWarning, stacklevel=3)
            out.append(msg)
    return out


def _run_trials(cfg: ExperimentConfig, constants, workers: int, deterministic: bool) -> list:
    if deterministic or workers <= 1 or cfg.trials == 1:
        return [_trial(cfg, t, constants) for t in range(cfg.trials)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_trial, cfg, t, constants) for t in range(cfg.trials)]
        return [f.result() for f in futures]  # submission order, so aggregation is fixed


def run_experiment(cfg: ExperimentConfig, workers: int = 1, deterministic: bool = False) -> dict:
    """Run every trial and sweep point of ``cfg`` and return the result record.

    Trial ``t`` draws from streams keyed ``(seed, 0, t, ...)``, so the numbers
    do not depend on ``workers``. ``deterministic`` forces serial execution.
    """
    if cfg.task == "snrSweep":
        return snr_sweep(cfg, workers=workers, deterministic=deterministic)
    record = {"config": cfg.to_json(), "seed": cfg.seed, "deterministic": bool(deterministic)}
    if cfg.task == "theory":
        record["theory"] = theory_report(cfg)
        return record
    constants = population_constants(cfg) if cfg.task in ("order", "pipeline") else None
    if constants is not None:
        record["constants"] = constants.to_json()
    trials = _run_trials(cfg, constants, workers, deterministic)
    record["points"] = _aggregate(cfg, trials)
    record["trials"] = trials
    record["warnings"] = _monotone_warnings(cfg, record["points"])
    return record


def _snr_trial(cfg: ExperimentConfig, k: int, p_out: float, t: int) -> float:
    snr = cfg.snr
    n = k * snr.block_size
    model = ModelConfig(n, k, snr.p_in * n, p_out * n)
    params = model.params()
    labels = model_labels(params)
    spec = cfg.filter_spec(model)
    ea = expected_adjacency(params, labels) if cfg.excitation.kind == "adversarial" else None
    # Streams ignore the scheme, so both schemes share draws wherever their models agree.
    source = ExcitationSource(cfg.excitation, n, stream(cfg.seed, SNR_KEY, k, t, 0),
                              expected_adjacency=ea, k=k)
    m = max(cfg.m)
    batch = generate_signals(params, labels, spec, source, m, stream(cfg.seed, SNR_KEY, k, t, 1),
                             redraw_p=cfg.redraw_p, self_loops=cfg.self_loops)
    perm = stream(cfg.seed, SNR_KEY, k, t, 2).permutation(n)
    batch = batch.permute_nodes(perm)
    s = eigendecompose(sample_covariance(batch, deterministic=True))
    lab = recover_partition(s, k, cfg.kmeans, stream(cfg.seed, SNR_KEY, k, t, 3))
    return overlap_from_error(error_rate(lab.assignments, labels.labels[perm]).error_rate, k)


def snr_sweep(cfg: ExperimentConfig, workers: int = 1, deterministic: bool = False) -> dict:
    """Overlap score versus k under fixed and normalized between-group probability.

    Every k uses ``n = k * blockSize`` nodes, the largest ``m`` of the config,
    and ``cfg.trials`` trials.
    """
    snr = cfg.snr
    jobs = []
    for scheme in ("fixed", "normalized"):
        for k in snr.ks:
            p_out = snr.p_out if scheme == "fixed" else snr.p_out / (k - 1)
            jobs.extend((scheme, k, p_out, t) for t in range(cfg.trials))
    if deterministic or workers <= 1:
        scores = [_snr_trial(cfg, k, p, t) for _, k, p, t in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_snr_trial, cfg, k, p, t) for _, k, p, t in jobs]
            scores = [f.result() for f in futures]
    points = []
    for idx in range(0, len(jobs), cfg.trials):
        scheme, k, p_out, _ = jobs[idx]
        vals = scores[idx:idx + cfg.trials]
        points.append({"scheme": scheme, "k": k, "n": k * snr.block_size, "pIn": snr.p_in,
                       "pOut": p_out, "overlap": _mean_stderr(vals),
                       "trials": [float(v) for v in vals]})
    return {"config": cfg.to_json(), "seed": cfg.seed, "deterministic": bool(deterministic),
            "points": points}


# --- output --------------------------------------------------------------


def dumps_record(record: dict) -> str:
    return json.dumps(record, sort_keys=True, indent=1, allow_nan=True) + "\n"


def _flatten(point: dict) -> dict:
    row = {}
    for key, val in point.items():
        if isinstance(val, dict):
            for sub, v in val.items():
                row[f"{key}_{sub}"] = v
        elif not isinstance(val, list):
            row[key] = val
    return row


def write_record(record: dict, out_dir) -> Path:
    """Write ``result.json`` and a flat ``points.csv`` (one row per sweep point)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "result.json").write_text(dumps_record(record))
    rows = [_flatten(p) for p in record.get("points", [])]
    if rows:
        keys = sorted({k for r in rows for k in r})
        with open(out / "points.csv", "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=keys)
            writer.writeheader()
            writer.writerows(rows)
    return out / "result.json"


# --- price tables --------------------------------------------------------

MISSING = {"", "na", "nan", "null", "none"}


@dataclass
class TimeSeriesTable:
    """Dates by assets. After ingestion each column is a normalized log-return series."""

    assets: list
    dates: list
    matrix: np.ndarray
    log_returns: bool = False
    normalized: bool = False

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["date", *self.assets])
            for d, row in zip(self.dates, self.matrix):
                writer.writerow([d, *(repr(float(v)) for v in row)])


class ZeroVarianceError(DegenerateDataError):
    """Raised when some assets have constant returns; ``assets`` lists them."""

    def __init__(self, assets):
        self.assets = list(assets)
        super().__init__(f"zero variance, cannot normalize: {', '.join(self.assets)}")


def ingest_prices(path, normalize: bool = True) -> TimeSeriesTable:
    """Read a ``date, asset1, asset2, ...`` price CSV and return normalized log-returns.

    Rows with any missing cell are dropped before differencing.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or len(rows[0]) < 2:
        raise DegenerateDataError("price table needs a date column and at least one asset")
    assets = [a.strip() for a in rows[0][1:]]
    dates, values = [], []
    for line_no, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(assets) + 1:
            raise DegenerateDataError(f"line {line_no}: expected {len(assets) + 1} cells, got {len(row)}")
        cells = [c.strip() for c in row[1:]]
        if any(c.lower() in MISSING for c in cells):
            continue
        parsed = []
        for asset, cell in zip(assets, cells):
            try:
                v = float(cell)
            except ValueError:
                raise DegenerateDataError(f"line {line_no}, {asset}: cannot parse {cell!r}") from None
            if not v > 0 or not math.isfinite(v):
                raise DegenerateDataError(f"line {line_no}, {asset}: price {cell} is not positive")
            parsed.append(v)
        dates.append(row[0].strip())
        values.append(parsed)
    if len(values) < 2:
        raise DegenerateDataError("need at least two complete price rows to form a return")
    prices = np.array(values)
    returns = np.diff(np.log(prices), axis=0)
    table = TimeSeriesTable(assets, dates[1:], returns, log_returns=True)
    if normalize:
        std = returns.std(axis=0)
        flat = [a for a, s in zip(assets, std) if s <= 1e-12 * max(1.0, np.abs(returns).max())]
        if flat:
            raise ZeroVarianceError(flat)
        table.matrix = (returns - returns.mean(axis=0)) / std
        table.normalized = True
    return table


def block_sampler(table: TimeSeriesTable, m: int, start: int | None = None, rng=None) -> SignalBatch:
    """``m`` consecutive rows as a signal batch; a missing ``start`` is drawn from ``rng``."""
    rows = table.rows
    if not 1 <= m <= rows:
        raise ValueError(f"block length m={m} must lie in 1..{rows}")
    if start is None:
        gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        start = int(gen.integers(0, rows - m + 1))
    if not 0 <= start <= rows - m:
        raise ValueError(f"start {start} leaves fewer than {m} rows")
    meta = {"start": start, "m": m, "dates": [table.dates[start], table.dates[start + m - 1]]}
    return SignalBatch(table.matrix[start:start + m], meta)


def contiguous_blocks(table: TimeSeriesTable, count: int = 4) -> list:
    """``count`` non-overlapping consecutive blocks of ``floor(rows / count)`` rows."""
    size = table.rows // count
    if size < 1:
        raise ValueError(f"{table.rows} rows cannot fill {count} blocks")
    return [block_sampler(table, size, start=i * size) for i in range(count)]


def synthetic_prices(n_assets: int = 92, rows: int = 754, k: int = 10, rng=None,
                     factor_scale: float = 1.0, noise_scale: float = 1.0,
                     volatility: float = 0.01):
    """Price table with planted sector structure.

    Daily returns are ``volatility * (factor_scale * f_sector + noise_scale * e)``
    with one common factor per sector. Returns ``(dates, assets, prices, labels)``.
    """
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    labels = np.arange(n_assets) % k
    factors = gen.standard_normal((rows - 1, k))
    noise = gen.standard_normal((rows - 1, n_assets))
    returns = volatility * (factor_scale * factors[:, labels] + noise_scale * noise)
    start = gen.uniform(20.0, 200.0, size=n_assets)
    log_prices = np.vstack([np.zeros(n_assets), np.cumsum(returns, axis=0)]) + np.log(start)
    prices = np.exp(log_prices)
    dates = [f"day{d:04d}" for d in range(rows)]
    assets = [f"S{j:03d}" for j in range(n_assets)]
    return dates, assets, prices, labels


def write_price_csv(path, dates, assets, prices) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", *assets])
        for d, row in zip(dates, prices):
            writer.writerow([d, *(f"{v:.6f}" for v in row)])
