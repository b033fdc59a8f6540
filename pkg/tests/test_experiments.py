import csv
import json
import math

import numpy as np
import pytest

from blindcomm.errors import ConfigError, DegenerateDataError
from blindcomm.experiments import (ExperimentConfig, ModelConfig, ZeroVarianceError, block_sampler,
                                   contiguous_blocks, dumps_record, ingest_prices, load_config,
                                   population_constants, run_experiment, snr_sweep,
                                   synthetic_prices, theory_report, write_price_csv, write_record,
                                   _monotone_warnings)
from blindcomm.graph_model import SbmParams
from blindcomm.theory import adjacency_constants
from oracles import FROZEN


def small_config(**over):
    obj = {"model": {"n": 40, "k": 2, "aLogFactor": 4, "gamma": 0.3},
           "filter": {"preset": "diffusion", "order": 5},
           "excitation": {"kind": "whiteGaussian"},
           "m": [20, 400], "trials": 3, "seed": 11, "task": "pipeline", "theoryDraws": 20}
    obj.update(over)
    return ExperimentConfig.from_json(obj)


# --- configuration -------------------------------------------------------

def test_model_config_forms():
    m = ModelConfig.from_json({"n": 100, "k": 2, "aLogFactor": 4, "gamma": 0.5})
    assert m.a == pytest.approx(4 * math.log(100))
    assert m.b == pytest.approx(0.5 * m.a)
    assert m.gamma == pytest.approx(0.5)
    assert ModelConfig.from_json({"n": 10, "k": 2, "a": 5, "b": 1}).params().p_in == 0.5


def test_uneven_model_uses_balanced_groups():
    params = ModelConfig.from_json({"n": 500, "k": 3, "a": 50, "b": 15}).params()
    assert isinstance(params, SbmParams)
    assert sorted(params.group_sizes) == [166, 167, 167]


@pytest.mark.parametrize("bad", [
    {"model": {"n": 10}},
    {"model": {"n": 10, "k": 11, "a": 1, "b": 1}},
    {"model": {"n": 10, "k": 2, "a": 20, "b": 1}},
    {"task": "dance"},
    {"m": [1]},
    {"trials": 0},
    {"graphProcess": {"kind": "bernoulli", "p": 1.5}},
    {"graphProcess": "markov"},
    {"filter": {"preset": "heat"}},
    {"excitation": {"kind": "pink"}},
    {"snr": {"ks": [1, 2]}},
])
def test_config_errors(bad):
    obj = {"model": {"n": 10, "k": 2, "a": 5, "b": 1}}
    obj.update(bad)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json(obj)


def test_config_roundtrip_and_seed_override():
    cfg = small_config(graphProcess={"kind": "bernoulli", "p": 0.5})
    assert cfg.redraw_p == 0.5
    again = ExperimentConfig.from_json(cfg.to_json())
    assert again == cfg
    assert ExperimentConfig.from_json(cfg.to_json(), seed=99).seed == 99


def test_load_config_errors(tmp_path):
    path = tmp_path / "c.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(path)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    path.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config(path)


# --- theory --------------------------------------------------------------

def test_closed_form_constants_for_adjacency():
    cfg = ExperimentConfig.from_json({"model": {"n": 100, "k": 2, "a": 50, "b": 10},
                                      "filter": {"shift": "adjacency", "coeffs": [0, 1]},
                                      "selfLoops": True, "task": "theory"})
    c = population_constants(cfg)
    assert (c.c1, c.c2, c.c3) == pytest.approx(FROZEN["adjacency_constants_05_01"])
    rep = run_experiment(cfg)["theory"]
    assert rep["assumptionHolds"]
    assert rep["spectrum"]["multiplicities"] == [1, 1, 98]


def test_constants_scale_with_excitation_variance():
    base = {"model": {"n": 100, "k": 2, "a": 50, "b": 10},
            "filter": {"shift": "adjacency", "coeffs": [0, 1]}, "selfLoops": True}
    c = population_constants(ExperimentConfig.from_json({**base, "excitation": {"kind": "whiteUniform"}}))
    assert c.c1 == pytest.approx(13 / 3)


def test_theory_unavailable_for_colored_excitation():
    cfg = small_config(excitation={"kind": "diagonal"}, task="theory")
    assert theory_report(cfg) == {"available": False,
                                  "reason": "colored excitation has no PPM constants"}


# --- runs ----------------------------------------------------------------

def test_pipeline_record_shape():
    rec = run_experiment(small_config())
    assert [p["m"] for p in rec["points"]] == [20, 400]
    assert len(rec["trials"]) == 3
    for p in rec["points"]:
        assert 0 <= p["mdlCorrect"] <= 3
        assert {"errorRate", "pipelineErrorRate", "kStarMdl"} <= set(p)


def test_pipeline_equals_fixed_k_when_order_correct():
    rec = run_experiment(small_config())
    hits = 0
    for tr in rec["trials"]:
        for p in tr["points"]:
            if p["kStarMdl"] == 2:
                hits += 1
                assert p["pipelineErrorRate"] == p["errorRate"]
    assert hits > 0


def test_deterministic_record_is_byte_identical():
    cfg = small_config()
    a = dumps_record(run_experiment(cfg, deterministic=True))
    b = dumps_record(run_experiment(cfg, deterministic=True))
    assert a == b


def test_worker_count_does_not_change_numbers():
    cfg = small_config(trials=2, m=[100])
    a = run_experiment(cfg, workers=1)
    b = run_experiment(cfg, workers=2)
    assert a["trials"] == b["trials"]


def test_write_record(tmp_path):
    rec = run_experiment(small_config(trials=2, task="partition"))
    path = write_record(rec, tmp_path / "out")
    assert json.loads(path.read_text())["seed"] == 11
    with open(tmp_path / "out" / "points.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2 and "errorRate_mean" in rows[0]


def test_snr_sweep_schemes_share_k2_point():
    cfg = small_config(task="snrSweep", trials=2, m=[300],
                       snr={"blockSize": 20, "ks": [2, 3], "pIn": 0.5, "pOut": 0.1})
    rec = snr_sweep(cfg)
    pts = {(p["scheme"], p["k"]): p for p in rec["points"]}
    assert pts["fixed", 2]["trials"] == pts["normalized", 2]["trials"]
    assert pts["normalized", 3]["pOut"] == pytest.approx(0.05)
    assert pts["fixed", 3]["n"] == 60
    assert run_experiment(cfg)["points"] == rec["points"]


def test_monotone_warning_fires():
    cfg = small_config()
    points = [{"m": 10, "errorRate": {"mean": 0.1, "stderr": 0.0}},
              {"m": 100, "errorRate": {"mean": 0.3, "stderr": 0.01}}]
    with pytest.warns(RuntimeWarning):
        msgs = _monotone_warnings(cfg, points)
    assert len(msgs) == 1
    colored = small_config(excitation={"kind": "diagonal"})
    assert _monotone_warnings(colored, points) == []


# --- price ingestion -----------------------------------------------------

def write(tmp_path, text):
    path = tmp_path / "p.csv"
    path.write_text(text)
    return path


def test_log_return_value(tmp_path):
    table = ingest_prices(write(tmp_path, "date,A\nd0,100\nd1,110\n"), normalize=False)
    assert table.matrix[0, 0] == pytest.approx(FROZEN["log_return_100_110"], abs=1e-7)
    assert table.dates == ["d1"]


def test_zero_variance_names_assets(tmp_path):
    path = write(tmp_path, "date,A,B,C\nd0,1,5,2\nd1,2,5,3\nd2,3,5,5\n")
    with pytest.raises(ZeroVarianceError) as info:
        ingest_prices(path)
    assert info.value.assets == ["B"]


@pytest.mark.parametrize("text", [
    "date,A\nd0,100\nd1,-1\n",
    "date,A\nd0,100\nd1,0\n",
    "date,A\nd0,100\nd1,abc\n",
    "date,A\nd0,100\n",
    "date,A\nd0,100\nd1,na\nd2,\n",
    "date\nd0\n",
    "date,A,B\nd0,1\n",
])
def test_degenerate_tables(tmp_path, text):
    with pytest.raises(DegenerateDataError):
        ingest_prices(write(tmp_path, text))


def test_missing_rows_dropped(tmp_path):
    path = write(tmp_path, "date,A,B\nd0,1,2\nd1,NaN,3\nd2,2,4\nd3,3,9\n")
    table = ingest_prices(path, normalize=False)
    assert table.dates == ["d2", "d3"]
    np.testing.assert_allclose(table.matrix[0], np.log([2, 2]))


def test_synthetic_table_normalized(tmp_path):
    dates, assets, prices, labels = synthetic_prices(rng=0)
    assert prices.shape == (754, 92) and labels.max() == 9
    path = tmp_path / "prices.csv"
    write_price_csv(path, dates, assets, prices)
    table = ingest_prices(path)
    assert table.matrix.shape == (753, 92)
    np.testing.assert_allclose(table.matrix.mean(axis=0), 0, atol=1e-9)
    np.testing.assert_allclose(table.matrix.var(axis=0), 1, atol=1e-9)


def test_block_sampler(tmp_path):
    dates, assets, prices, _ = synthetic_prices(n_assets=5, rows=101, k=2, rng=1)
    path = tmp_path / "prices.csv"
    write_price_csv(path, dates, assets, prices)
    table = ingest_prices(path)
    full = block_sampler(table, table.rows, start=0)
    np.testing.assert_array_equal(full.signals, table.matrix)
    a = block_sampler(table, 30, rng=4)
    b = block_sampler(table, 30, rng=4)
    assert a.meta["start"] == b.meta["start"]
    blocks = contiguous_blocks(table, 4)
    starts = [blk.meta["start"] for blk in blocks]
    assert starts == [0, 25, 50, 75] and all(blk.m == 25 for blk in blocks)
    with pytest.raises(ValueError):
        block_sampler(table, table.rows + 1)
    with pytest.raises(ValueError):
        block_sampler(table, 10, start=95)


def test_table_csv_roundtrip(tmp_path):
    dates, assets, prices, _ = synthetic_prices(n_assets=3, rows=20, k=1, rng=2)
    path = tmp_path / "prices.csv"
    write_price_csv(path, dates, assets, prices)
    table = ingest_prices(path)
    out = tmp_path / "signals.csv"
    table.to_csv(out)
    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["date", *assets] and len(rows) == 20
    assert float(rows[1][1]) == table.matrix[0, 0]


def test_unused_constants_helper_matches():
    # population constants for the closed-form branch come from adjacency_constants
    cfg = ExperimentConfig.from_json({"model": {"n": 20, "k": 2, "a": 10, "b": 2},
                                      "filter": {"shift": "adjacency", "coeffs": [0, 1]},
                                      "selfLoops": True})
    assert population_constants(cfg) == adjacency_constants(cfg.model.params())
