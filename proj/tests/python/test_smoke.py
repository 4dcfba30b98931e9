import json
import math

import pytest

import cobandit


def test_game_oracles():
    assert cobandit.nash_allocation([18, 8, 13, 16, 10], 20) == [6, 2, 4, 5, 3]
    assert cobandit.nash_allocation([13] * 5, 20) == [4, 4, 4, 4, 4]
    assert cobandit.is_nash([18, 8, 13, 16, 10], [6, 2, 4, 5, 3])
    assert cobandit.raw_gain(18.0, 6) == pytest.approx(3.0)
    assert cobandit.scaled_gain(18.0, 0, False, 18.0) == pytest.approx(1.0)
    d = cobandit.distance_to_ne([7, 2, 4, 4, 3], [6, 2, 4, 5, 3], [18, 8, 13, 16, 10])
    assert d == pytest.approx(100.0 / 6.0)

    losses = cobandit.perceived_loss([0.9, 0.6, None])
    assert losses == pytest.approx([0.0, 0.3, 0.0])


def test_theory_values():
    assert cobandit.hear_probability(20, 0.05, 1) == pytest.approx(0.09275, abs=1e-9)
    out = cobandit.regret_bound(k=5, d=0, T=100, b0=0.0)
    assert out["bound"] == pytest.approx(154.2220932468588, abs=1e-9)
    xi = cobandit.replicator_field([0.5, 0.5], [0.2, 0.4], [1.0, 1.0])
    assert xi == pytest.approx([0.05, -0.05])


def test_validation():
    cfg = json.loads(cobandit.baseline_scenario_json())
    assert cobandit.validate_scenario(json.dumps(cfg)) == []
    cfg["devices"][0]["area"] = 99
    errors = cobandit.validate_scenario(json.dumps(cfg))
    assert any("area" in e for e in errors)


def small_config():
    cfg = json.loads(cobandit.baseline_scenario_json())
    cfg["devices"] = cfg["devices"][:8]
    cfg["horizon"] = 120
    return json.dumps(cfg)


def test_run_scenario_deterministic():
    a = cobandit.run_scenario(small_config(), algorithm="cobandit", seed=42)
    b = cobandit.run_scenario(small_config(), algorithm="cobandit", seed=42)
    assert a["distance_series"] == b["distance_series"]
    assert a["download_bytes"] == b["download_bytes"]
    assert len(a["distance_series"]) == 120
    assert all(v >= 0 for v in a["distance_series"])
    assert set(a["download_bytes"]) == set(range(1, 9))


def test_run_experiment_aggregate():
    rep = cobandit.run_experiment(small_config(), algorithm="ewa", runs=4, base_seed=3,
                                  parallelism=2)
    assert rep["runs"] == 4
    assert len(rep["per_run"]) == 4
    assert rep["per_run"][0]["seed"] == 3
    assert rep["per_run"][3]["seed"] == 6
    assert 0.0 <= rep["pct_stable"] <= 100.0
    assert not math.isnan(rep["median_download_gb"])
