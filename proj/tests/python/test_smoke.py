import json
import math

import numpy as np
import pytest

import rffcap


def test_capacity_example():
    r = rffcap.user_capacity(3.5, 0.01, 1000)
    assert r["n_c"] == 12
    assert not r["saturated"]
    assert rffcap.user_capacity(0.0, 0.01, 1000)["below_min"]


def test_fano_bounds():
    assert rffcap.fano_lower_bound(0.0, 4, 0.0) == pytest.approx(2.0 / math.log2(3.0))
    assert rffcap.fano_upper_bound(0.0, 4) == pytest.approx(1.0)
    assert rffcap.check_fano_consistency(math.log2(10.0), 10, 0.0)
    with pytest.raises(ValueError):
        rffcap.fano_lower_bound(0.5, 2, 0.1)


def test_preamble_is_unit_power():
    x = np.asarray(rffcap.ideal_preamble(4e6, 8))
    assert x.shape == (512,)
    assert np.mean(np.abs(x) ** 2) == pytest.approx(1.0, rel=1e-12)


def test_simulate_and_fingerprint_pipeline():
    devices = rffcap.draw_population(4, seed=3)
    assert [d.device_id for d in devices] == [0, 1, 2, 3]
    cfg = rffcap.PipelineConfig()
    cfg.n_fft = 128
    cfg.snr_db = 25.0
    samples = np.asarray(rffcap.simulate_capture(devices[0], cfg, 1))
    assert samples.dtype == np.complex128
    assert np.all(np.abs(samples.real) <= cfg.full_scale_vpp / 2)

    x, y = rffcap.build_dataset(devices, 30, cfg, seed=5)
    assert x.shape == (120, 128)
    assert sorted(set(y)) == [0, 1, 2, 3]
    x2, _ = rffcap.build_dataset(devices, 30, cfg, seed=5, threads=2)
    np.testing.assert_array_equal(x, x2)

    mi = rffcap.per_feature_mi(x, y, 16)
    assert len(mi) == 128
    assert min(mi) >= 0.0
    est = rffcap.emi_kde(x, y, projected_dim=3)
    assert 0.0 <= est["emi_bits"] <= 2.0


def test_emi_of_separated_clusters():
    rng = np.random.default_rng(0)
    centers = np.array([[0, 0], [100, 0], [0, 100], [100, 100]], dtype=float)
    y = np.repeat(np.arange(4), 200)
    x = centers[y] + rng.standard_normal((800, 2))
    assert rffcap.emi_kde(x, y, 2)["emi_bits"] == pytest.approx(2.0, abs=0.05)
    assert rffcap.emi_kde(x, y, 2, projection="pca")["emi_bits"] == pytest.approx(2.0, abs=0.05)
    with pytest.raises(ValueError):
        rffcap.emi_kde(x, y, 2, projection="lda")


def test_lda_on_separated_classes():
    rng = np.random.default_rng(1)
    centers = rng.normal(scale=20.0, size=(3, 6))
    ytr = np.repeat(np.arange(3), 100)
    yte = np.repeat(np.arange(3), 50)
    out = rffcap.lda_error_rate(centers[ytr] + rng.standard_normal((300, 6)), ytr,
                                centers[yte] + rng.standard_normal((150, 6)), yte)
    assert out["pe"] == 0.0
    assert out["kappa_eff"] == 2


def test_sweep_is_thread_invariant():
    config = {
        "seed": 5,
        "population": {"n_devices": 8},
        "estimator": {"per_class": 40, "projected_dim": 3},
        "scenario": {"n_train_devices": 6},
        "feature": {"n_fft": 128},
        "sweep": {"axis": "snr_db", "values": [15, 25]},
    }
    text = json.dumps(config)
    a = rffcap.run_sweep_csv(text, 1)
    b = rffcap.run_sweep_csv(text, 3)
    assert a == b
    lines = a.strip().splitlines()
    assert lines[0].startswith("axis,axis_value,seed,emi_bits")
    assert len(lines) == 3
