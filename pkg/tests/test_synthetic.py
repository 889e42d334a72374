import json

import numpy as np
import pytest

from awnn.matrix import load_csv
from awnn.synthetic import (SyntheticSpec, calibrate_noise, generate, holder_f, read_metadata,
                            snr_of, write_instance)


def test_holder_f_cancels():
    u = np.array([0.3, -0.2, 0.1])
    assert holder_f(u, -u, 0.7) == 0.0


def test_holder_f_identity_at_lambda_one():
    assert holder_f([0.1], [0.15], 1.0) == pytest.approx(0.25, abs=1e-15)


def test_holder_f_half_power():
    # sqrt(0.25) - sqrt(0.04)
    assert holder_f([0.25, -0.04], [0.0, 0.0], 0.5) == pytest.approx(0.3, abs=1e-15)


def test_holder_f_sign_zero():
    assert holder_f([0.0], [0.0], 0.5) == 0.0


def test_holder_f_odd(rng):
    u, v = rng.uniform(-0.5, 0.5, (2, 100, 3))
    np.testing.assert_array_equal(holder_f(-u, -v, 0.6), -holder_f(u, v, 0.6))


@pytest.mark.parametrize("lam", [0.25, 0.5, 1.0])
def test_holder_property(rng, lam):
    d = 2
    x, y = rng.uniform(-0.5, 0.5, (2, 1000, 2 * d))
    fx = holder_f(x[:, :d], x[:, d:], lam)
    fy = holder_f(y[:, :d], y[:, d:], lam)
    gap = np.abs(x - y).max(axis=1)
    assert np.all(np.abs(fx - fy) <= 2 * d * gap ** lam + 1e-12)


def test_calibrate_constant():
    assert calibrate_noise(np.full((3, 4), -2.0), 1.0) == 4.0
    assert calibrate_noise(np.full((3, 4), 2.0), 2.0) == 1.0


def test_calibrate_round_trip(rng):
    theta = rng.normal(size=(20, 30))
    for snr in (0.5, 1.0, 2.0, 10.0):
        assert abs(snr_of(theta, calibrate_noise(theta, snr)) - snr) <= 1e-12 * snr


def test_calibrate_zero_signal():
    with pytest.raises(ValueError, match="SNR undefined"):
        calibrate_noise(np.zeros((2, 2)), 1.0)


def test_generate_full_observation():
    inst = generate(SyntheticSpec(10, 12, p=1.0, seed=1))
    assert inst.data.observed.all()
    assert inst.u.shape == (10, 2) and inst.v.shape == (12, 2)
    assert np.all(np.abs(inst.u) <= 0.5)


def test_generate_theta_is_f_of_latents():
    inst = generate(SyntheticSpec(8, 9, d=3, lam=0.75, seed=2))
    for i in range(8):
        for j in range(9):
            assert inst.theta.values[i, j] == holder_f(inst.u[i], inst.v[j], 0.75)


def test_generate_vanishing_noise():
    inst = generate(SyntheticSpec(8, 8, snr=1e9, seed=3))
    th = inst.theta.values
    assert np.abs(inst.data.values - th).max() <= 1e-6 * np.abs(th).max()


def test_generate_deterministic():
    a = generate(SyntheticSpec(20, 15, p=0.65, seed=42))
    b = generate(SyntheticSpec(20, 15, p=0.65, seed=42))
    assert a.data == b.data
    assert np.array_equal(a.theta.values, b.theta.values)
    assert a.sigma_eps2 == b.sigma_eps2
    c = generate(SyntheticSpec(20, 15, p=0.65, seed=43))
    assert not np.array_equal(a.theta.values, c.theta.values)


def test_theta_bounded():
    inst = generate(SyntheticSpec(50, 50, d=3, lam=0.5, seed=4))
    assert np.abs(inst.theta.values).max() <= 3


def test_observation_rate_within_three_sd():
    p, n = 0.65, 120
    fails = 0
    for seed in range(20):
        obs = generate(SyntheticSpec(n, n, p=p, seed=seed)).data.observed.mean()
        fails += abs(obs - p) > 3 * np.sqrt(p * (1 - p) / n ** 2)
    assert fails <= 1


def test_noise_independent_of_mask():
    # same seed, different p: noise and latents are drawn from their own streams
    a = generate(SyntheticSpec(30, 30, p=1.0, seed=5))
    b = generate(SyntheticSpec(30, 30, p=0.5, seed=5))
    obs = b.data.observed
    assert np.array_equal(a.data.values[obs], b.data.values[obs])


@pytest.mark.parametrize("kw", [dict(lam=1.5), dict(lam=0.0), dict(p=0.0), dict(snr=0.0), dict(n=0)])
def test_spec_validation(kw):
    args = dict(n=5, m=5)
    args.update(kw)
    with pytest.raises(ValueError):
        SyntheticSpec(**args)


def test_write_instance(tmp_path):
    inst = generate(SyntheticSpec(6, 5, p=0.5, seed=8))
    write_instance(inst, tmp_path / "out")
    assert load_csv(tmp_path / "out" / "data.csv") == inst.data
    assert np.array_equal(load_csv(tmp_path / "out" / "theta.csv").values, inst.theta.values)
    meta = read_metadata(tmp_path / "out" / "meta.json")
    assert meta["sigma_eps2"] == inst.sigma_eps2
    assert {"n", "m", "d", "lambda", "snr", "p", "seed", "generator"} <= set(meta)


def test_read_metadata_missing_keys(tmp_path):
    p = tmp_path / "meta.json"
    p.write_text(json.dumps({"n": 1}))
    with pytest.raises(ValueError, match="missing keys"):
        read_metadata(p)
