import os
import pathlib

import numpy as np
import pytest

import airfed

CONFIGS = pathlib.Path(os.environ.get("AIRFED_CONFIG_DIR", pathlib.Path(__file__).parents[2] / "configs"))


def small_problem(seed=1):
    cfg = airfed.GenConfig()
    cfg.n_devices = 10
    cfg.samples_per_device = 20
    return airfed.gen_problem(cfg, airfed.Rng(seed, airfed.Stream.problem))


def test_problem_and_prox():
    p = small_problem()
    assert len(p) == 10
    assert p.kappa >= 1.0
    assert airfed.optimality_gap(p, p.theta_star) == 0.0
    dev = p.devices[0]
    z = np.ones(6)
    s = 0.5
    x = airfed.prox(dev, s, z)
    resid = dev.gram @ x - dev.moment + (x - z) / s
    assert np.linalg.norm(resid) <= 1e-9 * (1 + np.linalg.norm(z))
    x_np = np.linalg.solve(dev.gram + np.eye(6) / s, dev.moment + z / s)
    np.testing.assert_allclose(x, x_np, rtol=1e-10)


def test_noiseless_aggregation_is_average():
    rng = airfed.Rng(3)
    models = [np.array([1.0, 2.0]), np.array([3.0, -1.0]), np.array([0.5, 0.5])]
    params = airfed.ChannelParams()
    params.noise_var = 0.0
    params.threshold = 0.0
    out = airfed.aircomp_aggregate(models, params, rng)
    np.testing.assert_allclose(out.estimate, np.mean(models, axis=0), atol=1e-12)
    assert out.max_tx_power <= params.max_power + 1e-12


def test_theory_values():
    assert airfed.contraction_factor(9.0) == 0.5
    assert airfed.theorem1_bound(4.0, 9.0, 2) == 0.5
    exact, _ = airfed.iteration_complexity(0.5, 9.0)
    assert exact == 1
    with pytest.raises(airfed.AirfedError, match="InvalidKappa"):
        airfed.contraction_factor(0.5)


def test_run_experiment(tmp_path):
    cfg = airfed.load_config(str(CONFIGS / "well_conditioned.cfg"))
    cfg.set("problem.devices", "20")
    cfg.set("channel.error_free", "true")
    cfg.rounds = 30
    cfg.trials = 2
    cfg.output_dir = str(tmp_path)
    res = airfed.run_experiment(cfg)
    assert len(res.mean_gap) == 30
    assert res.final_mean_gap < 1e-6 * res.initial_gap
    text = (tmp_path / "result.csv").read_text()
    assert text == res.to_csv()
    assert text.splitlines()[0].startswith("round,mean_gap")


def test_config_errors():
    with pytest.raises(airfed.AirfedError):
        airfed.parse_config("[run]\nrounds = 4\n")


def test_validate_prox():
    ok, report = airfed.validate("prox", 2)
    assert ok, report
