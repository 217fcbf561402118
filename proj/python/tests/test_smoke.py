import math

import numpy as np
import pytest

import pdpap


def test_assembly_single_node():
    system = pdpap.assemble(pdpap.PdeFamily.ScalarReaction, pdpap.GridSpec(3), pdpap.Control(1.0), 2)
    assert system.A.shape == (1, 1)
    assert system.A.toarray()[0, 0] == pytest.approx(17.0)
    assert len(system.rhs) == 2


def test_split_steps_by_hand():
    import scipy.sparse as sp

    A = sp.csc_matrix(np.array([[2.0, -1.0], [-1.0, 2.0]]))
    rhs = np.ones(2)
    jacobi = pdpap.SplittingKind.parse("jacobi")
    gs = pdpap.SplittingKind.parse("gauss_seidel")
    assert np.allclose(pdpap.split_step(jacobi, A, rhs, pdpap.SplitterState(jacobi, np.zeros(2))).u, [0.5, 0.5])
    assert np.allclose(pdpap.split_step(gs, A, rhs, pdpap.SplitterState(gs, np.zeros(2))).u, [0.5, 0.75])
    assert pdpap.diagnose(jacobi, A).alpha == pytest.approx(0.5, rel=1e-6)


def test_prox_and_operator_norm():
    reg = pdpap.RegConfig(alpha=1e-5, lambda_=0.1)
    assert pdpap.prox_F(4.0, 0.025, reg) == pytest.approx(4.0 / (1 + 2.5e-7))
    assert pdpap.prox_F(0.05, 1.0, reg) == 0.1
    k = pdpap.estimate_K_norm(pdpap.GridSpec(51))
    assert 7.9 <= k * k <= 8.0


def test_config_round_trip_and_errors():
    cfg = pdpap.ExperimentConfig.defaults(pdpap.Experiment.DiffusionCoefficient, pdpap.GridSize.Custom, 15)
    text = cfg.serialize()
    assert pdpap.ExperimentConfig.parse(text).serialize() == text
    with pytest.raises(ValueError):
        pdpap.ExperimentConfig.parse("unknown_key = 1")


def test_short_run():
    cfg = pdpap.ExperimentConfig.defaults(pdpap.Experiment.ScalarCoefficient, pdpap.GridSize.Custom, 11)
    cfg.iterations = 400
    cfg.log_every = 100
    cfg.splitting = pdpap.SplittingKind.parse("gauss_seidel")
    out = pdpap.run(cfg)
    log = out["log"]
    assert list(log["k"]) == [0, 100, 200, 300, 400]
    assert log["c"][0] == 4.0
    assert log["J_exact"][-1] < log["J_exact"][0]
    assert 0.1 <= out["x"].c <= 10.0
    assert math.isclose(pdpap.relative_error(out["x"], out["truth"]), log["relerr"][-1])
