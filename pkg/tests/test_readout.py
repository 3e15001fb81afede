import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from signed_reservoir.errors import SpecError, ZeroVarianceError
from signed_reservoir.network import flip_edges, make_base_network, make_input_vector, normalize_spectral
from signed_reservoir.readout import (DEFAULT_RIDGE, ReadoutModel, fit, ridge_solve, ridge_svd,
                                      training_error)
from signed_reservoir.readout import testing_error as tx_error
from signed_reservoir.reservoir import ReservoirConfig, StateMatrix, run_reservoir
from signed_reservoir.signals import LorenzParams, lorenz_generate, lorenz_init_from_seed


def _omega(seed, N=50, M=7):
    g = np.random.default_rng(seed)
    return StateMatrix.from_nodes(g.standard_normal((N, M))), g


def _two_pass_std(v):
    mean = sum(v) / len(v)
    return (sum((x - mean) ** 2 for x in v) / len(v)) ** 0.5


def test_default_ridge():
    assert DEFAULT_RIDGE == 1e-5


def test_column_target_is_reproduced():
    om, _ = _omega(0)
    g = om.values[:, 3]
    model = fit(om, g)
    assert np.max(np.abs(model.predict(om) - g)) / np.max(np.abs(g)) < 1e-6


def test_orthogonal_target():
    om, rng = _omega(1)
    v = rng.standard_normal(om.N)
    Q, _ = np.linalg.qr(om.values)
    g = v - Q @ (Q.T @ v)
    model = fit(om, g)
    assert np.max(np.abs(model.coeffs)) < 1e-8
    assert training_error(om, model, g) == pytest.approx(1.0, abs=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([1e-5, 1e-3, 0.1, 1.0]))
def test_matches_normal_equations(seed, k):
    om, rng = _omega(seed, 50, 7)
    X = om.values
    g = rng.standard_normal(50)
    oracle = np.linalg.solve(X.T @ X + k * k * np.eye(X.shape[1]), X.T @ g)
    got = fit(om, g, k).coeffs
    assert np.linalg.norm(got - oracle) <= 1e-8 * np.linalg.norm(oracle)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(1e-6, 10.0))
def test_ridge_monotonicity(seed, k):
    om, rng = _omega(seed, 40, 6)
    g = rng.standard_normal(40)
    assert np.linalg.norm(fit(om, g, 10 * k).coeffs) <= np.linalg.norm(fit(om, g, k).coeffs) * (1 + 1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_row_order_invariance(seed):
    om, rng = _omega(seed, 60, 5)
    g = rng.standard_normal(60)
    p = rng.permutation(60)
    a = fit(om, g).coeffs
    b = fit(StateMatrix(om.values[p]), g[p]).coeffs
    assert np.max(np.abs(a - b)) < 1e-9


def test_small_ridge_converges_to_least_squares():
    om, rng = _omega(5, 200, 10)
    g = rng.standard_normal(200)
    Q, R = np.linalg.qr(om.values)
    oracle = np.linalg.solve(R, Q.T @ g)
    got = fit(om, g, 1e-12).coeffs
    assert np.linalg.norm(got - oracle) <= 1e-6 * np.linalg.norm(oracle)


def test_ridge_solve_many_targets():
    om, rng = _omega(6)
    G = rng.standard_normal((om.N, 3))
    U, S, Vt = ridge_svd(om.values)
    many = ridge_solve(U, S, Vt, G, 1e-5)
    for j in range(3):
        assert np.allclose(many[:, j], ridge_solve(U, S, Vt, G[:, j], 1e-5), atol=1e-14)


def test_error_examples():
    om, rng = _omega(7)
    g = om.values[:, 0]
    assert training_error(om, fit(om, g), g) < 1e-6
    h = rng.standard_normal(om.N)
    h = h - h.mean()
    zero = ReadoutModel(np.zeros(om.M + 1))
    assert training_error(om, zero, h) == pytest.approx(1.0, abs=1e-15)
    assert tx_error(om, zero, h) == pytest.approx(1.0, abs=1e-15)
    model = fit(om, h)
    resid = list(om.values @ model.coeffs - h)
    assert training_error(om, model, h) == pytest.approx(_two_pass_std(resid) / _two_pass_std(list(h)), abs=1e-12)
    assert tx_error(om, model, h) == training_error(om, model, h)


def test_error_conditions():
    om, _ = _omega(8)
    with pytest.raises(ZeroVarianceError):
        training_error(om, ReadoutModel(np.zeros(om.M + 1)), np.ones(om.N))
    with pytest.raises(SpecError):
        fit(om, np.ones(om.N + 1))
    with pytest.raises(SpecError):
        fit(om, np.ones(om.N), ridge_k=0.0)
    with pytest.raises(SpecError):
        training_error(om, ReadoutModel(np.zeros(3)), np.arange(om.N, dtype=float))


def test_json_round_trip(tmp_path):
    om, rng = _omega(9)
    model = fit(om, rng.standard_normal(om.N), 3e-4)
    model.save(tmp_path / "m.json")
    back = ReadoutModel.load(tmp_path / "m.json")
    assert np.array_equal(back.coeffs, model.coeffs) and back.ridge_k == model.ridge_k


def test_lorenz_pipeline_testing_error_below_one():
    base = make_base_network(100, 9800, seed=0)
    A = normalize_spectral(flip_edges(base, 980, seed=1), 0.5)
    w = make_input_vector(100, "alternating")
    cfg = ReservoirConfig(lam=1.4, transient=1000, n_record=4000)
    x, _, z = lorenz_generate(LorenzParams(n_steps=cfg.n_total))
    xt, _, zt = lorenz_generate(LorenzParams(n_steps=cfg.n_total, init=lorenz_init_from_seed(3)))
    om = run_reservoir(A, w, x, cfg)
    model = fit(om, z.samples[cfg.transient:])
    om_t = run_reservoir(A, w, xt, cfg)
    d_tx = tx_error(om_t, model, zt.samples[cfg.transient:])
    assert np.isfinite(d_tx) and d_tx < 1
