import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from signed_reservoir.analysis import (MemoryReport, RankPolicy, covariance_rank, covariance_ranks,
                                       memory_capacity, memory_curve, squared_correlation)
from signed_reservoir.errors import SpecError
from signed_reservoir.network import flip_edges, make_base_network, make_input_vector, normalize_spectral
from signed_reservoir.reservoir import ReservoirConfig, StateMatrix
from signed_reservoir.signals import uniform_drive


def _exact_rank(a):
    m = [[Fraction(int(v)) for v in row] for row in a]
    rank = 0
    for c in range(len(m[0])):
        piv = next((r for r in range(rank, len(m)) if m[r][c] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for r in range(len(m)):
            if r != rank and m[r][c] != 0:
                f = m[r][c] / m[rank][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[rank])]
        rank += 1
    return rank


def test_exact_rank_oracle():
    g = np.random.default_rng(11)
    for _ in range(300):
        n, k = int(g.integers(3, 12)), int(g.integers(2, 9))
        r = int(g.integers(1, min(n, k) + 1))
        a = g.integers(-2, 3, (n, r)) @ g.integers(-2, 3, (r, k))
        expected = _exact_rank(a)
        # power-of-two rescaling keeps the entries exact and sigma_max(X) <= 1
        scale = 2.0 ** np.ceil(np.log2(max(np.linalg.norm(a, 2), 1.0)))
        assert covariance_rank(a / scale, RankPolicy.ULP_SCALED).gamma == expected


def test_identity_block_with_bias():
    nodes = np.vstack([np.eye(5), np.zeros((2, 5))])
    om = StateMatrix.from_nodes(nodes)
    expected = _exact_rank(om.values)
    assert expected == 6
    assert covariance_rank(om, include_bias=True).gamma == expected
    assert covariance_rank(om).gamma == 5


def test_duplicate_columns_collapse_rank():
    g = np.random.default_rng(2)
    nodes = g.standard_normal((40, 6)) * 0.1
    nodes[:, 4] = nodes[:, 1]
    om = StateMatrix.from_nodes(nodes)
    rep = covariance_rank(om, include_bias=True)
    assert rep.gamma < om.M + 1
    assert covariance_ranks(om)[RankPolicy.FIXED_RELATIVE].gamma == 5


def test_tolerance_formula():
    g = np.random.default_rng(3)
    X = g.standard_normal((10000, 100))
    rep = covariance_rank(X, "ulp_scaled")
    sigma = np.linalg.svd(X, compute_uv=False)[0]
    assert rep.tolerance_used == 10000 * np.spacing(sigma)
    assert rep.tolerance_used == 10000 * (np.nextafter(sigma, np.inf) - sigma)
    rel = covariance_rank(X, "fixed_relative_1e-6")
    assert rel.tolerance_used == pytest.approx(1e-6 * sigma ** 2, rel=1e-12)
    d = json.loads(rep.to_json())
    assert float(d["tolerance_used"]) == rep.tolerance_used and d["policy"] == "ulp_scaled"


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 8))
def test_rank_report_invariants(seed, rank):
    g = np.random.default_rng(seed)
    X = g.standard_normal((30, rank)) @ g.standard_normal((rank, 8))
    # keep sigma_max(X) <= 1 so rounding noise in X^T X stays below the ulp tolerance
    X = X / 2.0 ** np.ceil(np.log2(np.linalg.norm(X, 2)))
    for policy in RankPolicy:
        rep = covariance_rank(X, policy)
        assert 0 <= rep.gamma <= min(X.shape)
        assert np.all(np.diff(rep.singular_values) <= 0) and np.all(rep.singular_values >= 0)
        p = g.permutation(8)
        assert covariance_rank(X[:, p], policy).gamma == rep.gamma
    gammas = [covariance_rank(X, RankPolicy.FIXED_RELATIVE, relative_threshold=t).gamma
              for t in (1e-8, 1e-6, 1e-4)]
    assert gammas[0] >= gammas[1] >= gammas[2]


def test_both_policies_agree_with_single_calls():
    X = np.random.default_rng(4).standard_normal((50, 9))
    both = covariance_ranks(X)
    for policy in RankPolicy:
        assert both[policy].gamma == covariance_rank(X, policy).gamma
        assert both[policy].tolerance_used == covariance_rank(X, policy).tolerance_used


def test_delay_line_surrogate():
    N, first = 10000, 100
    s = uniform_drive(first + N, 0).samples
    rows = np.arange(first, first + N)
    nodes = np.stack([s[rows - j] for j in range(1, 11)], axis=1)
    rep = memory_curve(StateMatrix.from_nodes(nodes), s, first, 100)
    assert np.all(rep.mc_k[:10] > 1 - 1e-9)
    assert np.all(rep.mc_k[10:] < 0.01)
    assert rep.mc_total == pytest.approx(10.0, abs=0.2)
    assert rep.mc_total == pytest.approx(rep.mc_k.sum())


def test_independent_noise_has_no_memory():
    N, first = 10000, 100
    s = uniform_drive(first + N, 1).samples
    nodes = np.random.default_rng(2).standard_normal((N, 100))
    rep = memory_curve(StateMatrix.from_nodes(nodes), s, first, 20)
    assert np.all(rep.mc_k < 0.02)


def test_floor_truncation():
    # with one informative column the in-sample r^2 at other delays is ~1/N
    N, first = 100000, 50
    s = uniform_drive(first + N, 1).samples
    rows = np.arange(first, first + N)
    rep = memory_curve(np.stack([s[rows - 1], np.ones(N)], axis=1), s, first, 50)
    assert rep.truncation_reason == "below_floor"
    assert len(rep.mc_k) < 50 and np.all(rep.mc_k[-5:] < 1e-4)


def test_memory_errors():
    om = StateMatrix.from_nodes(np.zeros((10, 2)))
    with pytest.raises(SpecError):
        memory_curve(om, np.zeros(20), 5, 6)
    with pytest.raises(SpecError):
        memory_curve(om, np.zeros(20), 5, 0)
    with pytest.raises(SpecError):
        memory_capacity(np.zeros((2, 2)), np.ones(2), ReservoirConfig(M=2, transient=10, n_record=10), k_max=11)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_squared_correlation_affine_invariance(seed):
    g = np.random.default_rng(seed)
    a, b = g.standard_normal(200), g.standard_normal(200)
    b = b + 0.5 * a
    r = squared_correlation(a, b)
    assert 0 <= r <= 1
    assert abs(squared_correlation(3 * a + 1, b) - r) < 1e-12
    assert r == pytest.approx(np.corrcoef(a, b)[0, 1] ** 2, abs=1e-12)


def _reference_memory(A, w, alpha, s, transient, k_max, k):
    # plain numpy loop and augmented least squares, written separately from the package code
    M = A.shape[0]
    r = np.zeros(M)
    states = []
    for n in range(s.size):
        r = alpha * r + (1 - alpha) * np.tanh(A @ r + w * s[n] + 1)
        if n >= transient:
            states.append(r.copy())
    X = np.hstack([np.array(states), np.ones((len(states), 1))])
    rows = np.arange(transient, s.size)
    total = 0.0
    aug = np.vstack([X, k * np.eye(X.shape[1])])
    for d in range(1, k_max + 1):
        target = s[rows - d]
        coef = np.linalg.lstsq(aug, np.concatenate([target, np.zeros(X.shape[1])]), rcond=None)[0]
        total += np.corrcoef(X @ coef, target)[0, 1] ** 2
    return total


def test_memory_capacity_two_implementations():
    base = make_base_network(100, 9800, seed=0)
    A = normalize_spectral(flip_edges(base, 4900, seed=1), 1.36)
    w = make_input_vector(100, "alternating")
    cfg = ReservoirConfig(node_kind="leaky_tanh", alpha=0.66, transient=2000, n_record=10000)
    rep = memory_capacity(A, w, cfg, k_max=100, seed=5)
    assert isinstance(rep, MemoryReport)
    assert np.all((rep.mc_k >= 0) & (rep.mc_k <= 1)) and rep.mc_total <= rep.k_max
    s = uniform_drive(cfg.n_total, 5).samples
    ref = _reference_memory(np.asarray(A.entries), np.asarray(w.entries), 0.66, s, 2000, len(rep.mc_k), 1e-5)
    assert abs(rep.mc_total - ref) <= 0.02 * ref
