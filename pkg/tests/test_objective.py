import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from scenecompress.config import CompressionParams
from scenecompress.distinctiveness import score_avg_distance
from scenecompress.kernel import gram_matrix
from scenecompress.objective import evaluate, gershgorin_bound, oracle_solve, project_capped_simplex
from scenecompress.scene import synth_scene
from scenecompress.solver import initialize
from tests.conftest import direct_cost, direct_rbf

cp = pytest.importorskip("cvxpy")


def double_loop(alpha, x, d, tau, sigma):
    c = 0.0
    for i in range(len(x)):
        for j in range(len(x)):
            c += alpha[i] * alpha[j] * direct_rbf(x[i], x[j], sigma)
    dist = sum(di * ai for di, ai in zip(d, alpha))
    return c, dist, c - tau * dist


def test_one_hot_self_kernel():
    x = np.random.default_rng(0).random((6, 3))
    alpha = np.zeros(6)
    alpha[2] = 1.0
    b = evaluate(alpha, x, np.ones(6), 0.0, 1.0)
    assert b.coverage == 1.0 and b.total == 1.0


@pytest.mark.parametrize("m", [1, 7, 50])
def test_coincident_points_cover_fully(m):
    b = evaluate(np.full(m, 1 / m), np.ones((m, 3)), np.zeros(m), 1.0, 0.5)
    assert b.coverage == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_matches_double_loop(seed):
    rng = np.random.default_rng(seed)
    x = rng.uniform(0, 3, size=(15, 3))
    d = rng.random(15)
    alpha = rng.dirichlet(np.ones(15))
    b = evaluate(alpha, x, d, 1.7, 1.2)
    c, dist, total = double_loop(alpha, x, d, 1.7, 1.2)
    assert b.coverage == pytest.approx(c, abs=1e-12)
    assert b.distinctiveness == pytest.approx(dist, abs=1e-12)
    assert b.total == pytest.approx(total, abs=1e-12)
    assert abs(b.total - (b.coverage - 1.7 * b.distinctiveness)) <= 1e-12
    assert 0 <= b.coverage <= 1 and 0 <= b.distinctiveness <= 1


def test_length_mismatch():
    with pytest.raises(ValueError, match="length mismatch"):
        evaluate(np.ones(3) / 3, np.zeros((4, 3)), np.zeros(4), 1.0, 1.0)


def test_blocked_coverage_matches_dense():
    rng = np.random.default_rng(1)
    x = rng.uniform(0, 10, size=(3000, 3))
    alpha = np.where(rng.random(3000) < 0.5, rng.random(3000), 0.0)
    alpha /= alpha.sum()
    idx = np.flatnonzero(alpha)
    dense = alpha[idx] @ gram_matrix(x[idx], 2.0) @ alpha[idx]
    assert evaluate(alpha, x, np.zeros(3000), 0.0, 2.0).coverage == pytest.approx(dense, rel=1e-12)


# --- projection ---------------------------------------------------------------


def cvx_project(v, cap):
    z = cp.Variable(len(v))
    cp.Problem(cp.Minimize(cp.sum_squares(z - v)), [cp.sum(z) == 1, z >= 0, z <= cap]).solve()
    return z.value


@pytest.mark.parametrize("seed", range(5))
def test_projection_matches_cvxpy(seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=12)
    cap = 1 / (0.3 * 12)
    np.testing.assert_allclose(project_capped_simplex(v, cap), cvx_project(v, cap), atol=1e-6)


@given(st.integers(0, 10**6), st.integers(1, 60), st.floats(0.02, 1.0))
def test_projection_feasible_and_idempotent(seed, m, nu):
    rng = np.random.default_rng(seed)
    cap = 1 / (nu * m)
    p = project_capped_simplex(rng.normal(size=m) * 3, cap)
    assert abs(math.fsum(p) - 1) <= 1e-9
    assert p.min() >= 0 and p.max() <= cap + 1e-12
    np.testing.assert_allclose(project_capped_simplex(p, cap), p, rtol=0, atol=1e-12)


def test_projection_of_uniform_with_nu_one():
    p = project_capped_simplex(np.random.default_rng(0).random(9), 1 / 9)
    np.testing.assert_allclose(p, np.full(9, 1 / 9), atol=1e-15)


# --- oracle -------------------------------------------------------------------


def test_gershgorin_bounds_spectrum():
    k = gram_matrix(np.random.default_rng(2).random((25, 3)), 0.7)
    assert np.linalg.eigvalsh(k)[-1] <= gershgorin_bound(k) + 1e-12


def test_oracle_nu_one():
    scene = synth_scene(12, 5, 2.0, seed=0)
    alpha, _ = oracle_solve(scene, score_avg_distance(scene), CompressionParams(nu=1.0))
    np.testing.assert_allclose(alpha, np.full(12, 1 / 12), atol=1e-15)


def test_oracle_two_points_symmetric():
    x = np.array([[0.0, 0, 0], [0.5, 0, 0]])
    p = CompressionParams(nu=0.5, tau=0.0)
    alpha, j = oracle_solve(x, np.array([0.4, 0.4]), p, max_iters=20_000, tol=1e-300, start=np.array([1.0, 0.0]))
    k01 = direct_rbf(x[0], x[1], 1.0)
    # the cost is flat to second order, so alpha is only resolved to ~sqrt(eps)
    assert j == pytest.approx(0.5 * (1 + k01), abs=1e-14)
    np.testing.assert_allclose(alpha, [0.5, 0.5], atol=1e-6)


@pytest.mark.parametrize("seed", range(3))
def test_oracle_local_optimality_sweep(seed):
    rng = np.random.default_rng(seed)
    m, nu, tau, sigma = 30, 0.3, float(rng.uniform(0, 2)), 1.0
    x = rng.uniform(0, 4, size=(m, 3))
    d = rng.random(m)
    alpha, j_star = oracle_solve(x, d, CompressionParams(nu=nu, tau=tau, sigma=sigma), max_iters=100_000, tol=1e-15)
    k = gram_matrix(x, sigma)
    cap = 1 / (nu * m)
    assert direct_cost(alpha, k, d, tau) == pytest.approx(j_star, abs=1e-12)
    eps = 1e-4
    for i in range(m):
        for j in range(m):
            if i == j or alpha[i] + eps > cap or alpha[j] - eps < 0:
                continue
            trial = alpha.copy()
            trial[i] += eps
            trial[j] -= eps
            assert direct_cost(trial, k, d, tau) >= j_star - 1e-8


@pytest.mark.parametrize("seed", range(3))
def test_oracle_matches_cvxpy(seed):
    rng = np.random.default_rng(100 + seed)
    m, nu, tau, sigma = 25, 0.2, 1.0, 1.5
    x = rng.uniform(0, 5, size=(m, 3))
    d = rng.random(m)
    _, j_star = oracle_solve(x, d, CompressionParams(nu=nu, tau=tau, sigma=sigma), max_iters=100_000, tol=1e-15)
    k = gram_matrix(x, sigma)
    # factor K so the quadratic term is DCP-compliant
    w, v = np.linalg.eigh(k)
    f = v * np.sqrt(np.clip(w, 0, None))
    z = cp.Variable(m)
    prob = cp.Problem(cp.Minimize(cp.sum_squares(f.T @ z) - tau * d @ z), [cp.sum(z) == 1, z >= 0, z <= 1 / (nu * m)])
    prob.solve()
    assert j_star <= prob.value + 1e-6
    assert j_star == pytest.approx(prob.value, abs=1e-5)


def test_oracle_feasible_and_descends():
    scene = synth_scene(40, 10, 3.0, seed=6)
    d = score_avg_distance(scene)
    p = CompressionParams(nu=0.2, tau=0.5, sigma=1.0)
    alpha, j = oracle_solve(scene, d, p)
    init = initialize(d, 0.2, 40)
    assert init.__class__(alpha, init.cap).violations(0.2) == []
    assert j <= evaluate(init.alpha, scene, d, 0.5, 1.0).total + 1e-15
