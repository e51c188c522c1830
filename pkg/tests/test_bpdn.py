import numpy as np
import pytest
from scipy.optimize import linprog

from app.bpdn import bpdn_solve, dual_objective, project_ball, soft_threshold
from app.ensembles import gen_noise, gen_signal
from app.errors import DimensionError
from schemas import BpdnConfig, SignalSpec


def lp_oracle(Phi, y):
    """min 1^T (u + v)  s.t.  Phi (u - v) = y,  u, v >= 0"""
    m, d = Phi.shape
    res = linprog(np.ones(2 * d), A_eq=np.hstack([Phi, -Phi]), b_eq=y, bounds=(0, None), method="highs")
    assert res.success
    return res.fun, res.x[:d] - res.x[d:]


def test_soft_threshold_and_projection():
    np.testing.assert_allclose(soft_threshold(np.array([3.0, -0.5, -2.0]), 1.0), [2.0, 0.0, -1.0])
    center = np.zeros(2)
    np.testing.assert_allclose(project_ball(np.array([3.0, 4.0]), center, 1.0), [0.6, 0.8])
    np.testing.assert_array_equal(project_ball(np.array([0.1, 0.1]), center, 1.0), [0.1, 0.1])


def test_zero_is_optimal_inside_ball():
    y = np.array([0.3, -0.1, 0.2])
    result = bpdn_solve(np.eye(3), y, BpdnConfig(epsilon=0.5))
    assert not result.solution.any()
    assert result.objective == 0.0
    assert result.converged and result.iterations == 0


def test_identity_with_zero_radius_returns_y():
    y = np.array([1.0, -2.0, 0.0, 0.5])
    result = bpdn_solve(np.eye(4), y, BpdnConfig(epsilon=0.0))
    np.testing.assert_allclose(result.solution, y, atol=1e-12)


def test_sparse_recovery_matches_lp_oracle(gaussian):
    A = gaussian(10, 20, seed=3)
    x = gen_signal(SignalSpec(d=20, s=2, seed=4))
    y = A @ x
    result = bpdn_solve(A, y, BpdnConfig(epsilon=0.0))
    optimum, z_lp = lp_oracle(A, y)
    np.testing.assert_allclose(result.solution, x, atol=1e-6)
    np.testing.assert_allclose(z_lp, x, atol=1e-6)
    assert result.objective == pytest.approx(optimum, abs=1e-5)


def test_objective_matches_lp_oracle_on_twenty_instances(gaussian):
    for seed in range(20):
        A = gaussian(12, 24, seed=100 + seed)
        x = gen_signal(SignalSpec(d=24, s=3, tail_alpha=0.1, tail_beta=0.15, seed=200 + seed))
        y = A @ x
        result = bpdn_solve(A, y, BpdnConfig(epsilon=0.0))
        optimum, _ = lp_oracle(A, y)
        assert result.objective == pytest.approx(optimum, abs=1e-5)
        assert result.constraint_slack >= -1e-9
        # 쌍대 하한이 최적값을 같은 정밀도로 감싼다
        assert result.dual_bound <= optimum + 1e-9
        assert result.duality_gap <= 1e-5


def test_noisy_solution_is_feasible_with_weak_duality(gaussian):
    A = gaussian(12, 24, seed=7)
    x = gen_signal(SignalSpec(d=24, s=2, seed=8))
    y = A @ x + gen_noise(12, 0.05, 9)
    result = bpdn_solve(A, y, BpdnConfig(epsilon=0.05))
    assert result.constraint_slack >= -1e-9
    assert result.dual_bound <= result.objective + 1e-9
    assert result.duality_gap == pytest.approx(result.objective - result.dual_bound)
    assert result.duality_gap <= 1e-3 * result.objective


def test_dual_objective_of_zero_is_zero():
    assert dual_objective(np.eye(2), np.ones(2), 0.1, np.zeros(2)) == 0.0


def test_scaling_covariance(gaussian):
    A = gaussian(10, 20, seed=11)
    x = gen_signal(SignalSpec(d=20, s=2, seed=12))
    y = A @ x + gen_noise(10, 0.02, 13)
    base = bpdn_solve(A, y, BpdnConfig(epsilon=0.02)).solution
    scaled = bpdn_solve(3.7 * A, 3.7 * y, BpdnConfig(epsilon=3.7 * 0.02)).solution
    np.testing.assert_allclose(scaled, base, atol=1e-8)


def test_objective_non_increasing_in_epsilon(gaussian):
    A = gaussian(10, 20, seed=21)
    x = gen_signal(SignalSpec(d=20, s=3, seed=22))
    y = A @ x + gen_noise(10, 0.05, 23)
    objectives = [bpdn_solve(A, y, BpdnConfig(epsilon=eps)).objective for eps in (0.0, 0.02, 0.05, 0.1, 0.3)]
    assert all(b <= a + 1e-6 for a, b in zip(objectives, objectives[1:]))


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        bpdn_solve(np.eye(3), np.ones(4), BpdnConfig(epsilon=0.1))


def test_zero_decoder_is_reported_infeasible():
    result = bpdn_solve(np.zeros((2, 3)), np.array([1.0, 0.0]), BpdnConfig(epsilon=0.1))
    assert not result.converged
    assert not result.solution.any()
    assert result.constraint_slack == pytest.approx(-0.9)


def test_noisy_optimum_is_certified_early(gaussian):
    A = gaussian(12, 24, seed=31)
    x = gen_signal(SignalSpec(d=24, s=2, seed=32))
    y = A @ x + gen_noise(12, 0.05, 33)
    result = bpdn_solve(A, y, BpdnConfig(epsilon=0.05))
    assert result.converged
    assert result.duality_gap <= 1e-8 * result.objective
    assert result.iterations < 50000
    assert result.constraint_slack >= -1e-9
