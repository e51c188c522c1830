import numpy as np
import pytest

from app.errors import DimensionError, NumericalError
from app.linalg import (
    as_index_set,
    as_matrix,
    extreme_singular_values,
    least_squares,
    normal_solve_pair,
    singular_values,
    spectral_norm,
    submatrix,
)


def test_submatrix_selects_columns():
    A = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    np.testing.assert_array_equal(submatrix(A, [0, 2]), [[1.0, 0.0], [0.0, 0.0]])
    np.testing.assert_array_equal(submatrix(A, [0, 1, 2]), A)


def test_submatrix_seeded_columns_verbatim(gaussian):
    A = gaussian(4, 6, seed=3)
    S = submatrix(A, [1, 3])
    np.testing.assert_array_equal(S[:, 0], A[:, 1])
    np.testing.assert_array_equal(S[:, 1], A[:, 3])
    assert not S.flags.writeable


@pytest.mark.parametrize("S", [[0, 5], [2, 1], [1, 1], [-1, 2]])
def test_submatrix_rejects_bad_index_sets(S):
    with pytest.raises(DimensionError):
        submatrix(np.eye(4), S)


def test_as_index_set_accepts_empty():
    assert as_index_set([], 3).size == 0


def test_as_matrix_rejects_non_finite():
    with pytest.raises(NumericalError):
        as_matrix([[1.0, np.nan]])
    with pytest.raises(DimensionError):
        as_matrix([1.0, 2.0])


def test_least_squares_trivial_cases():
    np.testing.assert_allclose(least_squares(np.eye(3), np.array([1.0, 2.0, 3.0])), [1, 2, 3])
    np.testing.assert_allclose(least_squares(np.array([[1.0], [1.0]]), np.array([0.0, 2.0])), [1.0])


def test_least_squares_matches_normal_equations(gaussian, rng):
    A = gaussian(8, 3, seed=11)
    y = rng.standard_normal(8)
    z = least_squares(A, y)
    oracle = np.linalg.solve(A.T @ A, A.T @ y)
    np.testing.assert_allclose(z, oracle, atol=1e-10)
    # 잔차 직교성
    np.testing.assert_allclose(A.T @ (A @ z - y), 0.0, atol=1e-8)


def test_least_squares_rank_deficient_is_min_norm(rng):
    B = rng.standard_normal((6, 2))
    A = np.column_stack([B, B[:, 0] + B[:, 1]])
    y = rng.standard_normal(6)
    np.testing.assert_allclose(least_squares(A, y), np.linalg.pinv(A) @ y, atol=1e-10)


def test_least_squares_underdetermined_is_min_norm(rng):
    A = rng.standard_normal((3, 5))
    y = rng.standard_normal(3)
    z = least_squares(A, y)
    np.testing.assert_allclose(A @ z, y, atol=1e-10)
    np.testing.assert_allclose(z, np.linalg.pinv(A) @ y, atol=1e-10)


def test_least_squares_without_columns_is_empty():
    z = least_squares(np.zeros((3, 0)), np.ones(3))
    assert z.shape == (0,)


def test_normal_solve_pair_matches_normal_equations(gaussian, rng):
    A = gaussian(9, 4, seed=21)
    y = rng.standard_normal(9)
    c = rng.standard_normal(4)
    z, g = normal_solve_pair(A, y, c)
    G = A.T @ A
    np.testing.assert_allclose(z, np.linalg.solve(G, A.T @ y), atol=1e-10)
    np.testing.assert_allclose(g, np.linalg.solve(G, c), atol=1e-10)


def test_normal_solve_pair_rejects_rank_deficient(rng):
    B = rng.standard_normal((6, 2))
    A = np.column_stack([B, 2.0 * B[:, 0]])
    assert normal_solve_pair(A, np.ones(6), np.ones(3)) is None
    assert normal_solve_pair(rng.standard_normal((2, 3)), np.ones(2), np.ones(3)) is None


def test_least_squares_dimension_mismatch():
    with pytest.raises(DimensionError):
        least_squares(np.eye(3), np.ones(2))


def test_spectral_norm_trivial():
    assert spectral_norm(np.eye(4)) == pytest.approx(1.0, abs=1e-14)
    assert spectral_norm(np.diag([3.0, 1.0])) == pytest.approx(3.0, abs=1e-14)


@pytest.mark.parametrize("shape", [(5, 7), (7, 5), (6, 6), (1, 4)])
def test_singular_values_match_eigen_oracle(shape, rng):
    A = rng.standard_normal(shape)
    k = min(shape)
    # A^T A (또는 A A^T) 의 고유값 제곱근
    gram = A.T @ A if shape[0] >= shape[1] else A @ A.T
    oracle = np.sqrt(np.clip(np.sort(np.linalg.eigvalsh(gram))[::-1], 0, None))[:k]
    np.testing.assert_allclose(singular_values(A), oracle, rtol=1e-10, atol=1e-12)


def test_spectral_norm_homogeneous_and_submultiplicative(rng):
    A = rng.standard_normal((5, 4))
    B = rng.standard_normal((4, 6))
    for c in rng.standard_normal(3):
        assert spectral_norm(c * A) == pytest.approx(abs(c) * spectral_norm(A), rel=1e-10)
    assert spectral_norm(A @ B) <= spectral_norm(A) * spectral_norm(B) + 1e-10


def test_extreme_singular_values():
    assert extreme_singular_values(np.eye(3)) == pytest.approx((1.0, 1.0))
    assert extreme_singular_values(np.diag([2.0, 0.5])) == pytest.approx((0.5, 2.0))
    # 가로로 긴 행렬은 Gram 이 특이
    smin, smax = extreme_singular_values(np.ones((2, 3)))
    assert smin == 0.0 and smax == pytest.approx(np.sqrt(6.0))


def test_extreme_singular_values_closed_form_2x2(rng):
    A = rng.standard_normal((6, 2))
    G = A.T @ A
    tr, det = np.trace(G), np.linalg.det(G)
    disc = np.sqrt(tr * tr / 4 - det)
    expected = (np.sqrt(tr / 2 - disc), np.sqrt(tr / 2 + disc))
    np.testing.assert_allclose(extreme_singular_values(A), expected, rtol=1e-10)


def test_submatrix_norm_never_exceeds_full(rng):
    A = rng.standard_normal((5, 8))
    full = spectral_norm(A)
    for _ in range(10):
        S = np.sort(rng.choice(8, size=3, replace=False))
        assert extreme_singular_values(submatrix(A, S))[1] <= full + 1e-10
