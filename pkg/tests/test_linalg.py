import numpy as np
import pytest

from semirandom.errors import ShapeError
from semirandom.linalg import (
    hadamard,
    least_squares,
    matmul,
    matrix_rank,
    project_onto_colspace,
)


def naive_matmul(a, b):
    m, k = a.shape
    n = b.shape[1]
    out = np.zeros((m, n))
    for i in range(m):
        for j in range(n):
            acc = 0.0
            for t in range(k):
                acc += a[i, t] * b[t, j]
            out[i, j] = acc
    return out


class TestMatmul:
    def test_identity(self):
        a = np.arange(6.0).reshape(2, 3)
        np.testing.assert_array_equal(matmul(np.eye(2), a), a)

    def test_hand_example(self):
        out = matmul([[1.0, 2.0]], [[3.0], [4.0]])
        np.testing.assert_array_equal(out, [[11.0]])

    def test_against_triple_loop(self):
        rng = np.random.default_rng(0)
        a = rng.standard_normal((5, 7))
        b = rng.standard_normal((7, 3))
        np.testing.assert_allclose(matmul(a, b), naive_matmul(a, b), rtol=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            matmul(np.ones((2, 3)), np.ones((2, 3)))


class TestHadamard:
    def test_ones_and_zeros(self):
        a = np.arange(4.0).reshape(2, 2)
        np.testing.assert_array_equal(hadamard(a, np.ones((2, 2))), a)
        np.testing.assert_array_equal(hadamard(a, np.zeros((2, 2))), np.zeros((2, 2)))

    def test_hand_example(self):
        out = hadamard([[1, 2], [3, 4]], [[5, 6], [7, 8]])
        np.testing.assert_array_equal(out, [[5, 12], [21, 32]])

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            hadamard(np.ones((2, 2)), np.ones((2, 3)))


class TestLeastSquares:
    def test_identity_system(self):
        y = np.array([3.0, -1.0, 2.0])
        solution, residual = least_squares(np.eye(3), y)
        np.testing.assert_allclose(solution, y, rtol=1e-12)
        assert residual == pytest.approx(0.0, abs=1e-24)

    def test_averaging_column(self):
        solution, residual = least_squares([[1.0], [1.0]], [0.0, 1.0])
        np.testing.assert_allclose(solution, [0.5], rtol=1e-12)
        assert residual == pytest.approx(0.5, rel=1e-12)

    def test_zero_matrix(self):
        y = np.array([1.0, 2.0])
        solution, residual = least_squares(np.zeros((2, 3)), y)
        np.testing.assert_array_equal(solution, np.zeros(3))
        assert residual == pytest.approx(float(y @ y), rel=1e-12)

    def test_residual_is_minimal(self):
        rng = np.random.default_rng(1)
        a = rng.standard_normal((12, 5))
        y = rng.standard_normal(12)
        _, residual = least_squares(a, y)
        for _ in range(100):
            probe = rng.standard_normal(5)
            assert residual <= float(np.sum((a @ probe - y) ** 2)) + 1e-12

    def test_minimum_norm_on_rank_deficient(self):
        rng = np.random.default_rng(2)
        col = rng.standard_normal((6, 1))
        a = np.hstack([col, col])  # rank 1
        y = rng.standard_normal(6)
        solution, _ = least_squares(a, y)
        np.testing.assert_allclose(solution, np.linalg.pinv(a) @ y, rtol=1e-10)
        assert matrix_rank(a) == 1

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            least_squares([[np.nan]], [1.0])

    def test_row_mismatch(self):
        with pytest.raises(ShapeError):
            least_squares(np.ones((3, 2)), np.ones(4))


class TestProjection:
    def test_fixed_point_in_column_space(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal((8, 3))
        y = a @ rng.standard_normal(3)
        np.testing.assert_allclose(project_onto_colspace(a, y), y, rtol=1e-10)

    def test_hand_example(self):
        out = project_onto_colspace([[1.0], [1.0]], [0.0, 1.0])
        np.testing.assert_allclose(out, [0.5, 0.5], rtol=1e-12)

    def test_zero_matrix(self):
        out = project_onto_colspace(np.zeros((4, 2)), np.ones(4))
        np.testing.assert_array_equal(out, np.zeros(4))

    def test_idempotent(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            a = rng.standard_normal((10, 4))
            y = rng.standard_normal(10)
            once = project_onto_colspace(a, y)
            twice = project_onto_colspace(a, once)
            np.testing.assert_allclose(twice, once, rtol=1e-10, atol=1e-12)

    def test_pythagoras(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            a = rng.standard_normal((9, 3))
            y = rng.standard_normal(9)
            p = project_onto_colspace(a, y)
            lhs = float(p @ p) + float((y - p) @ (y - p))
            assert lhs == pytest.approx(float(y @ y), rel=1e-10)
