import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from gateid.linalg import hs_norm, nearest_unitary, partial_trace_first, svd, unvectorize, vectorize
from gateid.oracle import haar_unitaries

HADAMARD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def complex_matrix(rng, m, n):
    return rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))


class TestVectorize:
    def test_column_stacking(self):
        assert_array_equal(vectorize([[1, 3], [2, 4]]), [1, 2, 3, 4])

    def test_identity(self):
        assert_array_equal(vectorize(np.eye(2)), [1, 0, 0, 1])

    def test_unvectorize(self):
        assert_array_equal(unvectorize([1, 2, 3, 4], 2, 2), [[1, 3], [2, 4]])
        assert_array_equal(unvectorize(np.zeros(4), 2, 2), np.zeros((2, 2)))

    def test_round_trips(self, rng):
        a = complex_matrix(rng, 3, 4)
        assert_array_equal(unvectorize(vectorize(a), 3, 4), a)
        s = complex_matrix(rng, 5, 5)
        assert_array_equal(unvectorize(vectorize(s), 5, 5), s)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            unvectorize(np.arange(5), 2, 2)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32 - 1))
    def test_inverse_pair_any_shape(self, m, n, seed):
        a = complex_matrix(np.random.default_rng(seed), m, n)
        assert_array_equal(unvectorize(vectorize(a), m, n), a)
        assert_array_equal(vectorize(unvectorize(vectorize(a), m, n)), vectorize(a))


class TestPartialTrace:
    @pytest.mark.parametrize("d", [2, 3, 4, 5])
    def test_unitary_gives_identity(self, d, rng):
        for g in haar_unitaries(d, 10, rng):
            v = vectorize(g)
            assert_allclose(partial_trace_first(np.outer(v, v.conj()), d), np.eye(d), atol=1e-12)

    def test_identity_blocks(self):
        assert_allclose(partial_trace_first(np.eye(4), 2), 2 * np.eye(2))

    def test_matches_index_sum(self, rng):
        d = 3
        x = complex_matrix(rng, 9, 9)
        x = x + x.conj().T
        expected = np.zeros((d, d), dtype=complex)
        for k in range(d):
            for kp in range(d):
                for j in range(d):
                    expected[k, kp] += x[j * d + k, j * d + kp]
        assert_array_equal(partial_trace_first(x, d), expected)

    def test_rejects_bad_shape(self):
        with pytest.raises(ValueError):
            partial_trace_first(np.eye(5), 2)
        with pytest.raises(ValueError):
            partial_trace_first(np.ones((4, 3)), 2)


class TestNorms:
    def test_identity(self):
        for d in (1, 2, 5):
            assert hs_norm(np.eye(d)) == pytest.approx(np.sqrt(d))

    def test_unitary(self, rng):
        assert hs_norm(haar_unitaries(4, 1, rng)[0]) == pytest.approx(2.0, abs=1e-12)

    def test_unitary_invariance(self, rng):
        for _ in range(20):
            a = complex_matrix(rng, 4, 4)
            u, v = haar_unitaries(4, 2, rng)
            assert hs_norm(u @ a @ v) == pytest.approx(hs_norm(a), abs=1e-12 * hs_norm(a))

    def test_submultiplicative(self, rng):
        for _ in range(50):
            a, b = complex_matrix(rng, 3, 3), complex_matrix(rng, 3, 3)
            assert hs_norm(a @ b) <= hs_norm(a) * hs_norm(b) + 1e-12

    @settings(max_examples=200, deadline=None)
    @given(st.integers(2, 16), st.integers(0, 2**32 - 1))
    def test_outer_product_bound(self, dim, seed):
        rng = np.random.default_rng(seed)
        b = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        c = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        lhs = hs_norm(np.outer(b, b.conj()) - np.outer(c, c.conj()))
        assert lhs <= (hs_norm(b) + hs_norm(c)) * hs_norm(b - c) * (1 + 1e-12)


class TestSvd:
    def test_positive_diagonal(self):
        u1, sigma, u2 = svd(np.diag([3.0, 1.0]))
        assert_allclose(sigma, [3, 1])
        assert_allclose(u1 @ u2, np.eye(2), atol=1e-12)

    def test_unitary_has_unit_singular_values(self, rng):
        _, sigma, _ = svd(haar_unitaries(3, 1, rng)[0])
        assert_allclose(sigma, np.ones(3), atol=1e-12)

    def test_reconstruction_without_dagger(self, rng):
        a = complex_matrix(rng, 4, 4)
        u1, sigma, u2 = svd(a)
        assert hs_norm(u1 @ np.diag(sigma) @ u2 - a) < 1e-10 * hs_norm(a)
        assert_allclose(u1.conj().T @ u1, np.eye(4), atol=1e-10)
        assert_allclose(u2 @ u2.conj().T, np.eye(4), atol=1e-10)
        assert np.all(np.diff(sigma) <= 0) and np.all(sigma >= 0)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            svd(np.array([[1.0, np.nan], [0.0, 1.0]]))


class TestNearestUnitary:
    def test_positive_diagonal(self):
        assert_allclose(nearest_unitary(np.diag([2.0, 3.0])), np.eye(2), atol=1e-12)

    def test_scaled_hadamard(self):
        assert_allclose(nearest_unitary(0.7 * HADAMARD), HADAMARD, atol=1e-12)

    def test_beats_random_unitaries(self, rng):
        s = complex_matrix(rng, 2, 2)
        g = nearest_unitary(s)
        assert_allclose(g.conj().T @ g, np.eye(2), atol=1e-10)
        vs = haar_unitaries(2, 100_000, rng)
        assert hs_norm(g - s) <= np.linalg.norm(vs - s, axis=(1, 2)).min()

    def test_rank_deficient(self):
        g = nearest_unitary(np.array([[1.0, 0.0], [0.0, 0.0]]))
        assert_allclose(g.conj().T @ g, np.eye(2), atol=1e-10)
        assert_allclose(nearest_unitary(np.zeros((3, 3))).conj().T @ nearest_unitary(np.zeros((3, 3))), np.eye(3), atol=1e-10)
