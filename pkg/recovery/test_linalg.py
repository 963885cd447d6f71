"""
Tests for the dense linear algebra helpers: least squares, projectors,
the Jacobi eigensolver, kernels and spark.
"""
import logging
import math

import numpy as np
import pytest

from recovery.dictionary import generate
from recovery.exceptions import InvalidParams, NotSymmetric, RankDeficient, TooLarge
from recovery.linalg import (
    NO_DEPENDENT_SUBSET,
    Tolerances,
    ensure_full_rank,
    kernel_basis,
    least_squares,
    project_complement,
    rank,
    spark,
    symmetric_eig,
)


@pytest.fixture
def tall_matrix():
    """3x2 matrix of full column rank."""
    return np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])


@pytest.fixture
def linalg_warnings(caplog, monkeypatch):
    """Route recovery log records to caplog at WARNING."""
    monkeypatch.setattr(logging.getLogger('recovery'), 'propagate', True)
    caplog.set_level(logging.WARNING, logger='recovery.linalg')
    return caplog


class TestTolerances:
    """Tolerance validation and settings lookup."""

    def test_defaults(self):
        tol = Tolerances()
        assert tol.rank_tol == 1e-10
        assert tol.tie_tol == 1e-9
        assert tol.cert_tol == 1e-9

    def test_rejects_tolerance_above_ceiling(self):
        with pytest.raises(InvalidParams):
            Tolerances(rank_tol=1e-2)

    def test_rejects_negative_tolerance(self):
        with pytest.raises(InvalidParams):
            Tolerances(tie_tol=-1e-12)

    def test_from_settings_uses_overrides(self, settings):
        settings.SPARSECERT_CERT_TOL = 1e-6
        tol = Tolerances.from_settings(tie_tol=1e-7, rank_tol=None)
        assert tol.cert_tol == 1e-6
        assert tol.tie_tol == 1e-7
        assert tol.rank_tol == settings.SPARSECERT_RANK_TOL


class TestLeastSquares:
    def test_recovers_exact_solution(self, tall_matrix):
        x = np.array([2.0, -1.0])
        assert least_squares(tall_matrix, tall_matrix @ x) == pytest.approx(x)

    def test_matrix_right_hand_side(self, tall_matrix):
        X = np.array([[1.0, 0.5], [-2.0, 3.0]])
        assert np.allclose(least_squares(tall_matrix, tall_matrix @ X), X)

    def test_rank_deficient_raises(self):
        M = np.array([[1.0, 1.0], [0.0, 0.0], [0.0, 0.0]])
        with pytest.raises(RankDeficient):
            least_squares(M, np.array([1.0, 0.0, 0.0]))

    def test_more_columns_than_rows_raises(self):
        with pytest.raises(RankDeficient):
            ensure_full_rank(np.ones((2, 3)))

    def test_row_mismatch_raises(self, tall_matrix):
        with pytest.raises(InvalidParams):
            least_squares(tall_matrix, np.ones(4))

    def test_empty_matrix_returns_empty(self):
        assert least_squares(np.zeros((3, 0)), np.ones(3)).shape == (0,)


class TestProjectComplement:
    def test_residual_is_orthogonal(self, tall_matrix):
        v = np.array([3.0, -1.0, 2.0])
        r = project_complement(tall_matrix, v)
        assert np.allclose(tall_matrix.T @ r, 0.0)
        # v - r lies in the column span
        assert np.allclose(project_complement(tall_matrix, v - r), 0.0)

    def test_empty_support_returns_copy(self):
        v = np.array([1.0, 2.0])
        r = project_complement(np.zeros((2, 0)), v)
        assert np.array_equal(r, v)
        assert r is not v

    @pytest.mark.parametrize('seed', range(5))
    def test_projection_is_idempotent_and_non_expansive(self, seed):
        rng = np.random.default_rng(seed)
        M = rng.standard_normal((6, 3))
        v = rng.standard_normal(6)
        r = project_complement(M, v)
        assert np.allclose(project_complement(M, r), r, atol=1e-10)
        assert np.linalg.norm(r) <= np.linalg.norm(v) + 1e-12


class TestSymmetricEig:
    """Cyclic Jacobi eigensolver."""

    def test_matches_numpy(self):
        rng = np.random.default_rng(7)
        B = rng.standard_normal((6, 6))
        G = B + B.T
        values, vectors = symmetric_eig(G)
        assert values == pytest.approx(np.sort(np.linalg.eigvalsh(G))[::-1], abs=1e-10)
        assert np.allclose(vectors.T @ vectors, np.eye(6), atol=1e-10)
        assert np.allclose(vectors @ np.diag(values) @ vectors.T, G, atol=1e-10)

    def test_values_are_descending(self):
        values, _ = symmetric_eig(np.diag([1.0, 3.0, 2.0]))
        assert list(values) == [3.0, 2.0, 1.0]

    def test_rejects_asymmetric(self):
        with pytest.raises(NotSymmetric):
            symmetric_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_rejects_non_square(self):
        with pytest.raises(NotSymmetric):
            symmetric_eig(np.ones((2, 3)))

    @pytest.mark.parametrize('seed', range(3))
    def test_reconstructs_larger_matrices(self, seed):
        rng = np.random.default_rng(seed)
        B = rng.standard_normal((20, 20))
        G = (B + B.T) / 2.0
        values, vectors = symmetric_eig(G)
        assert np.max(np.abs(vectors @ np.diag(values) @ vectors.T - G)) <= 1e-8
        assert np.max(np.abs(vectors.T @ vectors - np.eye(20))) <= 1e-8

    @pytest.mark.parametrize('cell', [(2, 0, 0), (3, 1, 1), (4, 1, 0)])
    def test_converges_on_equiangular_gram(self, cell, linalg_warnings):
        D, _ = generate('equiangular', k=cell[0], g=cell[1], b=cell[2])
        values, _ = symmetric_eig(D.atoms.T @ D.atoms)
        assert not [record for record in linalg_warnings.records if 'stopped after' in record.getMessage()]
        assert values[-1] == pytest.approx(0.0, abs=1e-10)

    def test_converges_on_rank_deficient_gram(self, linalg_warnings):
        B = np.random.default_rng(11).standard_normal((3, 8))
        values, _ = symmetric_eig(B.T @ B)
        assert not linalg_warnings.records
        assert np.allclose(values[3:], 0.0, atol=1e-10)

    def test_sweep_budget_exhaustion_is_logged(self, linalg_warnings):
        B = np.random.default_rng(3).standard_normal((5, 5))
        symmetric_eig(B + B.T, max_sweeps=1)
        assert 'stopped after 1 sweeps' in linalg_warnings.text


class TestKernelAndRank:
    def test_kernel_of_row_vector(self):
        basis = kernel_basis(np.array([[1.0, 1.0]]))
        assert basis.shape == (2, 1)
        assert abs(basis[:, 0] @ np.array([1.0, 1.0])) < 1e-12
        assert np.linalg.norm(basis[:, 0]) == pytest.approx(1.0)

    def test_trivial_kernel(self):
        assert kernel_basis(np.eye(3)).shape == (3, 0)

    def test_rank(self):
        M = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [0.0, 0.0, 0.0]])
        assert rank(M) == 2
        assert rank(np.eye(4)) == 4


class TestSpark:
    def test_independent_columns(self):
        assert spark(np.eye(3)) == NO_DEPENDENT_SUBSET
        assert math.isinf(spark(np.eye(3)))

    def test_three_columns_in_the_plane(self):
        M = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
        assert spark(M) == 3

    def test_repeated_column(self):
        M = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]])
        assert spark(M) == 2

    def test_zero_column(self):
        M = np.array([[1.0, 0.0], [0.0, 0.0]])
        assert spark(M) == 1

    def test_enumeration_guard(self, settings):
        settings.SPARSECERT_MAX_SUBSETS = 10
        with pytest.raises(TooLarge):
            spark(np.eye(5))

    @pytest.mark.parametrize('seed', range(3))
    def test_column_order_does_not_matter(self, seed):
        order = np.random.default_rng(seed).permutation(6)
        equiangular, _ = generate('equiangular', k=3, g=1, b=1)
        degenerate, _ = generate('lemma1', k=4, g=3, b=1)
        assert spark(equiangular.atoms[:, order]) == 6
        assert spark(degenerate.atoms[:, np.random.default_rng(seed).permutation(degenerate.n)]) == 2
