import warnings

import numpy as np
import pytest
import scipy.linalg as sla
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from blockstab.linalg import (
    DegenerateTolerance,
    LinearMap,
    NotHermitian,
    NotPositiveDefinite,
    RankPolicy,
    SingularBlock,
    SpaceMismatch,
    SubspaceBasis,
    block_inverse_antitriangular,
    hermitian_sqrt,
    kernel_basis,
    min_singular_value,
    orthonormalize,
    range_basis,
    subspace_intersection,
)

from conftest import random_complex


def basis(*cols, n):
    Q = np.zeros((n, len(cols)))
    for k, c in enumerate(cols):
        Q[c, k] = 1.0
    return SubspaceBasis(Q)


class TestLinearMap:
    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            LinearMap(np.array([[1.0, np.nan]]))

    def test_composition_checks_labels(self):
        a = LinearMap(np.eye(2), "H0", "H1")
        b = LinearMap(np.eye(2), "H1", "H0")
        assert (b @ a).domain == "H0"
        with pytest.raises(SpaceMismatch):
            a @ a

    def test_adjoint_swaps_labels(self, rng):
        M = LinearMap(random_complex(rng, 3, 4), "H0", "H1")
        assert (M.H.domain, M.H.codomain) == ("H1", "H0")
        np.testing.assert_array_equal(M.H.dense(), M.dense().conj().T)


class TestRankPolicy:
    def test_positive_thresholds(self):
        with pytest.raises(ValueError):
            RankPolicy(relative_threshold=0.0)
        with pytest.raises(ValueError):
            RankPolicy(absolute_floor=-1.0)

    def test_ambiguity_band(self):
        r, cut, amb = RankPolicy().rank(np.array([1.0, 0.95e-10]))
        assert r == 1 and amb


class TestHermitianSqrt:
    def test_identity(self):
        S = hermitian_sqrt(np.eye(5))
        np.testing.assert_allclose(S.root.dense(), np.eye(5))
        np.testing.assert_allclose(S.inverse.dense(), np.eye(5))

    def test_diagonal(self):
        S = hermitian_sqrt(np.diag([4.0, 9.0]))
        np.testing.assert_allclose(S.root.dense(), np.diag([2.0, 3.0]))

    def test_random_spd_recomposes(self, rng):
        X = random_complex(rng, 8, 8)
        M = X @ X.conj().T + 0.1 * np.eye(8)
        S = hermitian_sqrt(M)
        R = S.root.dense()
        # oracle: recomposition and Hermitian positivity
        assert np.linalg.norm(R @ R - M) / np.linalg.norm(M) < 1e-10
        assert np.linalg.norm(R - R.conj().T) < 1e-12
        assert np.linalg.eigvalsh(R)[0] > 0
        np.testing.assert_allclose(S.inverse.dense() @ R, np.eye(8), atol=1e-10)

    def test_errors(self):
        with pytest.raises(NotHermitian):
            hermitian_sqrt(np.array([[1.0, 2.0], [0.0, 1.0]]))
        with pytest.raises(NotPositiveDefinite):
            hermitian_sqrt(np.diag([1.0, 0.0]))
        with pytest.raises(NotPositiveDefinite):
            hermitian_sqrt(np.array([[1.0, 2.0], [2.0, 1.0]]))


class TestMinSingularValue:
    @pytest.mark.parametrize(
        "M, expected",
        [
            (np.eye(4), 1.0),
            (np.diag([1, 1 / 2, 1 / 3, 1 / 4]), 0.25),
            (np.array([[0.0, -2.0], [2.0, 0.0]]), 2.0),
        ],
    )
    def test_examples(self, M, expected):
        assert min_singular_value(M) == pytest.approx(expected, abs=1e-14)

    def test_deterministic(self, rng):
        M = random_complex(rng, 30, 20)
        assert min_singular_value(M) == min_singular_value(M)


class TestRangeKernel:
    def test_zero(self):
        assert range_basis(np.zeros((3, 3))).dim == 0
        assert kernel_basis(np.zeros((3, 3))).dim == 3

    def test_diag(self):
        R = range_basis(np.diag([1.0, 0.0]))
        K = kernel_basis(np.diag([1.0, 0.0]))
        np.testing.assert_allclose(np.abs(R.columns.ravel()), [1, 0])
        np.testing.assert_allclose(np.abs(K.columns.ravel()), [0, 1])

    def test_rank_against_exact_row_reduction(self, rng):
        A = rng.integers(-3, 4, (6, 2))
        B = rng.integers(-3, 4, (4, 2))
        M = A @ B.T
        exact = sympy.Matrix(M.tolist()).rank()  # exact rational elimination
        assert range_basis(M.astype(float)).dim == exact == 2

    def test_range_orthogonal_to_cokernel(self, rng):
        M = random_complex(rng, 7, 3) @ random_complex(rng, 3, 5)
        R = range_basis(M).columns
        K = kernel_basis(M.conj().T).columns
        assert np.abs(R.conj().T @ K).max() <= 1e-10
        assert R.shape[1] + K.shape[1] == 7

    def test_ambiguous_rank_warns(self):
        M = np.diag([1.0, 1.02e-10, 0.0])
        with pytest.warns(DegenerateTolerance):
            kernel_basis(M)

    @settings(max_examples=40, deadline=None)
    @given(m=st.integers(1, 9), n=st.integers(1, 9), r=st.integers(0, 9), seed=st.integers(0, 2**31))
    def test_rank_nullity(self, m, n, r, seed):
        g = np.random.default_rng(seed)
        r = min(r, m, n)
        M = random_complex(g, m, r) @ random_complex(g, r, n) if r else np.zeros((m, n))
        with warnings.catch_warnings():
            warnings.simplefilter("error", DegenerateTolerance)
            R, K = range_basis(M), kernel_basis(M)
        assert R.dim + K.dim == n
        assert R.dim == r
        assert R.orthonormality_defect() <= 1e-10 and K.orthonormality_defect() <= 1e-10
        assert np.linalg.norm(M @ K.columns) <= 1e-9 * max(1.0, np.linalg.norm(M))


class TestIntersection:
    def test_equal(self):
        B = basis(0, 1, n=4)
        X = subspace_intersection(B, B)
        assert X.dim == 2
        np.testing.assert_allclose(X.projector(), B.projector(), atol=1e-12)

    def test_shared_axis(self):
        X = subspace_intersection(basis(0, 1, n=4), basis(1, 2, n=4))
        assert X.dim == 1
        assert abs(abs(X.columns[1, 0]) - 1) < 1e-12

    def test_label_mismatch(self):
        a = SubspaceBasis(np.eye(3)[:, :1], "H0")
        b = SubspaceBasis(np.eye(3)[:, :1], "H1")
        with pytest.raises(SpaceMismatch):
            subspace_intersection(a, b)

    @settings(max_examples=40, deadline=None)
    @given(m=st.integers(2, 12), k1=st.integers(0, 12), k2=st.integers(0, 12), shared=st.integers(0, 6),
           seed=st.integers(0, 2**31))
    def test_against_nullspace_oracle(self, m, k1, k2, shared, seed):
        g = np.random.default_rng(seed)
        k1, k2 = min(k1, m), min(k2, m)
        shared = min(shared, k1, k2)
        common = random_complex(g, m, shared)
        B1 = orthonormalize(np.hstack([common, random_complex(g, m, k1 - shared)]))
        B2 = orthonormalize(np.hstack([common, random_complex(g, m, k2 - shared)]))
        X = subspace_intersection(B1, B2)
        # oracle: solve B1 y1 = B2 y2 via the null space of [B1, -B2]
        N = sla.null_space(np.hstack([B1.columns, -B2.columns]), rcond=1e-9) if B1.dim + B2.dim else np.zeros((0, 0))
        assert X.dim == N.shape[1]
        # complement-of-sum identity: dim = m - rank[B1perp, B2perp]
        perp = np.hstack([B1.complement().columns, B2.complement().columns])
        rk = np.linalg.matrix_rank(perp, tol=1e-9) if perp.size else 0
        assert X.dim == m - rk
        for B in (B1, B2):
            assert np.linalg.norm(X.columns - B.project(X.columns)) <= 1e-9

    def test_random_five_in_eight(self, rng):
        B1 = orthonormalize(random_complex(rng, 8, 5))
        B2 = orthonormalize(random_complex(rng, 8, 5))
        X = subspace_intersection(B1, B2)
        assert X.dim == 2
        assert X.orthonormality_defect() <= 1e-10


class TestBlockInverse:
    def test_identity_blocks(self):
        I = np.eye(2)
        out = block_inverse_antitriangular(np.zeros((2, 2)), I, I).dense()
        np.testing.assert_array_equal(out, np.block([[0 * I, I], [I, 0 * I]]))

    def test_unit_A(self):
        I = np.eye(3)
        out = block_inverse_antitriangular(I, I, I).dense()
        np.testing.assert_array_equal(out, np.block([[0 * I, I], [I, -I]]))

    def test_random_two_sided(self, rng):
        A, B, C = (random_complex(rng, 4, 4) for _ in range(3))
        M = np.block([[A, B], [C, np.zeros((4, 4))]])
        Minv = block_inverse_antitriangular(A, B, C).dense()
        assert np.linalg.norm(M @ Minv - np.eye(8)) < 1e-10
        assert np.linalg.norm(Minv @ M - np.eye(8)) < 1e-10

    @pytest.mark.parametrize("which", ["B", "C"])
    def test_singular_block_named(self, which):
        I, Z = np.eye(2), np.diag([1.0, 0.0])
        blocks = {"B": Z if which == "B" else I, "C": Z if which == "C" else I}
        with pytest.raises(SingularBlock) as exc:
            block_inverse_antitriangular(I, blocks["B"], blocks["C"])
        assert exc.value.which == which
