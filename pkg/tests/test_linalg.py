import numpy as np
import pytest

from clusterbound.errors import NotHermitianError, RankDeficiencyError
from clusterbound.linalg import (
    adjoint,
    complement,
    hermitian_eig,
    orthonormalize,
    pseudoinverse,
    singular_values,
    svd,
    two_norm,
)

from conftest import rand_complex


class TestOrthonormalize:
    def test_identity(self):
        np.testing.assert_allclose(np.abs(orthonormalize(np.eye(4))), np.eye(4), atol=1e-15)

    def test_single_column(self):
        q = orthonormalize(np.array([[3.0], [4.0]]))
        # equal up to a unimodular scalar
        phase = q[0, 0] / abs(q[0, 0])
        np.testing.assert_allclose(q[:, 0] / phase, [0.6, 0.8], atol=1e-15)

    def test_random_tall(self, rng):
        m = rand_complex(rng, 6, 3)
        q = orthonormalize(m)
        assert np.abs(adjoint(q) @ q - np.eye(3)).max() <= 1e-12
        assert np.linalg.norm(q @ adjoint(q) @ m - m) <= 1e-10 * np.linalg.norm(m)

    def test_rank_deficient(self):
        m = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
        with pytest.raises(RankDeficiencyError) as info:
            orthonormalize(m)
        assert info.value.ratio < 1e-12

    def test_too_many_columns(self):
        with pytest.raises(RankDeficiencyError):
            orthonormalize(np.ones((2, 3)))


class TestSvd:
    def test_diagonal(self):
        np.testing.assert_allclose(singular_values(np.diag([3.0, 1.0])).values, [3, 1])

    def test_zero(self):
        res = svd(np.zeros((3, 2)))
        np.testing.assert_array_equal(res.singulars.values, [0, 0])
        np.testing.assert_allclose(adjoint(res.left) @ res.left, np.eye(2), atol=1e-14)

    def test_hand_2x2(self):
        # M^H M = diag(1, 4)
        np.testing.assert_allclose(singular_values([[0, 2], [1, 0]]).values, [2, 1], rtol=1e-15)

    @pytest.mark.parametrize("shape", [(1, 1), (5, 3), (3, 5), (40, 40), (120, 17)])
    def test_reconstruction(self, rng, shape):
        m = rand_complex(rng, *shape)
        res = svd(m)
        assert np.linalg.norm(res.reconstruct() - m) <= 1e-12 * np.linalg.norm(m)
        r = min(shape)
        np.testing.assert_allclose(adjoint(res.left) @ res.left, np.eye(r), atol=1e-12)
        np.testing.assert_allclose(adjoint(res.right) @ res.right, np.eye(r), atol=1e-12)
        s = res.singulars.values
        assert np.all(np.diff(s) <= 0) and s[-1] >= 0

    def test_reconstruction_400(self, rng):
        m = rng.standard_normal((400, 400))
        res = svd(m)
        assert np.linalg.norm(res.reconstruct() - m) <= 1e-12 * np.linalg.norm(m)

    def test_adjoint_same_values(self, rng):
        m = rand_complex(rng, 7, 4)
        np.testing.assert_allclose(singular_values(m).values, singular_values(adjoint(m)).values,
                                   rtol=1e-13)

    def test_two_norm(self, rng):
        m = rand_complex(rng, 6, 6)
        assert two_norm(m) == pytest.approx(np.linalg.norm(m, 2), rel=1e-13)

    def test_graded_small_values(self):
        # relative accuracy of tiny singular values of a graded diagonal
        d = 10.0 ** -np.arange(0, 14, 2)
        rng = np.random.default_rng(3)
        q1, _ = np.linalg.qr(rng.standard_normal((7, 7)))
        m = d[:, None] * q1
        np.testing.assert_allclose(singular_values(m).values, d, rtol=1e-12)

    def test_rank_deficient_converges(self, rng):
        a = rand_complex(rng, 30, 3)
        m = a @ rand_complex(rng, 3, 8)
        s = singular_values(m).values
        assert s[3] <= 1e-13 * s[0]

    def test_does_not_mutate_input(self, rng):
        m = np.asfortranarray(rand_complex(rng, 9, 4))
        before = m.copy()
        svd(m)
        np.testing.assert_array_equal(m, before)


class TestHermitianEig:
    def test_diagonal(self):
        lam, _ = hermitian_eig(np.diag([1.0, 2.0, 3.0]))
        np.testing.assert_allclose(lam.values, [3, 2, 1])

    def test_pauli(self):
        lam, x = hermitian_eig([[0, 1], [1, 0]])
        np.testing.assert_allclose(lam.values, [1, -1], atol=1e-15)
        np.testing.assert_allclose(np.abs(x), np.full((2, 2), np.sqrt(0.5)), atol=1e-15)

    def test_known_spectrum(self, rng):
        d = np.sort(rng.uniform(-3, 3, 12))[::-1]
        u, _ = np.linalg.qr(rand_complex(rng, 12, 12))
        h = (u * d) @ adjoint(u)
        lam, x = hermitian_eig(h)
        np.testing.assert_allclose(lam.values, d, atol=1e-10)
        assert np.linalg.norm(h @ x - x * lam.values) <= 1e-10 * np.linalg.norm(h)
        np.testing.assert_allclose(adjoint(x) @ x, np.eye(12), atol=1e-12)

    def test_spd_matches_singular_values(self, rng):
        a = rand_complex(rng, 8, 8)
        h = a @ adjoint(a) + np.eye(8)
        np.testing.assert_allclose(hermitian_eig(h)[0].values, singular_values(h).values, rtol=1e-10)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitianError):
            hermitian_eig([[0, 1], [0, 0]])


class TestPseudoinverse:
    def test_identity(self):
        np.testing.assert_allclose(pseudoinverse(np.eye(3)), np.eye(3), atol=1e-15)

    def test_singular_diagonal(self):
        np.testing.assert_allclose(pseudoinverse(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]), atol=1e-15)

    def test_tall_full_rank(self, rng):
        m = rand_complex(rng, 3, 2)
        pinv = pseudoinverse(m)
        np.testing.assert_allclose(pinv @ m, np.eye(2), atol=1e-10)
        ref = np.linalg.solve(adjoint(m) @ m, adjoint(m))
        np.testing.assert_allclose(pinv, ref, atol=1e-10)

    def test_penrose_identities(self, rng):
        m = rand_complex(rng, 6, 2) @ rand_complex(rng, 2, 5)
        g = pseudoinverse(m)
        np.testing.assert_allclose(m @ g @ m, m, atol=1e-10)
        np.testing.assert_allclose(g @ m @ g, g, atol=1e-10)
        np.testing.assert_allclose(m @ g, adjoint(m @ g), atol=1e-10)
        np.testing.assert_allclose(g @ m, adjoint(g @ m), atol=1e-10)

    def test_bad_tolerance(self):
        with pytest.raises(ValueError):
            pseudoinverse(np.eye(2), rel_tol=1.5)


def test_complement(rng):
    q = orthonormalize(rand_complex(rng, 7, 3))
    w = complement(q)
    assert w.shape == (7, 4)
    np.testing.assert_allclose(adjoint(w) @ w, np.eye(4), atol=1e-13)
    np.testing.assert_allclose(adjoint(q) @ w, 0, atol=1e-13)
