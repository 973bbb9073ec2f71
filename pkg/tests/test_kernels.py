"""The compiled and pure-NumPy Jacobi kernels must agree."""

import numpy as np
import pytest

from clusterbound import _backend
from clusterbound.linalg import hermitian_eig, svd

from conftest import rand_complex

BACKENDS = sorted(_backend.BACKENDS)


def test_default_backend_is_available():
    assert _backend.DEFAULT in _backend.BACKENDS
    assert _backend.get() is _backend.BACKENDS[_backend.DEFAULT]


def test_unknown_backend():
    with pytest.raises(ValueError):
        _backend.get("fortran")


@pytest.mark.parametrize("backend", BACKENDS)
class TestEachBackend:
    def test_svd_reconstruction(self, rng, backend):
        m = rand_complex(rng, 25, 9)
        res = svd(m, backend=backend)
        assert np.linalg.norm(res.reconstruct() - m) <= 1e-12 * np.linalg.norm(m)

    def test_svd_rank_deficient(self, rng, backend):
        m = rand_complex(rng, 20, 2) @ rand_complex(rng, 2, 6)
        res = svd(m, backend=backend)
        s = res.singulars.values
        assert s[2] <= 1e-13 * s[0]
        assert np.linalg.norm(res.reconstruct() - m) <= 1e-12 * np.linalg.norm(m)
        np.testing.assert_allclose(res.left.conj().T @ res.left, np.eye(6), atol=1e-12)

    def test_eig(self, rng, backend):
        a = rand_complex(rng, 15, 15)
        h = a + a.conj().T
        lam, x = hermitian_eig(h, backend=backend)
        np.testing.assert_allclose(h @ x, x * lam.values, atol=1e-10 * np.linalg.norm(h))


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled backend not built")
class TestAgreement:
    def test_singular_values(self, rng):
        for _ in range(10):
            m = rand_complex(rng, int(rng.integers(2, 30)), int(rng.integers(1, 12)))
            a = svd(m, backend="cython").singulars.values
            b = svd(m, backend="python").singulars.values
            np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14 * a[0])

    def test_eigenvalues(self, rng):
        for _ in range(10):
            n = int(rng.integers(2, 20))
            a = rand_complex(rng, n, n)
            h = a + a.conj().T
            a1 = hermitian_eig(h, backend="cython")[0].values
            a2 = hermitian_eig(h, backend="python")[0].values
            np.testing.assert_allclose(a1, a2, atol=1e-12 * np.abs(a1).max())
