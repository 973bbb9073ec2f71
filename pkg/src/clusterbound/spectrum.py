"""Matrices given by their spectral decomposition ``A = X diag(lam) X^H``."""

import numpy as np

from .errors import DimensionError, GapError, NotHermitianError
from .linalg import adjoint, as_matrix, hermitian_eig

UNITARY_TOL = 1e-12


class Spectrum:
    """A normal matrix through its eigenvalues and a unitary eigenvector matrix.

    ``eigenvectors=None`` stands for the identity, i.e. a diagonal matrix; all
    operations then work directly in coordinates and no ``n x n`` matrix is
    formed. Hermitian spectra are kept in descending order. ``p`` is the
    target block size: the first ``p`` eigenpairs span the target subspace.

    ``transform`` optionally records how eigenvalues map back to an original
    problem (see :func:`clusterbound.eigensolvers.shift_invert_operator`).
    """

    def __init__(self, eigenvalues, eigenvectors=None, hermitian=True, p=None,
                 transform=None, validate=True):
        lam = np.asarray(eigenvalues)
        if lam.ndim != 1 or lam.size < 1:
            raise DimensionError("eigenvalues must be a non-empty 1-D sequence")
        if hermitian:
            if np.iscomplexobj(lam):
                if np.abs(lam.imag).max() > 0:
                    raise NotHermitianError("Hermitian spectrum needs real eigenvalues")
                lam = lam.real
            lam = lam.astype(float)
            order = np.argsort(-lam, kind="stable")
            if not np.all(order == np.arange(lam.size)):
                lam = lam[order]
                if eigenvectors is not None:
                    eigenvectors = np.asarray(eigenvectors)[:, order]
        else:
            lam = lam.astype(complex)
        if not np.all(np.isfinite(lam)):
            raise ValueError("eigenvalues must be finite")
        if eigenvectors is not None:
            x = as_matrix(eigenvectors)
            if x.shape != (lam.size, lam.size):
                raise DimensionError(f"eigenvector matrix has shape {x.shape}, expected n x n")
            if validate:
                err = np.abs(adjoint(x) @ x - np.eye(lam.size)).max()
                if err > UNITARY_TOL * lam.size:
                    raise ValueError(f"eigenvector matrix is not unitary: residual {err:.2e}")
            eigenvectors = x
        self.eigenvalues = lam
        self.eigenvalues.setflags(write=False)
        self.eigenvectors = eigenvectors
        self.hermitian = bool(hermitian)
        self.transform = transform
        self.p = None
        if p is not None:
            self.set_target(p)

    # construction -------------------------------------------------------

    @classmethod
    def diagonal(cls, eigenvalues, p=None):
        return cls(eigenvalues, None, hermitian=not np.iscomplexobj(eigenvalues), p=p)

    @classmethod
    def from_eigenpairs(cls, eigenvalues, eigenvectors, p=None, hermitian=True):
        return cls(eigenvalues, eigenvectors, hermitian=hermitian, p=p)

    @classmethod
    def from_hermitian(cls, h, p=None, backend=None):
        lam, x = hermitian_eig(h, backend=backend)
        return cls(lam.values, x, hermitian=True, p=p)

    def with_target(self, p):
        out = Spectrum.__new__(Spectrum)
        out.eigenvalues = self.eigenvalues
        out.eigenvectors = self.eigenvectors
        out.hermitian = self.hermitian
        out.transform = self.transform
        out.p = None
        out.set_target(p)
        return out

    def set_target(self, p):
        p = int(p)
        if not 1 <= p < self.n:
            raise DimensionError(f"target size p={p} must lie in 1..{self.n - 1}")
        lam = self.eigenvalues
        if self.hermitian:
            if not lam[p - 1] > lam[p]:
                raise GapError(f"need lambda_p > lambda_(p+1); got {lam[p - 1]} and {lam[p]}")
        elif np.intersect1d(lam[:p], lam[p:]).size:
            raise GapError("target and remaining eigenvalue sets must be disjoint")
        self.p = p

    # basic properties ---------------------------------------------------

    @property
    def n(self):
        return self.eigenvalues.size

    @property
    def is_diagonal(self):
        return self.eigenvectors is None

    @property
    def lam(self):
        """Real eigenvalues (Hermitian case), descending."""
        if not self.hermitian:
            raise NotHermitianError("real eigenvalues are only defined for Hermitian spectra")
        return self.eigenvalues

    def _require_p(self):
        if self.p is None:
            raise ValueError("this operation needs the target size p to be set")
        return self.p

    def target_basis(self, rows=None):
        """Orthonormal eigenvectors with 0-based indices ``rows`` (default: first p)."""
        if rows is None:
            rows = np.arange(self._require_p())
        rows = np.asarray(rows, dtype=int)
        if self.eigenvectors is None:
            out = np.zeros((self.n, rows.size), dtype=complex)
            out[rows, np.arange(rows.size)] = 1.0
            return out
        return self.eigenvectors[:, rows]

    def matrix(self):
        """Dense ``A``."""
        if self.eigenvectors is None:
            return np.diag(self.eigenvalues).astype(complex)
        x = self.eigenvectors
        return (x * self.eigenvalues) @ adjoint(x)

    # actions ------------------------------------------------------------

    def coords(self, m):
        """Coefficients of ``m`` in the eigenbasis, ``X^H m``."""
        m = np.asarray(m)
        return m if self.eigenvectors is None else adjoint(self.eigenvectors) @ m

    def from_coords(self, c):
        c = np.asarray(c)
        return c if self.eigenvectors is None else self.eigenvectors @ c

    def apply_values(self, values, m):
        """``X diag(values) X^H m``."""
        values = np.asarray(values)
        m = np.asarray(m)
        squeeze = m.ndim == 1
        m2 = m[:, None] if squeeze else m
        out = self.from_coords(values[:, None] * self.coords(m2))
        return out[:, 0] if squeeze else out

    def apply(self, m):
        """``A m``."""
        return self.apply_values(self.eigenvalues, m)

    def project(self, q):
        """Compression ``Q^H A Q`` of ``A`` onto an orthonormal ``q``."""
        c = self.coords(q)
        return adjoint(c) @ (self.eigenvalues[:, None] * c)

    def __repr__(self):
        kind = "hermitian" if self.hermitian else "normal"
        return f"Spectrum(n={self.n}, {kind}, p={self.p}, diagonal={self.is_diagonal})"


def random_unitary(n, rng, real=False):
    """Haar-distributed unitary (orthogonal if ``real``) via QR with phase fix."""
    z = rng.standard_normal((n, n))
    if not real:
        z = z + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))
