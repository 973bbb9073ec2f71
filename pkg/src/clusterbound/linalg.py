"""Dense complex matrix kernels.

Everything here works in complex double precision; real input is embedded.
The SVD is one-sided Jacobi and the Hermitian eigensolver is cyclic Jacobi,
both running on the compiled backend when it is available.
"""

from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import ConvergenceError, NotHermitianError, RankDeficiencyError
from .tuples import DescTuple

EPS = np.finfo(float).eps
MAX_SWEEPS = 60
JACOBI_TOL = 1e-14
RANK_TOL = 1e-12


def as_matrix(m):
    """Validate ``m`` as a finite 2-D array and return a complex128 copy-free view."""
    a = np.asarray(m)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    a = a.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has NaN or Inf entries")
    return a


def adjoint(m):
    return np.conj(np.asarray(m)).T


@dataclass(frozen=True)
class SvdResult:
    left: np.ndarray
    singulars: DescTuple
    right: np.ndarray

    def reconstruct(self):
        return (self.left * self.singulars.values) @ adjoint(self.right)


def _one_sided_tol(rows):
    # dot products of length `rows` carry ~sqrt(rows)*eps relative noise
    return max(JACOBI_TOL, 4.0 * np.sqrt(rows) * EPS)


def _complete_columns(u, good):
    """Replace the columns of ``u`` not flagged ``good`` by an orthonormal completion."""
    u = u.copy()
    basis = [u[:, j] for j in range(u.shape[1]) if good[j]]
    for j in range(u.shape[1]):
        if good[j]:
            continue
        cover = np.zeros(u.shape[0])
        for b in basis:
            cover += np.abs(b) ** 2
        for k in np.argsort(cover, kind="stable"):
            v = np.zeros(u.shape[0], dtype=complex)
            v[k] = 1.0
            for _ in range(2):
                for b in basis:
                    v -= b * np.vdot(b, v)
            nv = np.linalg.norm(v)
            if nv > 0.5:
                break
        v /= nv
        basis.append(v)
        u[:, j] = v
    return u


def svd(m, backend=None):
    """Thin SVD by one-sided Jacobi; ``min(rows, cols)`` singular values, descending."""
    a = as_matrix(m)
    if a.shape[0] < a.shape[1]:
        res = svd(adjoint(a), backend=backend)
        return SvdResult(res.right, res.singulars, res.left)
    rows, cols = a.shape
    at = np.array(a.T, dtype=np.complex128, order="C", copy=True)
    vt = np.eye(cols, dtype=np.complex128)
    sweeps = _backend.get(backend).one_sided(at, vt, _one_sided_tol(rows), MAX_SWEEPS)
    if sweeps < 0:
        raise ConvergenceError(f"one-sided Jacobi did not converge in {MAX_SWEEPS} sweeps")
    norms = np.sqrt(np.einsum("ij,ij->i", at.conj(), at).real)
    order = np.argsort(-norms, kind="stable")
    sig = norms[order]
    u = at[order].T.copy()
    good = sig > rows * EPS * (sig[0] if sig[0] > 0 else 1.0)
    u[:, good] /= sig[good]
    if not good.all():
        u = _complete_columns(u, good)
    v = vt[order].T.copy()
    return SvdResult(u, DescTuple(sig), v)


def singular_values(m, backend=None):
    return svd(m, backend=backend).singulars


def two_norm(m):
    return float(singular_values(m)[0])


def hermitian_eig(h, backend=None):
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi.

    Returns ``(eigenvalues, vectors)`` with eigenvalues as a descending
    :class:`DescTuple` and ``vectors`` unitary, column j paired with entry j.
    """
    a = as_matrix(h)
    if a.shape[0] != a.shape[1]:
        raise NotHermitianError(f"square matrix required, got {a.shape}")
    scale = np.linalg.norm(a)
    skew = np.linalg.norm(a - adjoint(a))
    if skew > 1e-12 * scale:
        raise NotHermitianError(f"relative skew-Hermitian part {skew / scale:.3e} exceeds 1e-12")
    work = np.ascontiguousarray(0.5 * (a + adjoint(a)))
    n = a.shape[0]
    vt = np.eye(n, dtype=np.complex128)
    sweeps = _backend.get(backend).two_sided(work, vt, JACOBI_TOL, MAX_SWEEPS)
    if sweeps < 0:
        raise ConvergenceError(f"cyclic Jacobi did not converge in {MAX_SWEEPS} sweeps")
    lam = np.diagonal(work).real
    order = np.argsort(-lam, kind="stable")
    return DescTuple(lam[order]), vt[order].T.copy()


def orthonormalize(m):
    """Orthonormal basis with the same range as a full-column-rank ``m``."""
    a = as_matrix(m)
    if a.shape[1] > a.shape[0]:
        raise RankDeficiencyError(
            f"{a.shape[1]} columns cannot be independent in dimension {a.shape[0]}", ratio=0.0
        )
    q, r = np.linalg.qr(a)
    s = singular_values(r).values
    ratio = s[-1] / s[0] if s[0] > 0 else 0.0
    if ratio <= RANK_TOL:
        raise RankDeficiencyError(
            f"matrix is rank deficient: sigma_min/sigma_max = {ratio:.3e}", ratio=ratio
        )
    return q


def pseudoinverse(m, rel_tol=RANK_TOL):
    """Moore-Penrose pseudoinverse; singular values below ``rel_tol * sigma_max`` count as zero."""
    if not 0 < rel_tol < 1:
        raise ValueError("rel_tol must lie in (0, 1)")
    res = svd(m)
    s = res.singulars.values
    keep = s > rel_tol * s[0] if s[0] > 0 else np.zeros_like(s, dtype=bool)
    inv = np.zeros_like(s)
    inv[keep] = 1.0 / s[keep]
    return (res.right * inv) @ adjoint(res.left)


def complement(q):
    """Orthonormal basis of the orthogonal complement of range(q), q orthonormal."""
    q = as_matrix(q)
    n, s = q.shape
    full, _ = np.linalg.qr(q, mode="complete")
    return full[:, s:]
