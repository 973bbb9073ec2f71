"""Block eigensolvers: power, Chebyshev, block Lanczos and shift-and-invert.

All solvers act on a :class:`Spectrum`, so ``A`` is applied through its
eigendecomposition. For diagonal spectra this is a row scaling and no
``n x n`` matrix is ever formed.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, FilterError, NotHermitianError, RankDeficiencyError
from .linalg import RANK_TOL, adjoint, as_matrix, hermitian_eig, orthonormalize, singular_values, svd
from .spectrum import Spectrum, random_unitary
from .subspaces import Subspace, principal_angles_cosine
from .tuples import DescTuple

DEFLATION_TOL = 1e-10
ORTHO_CHECK = 1e-10


def _basis(y):
    return y.basis if isinstance(y, Subspace) else as_matrix(y)


def _orthonormal(y):
    return y.q if isinstance(y, Subspace) else orthonormalize(y)


def block_power(spec, y0, steps):
    """Basis of ``A^steps Y0``, re-orthonormalized after every multiplication."""
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    q = _orthonormal(y0)
    for _ in range(steps):
        q = orthonormalize(spec.apply(q))
    return Subspace.from_orthonormal(q)


class BlockKrylov:
    """Incremental orthonormal basis of ``Y + A Y + ... + A^{k-1} Y``.

    Each new block ``A Z`` is orthogonalized twice against the whole basis,
    then rank-revealed by an SVD: directions with singular value below
    ``DEFLATION_TOL`` times the block's largest column norm are dropped. When
    nothing survives the subspace is invariant and stops growing.
    """

    def __init__(self, spec, y, deflation_tol=DEFLATION_TOL):
        self.spec = spec
        self.tol = deflation_tol
        q = _orthonormal(y)
        self._q = q
        self._block = q
        self.dims = [q.shape[1]]
        self.invariant = False

    @property
    def k(self):
        return len(self.dims)

    @property
    def dim(self):
        return self.dims[-1]

    def basis(self, k=None):
        """Orthonormal basis after ``k`` blocks (default: all built so far)."""
        k = self.k if k is None else k
        if not 1 <= k <= self.k:
            raise ValueError(f"k={k} outside 1..{self.k}")
        return self._q[:, : self.dims[k - 1]]

    def extend(self):
        if self.invariant or self.dim >= self.spec.n:
            self.invariant = True
            self.dims.append(self.dim)
            return self
        az = self.spec.apply(self._block)
        scale = np.sqrt((np.abs(az) ** 2).sum(axis=0)).max()
        w = az
        for _ in range(2):
            w = w - self._q @ (adjoint(self._q) @ w)
        keep = 0
        if scale > 0:
            res = svd(w)
            s = res.singulars.values
            keep = int(np.sum(s > self.tol * scale))
            keep = min(keep, self.spec.n - self.dim)
        if keep == 0:
            self.invariant = True
            self.dims.append(self.dim)
            return self
        new = res.left[:, :keep]
        new = new - self._q @ (adjoint(self._q) @ new)
        new, _ = np.linalg.qr(new)
        self._q = np.hstack([self._q, new])
        self._block = new
        self.dims.append(self._q.shape[1])
        return self

    def build(self, k):
        while self.k < k:
            self.extend()
        return self


def block_krylov_basis(spec, y, k):
    """Orthonormal basis of the block Krylov subspace with ``k`` blocks."""
    if k < 1:
        raise ValueError("k must be at least 1")
    return Subspace.from_orthonormal(BlockKrylov(spec, y).build(k).basis(k))


@dataclass(frozen=True)
class RitzSet:
    """Top Ritz pairs of a compression, with the spread of all Ritz values."""

    values: DescTuple
    vectors: np.ndarray
    spread: float
    all_values: DescTuple

    @property
    def smallest(self):
        return float(self.all_values[-1])


def rayleigh_ritz(spec, basis, want=None):
    """Ritz values and vectors of ``A`` in ``range(basis)``; ``basis`` orthonormal."""
    if not spec.hermitian:
        raise NotHermitianError("Rayleigh-Ritz is implemented for Hermitian spectra")
    q = basis.q if isinstance(basis, Subspace) else as_matrix(basis)
    err = np.abs(adjoint(q) @ q - np.eye(q.shape[1])).max()
    if err > ORTHO_CHECK:
        raise ValueError(f"Rayleigh-Ritz needs an orthonormal basis (residual {err:.2e})")
    want = q.shape[1] if want is None else int(want)
    if not 1 <= want <= q.shape[1]:
        raise DimensionError(f"want={want} outside 1..{q.shape[1]}")
    h = spec.project(q)
    lam, v = hermitian_eig(0.5 * (h + adjoint(h)))
    vals = lam.values
    return RitzSet(
        DescTuple(vals[:want]), q @ v[:, :want], float(vals[0] - vals[-1]), lam
    )


def chebyshev_block_step(spec, interval, k, y):
    """``T_{k-1}`` of the affinely mapped ``A`` applied to ``Y`` by the three-term recurrence.

    ``interval = (lam_n, lam_p1)`` is mapped onto ``[-1, 1]``; the result
    equals the spectral application of the shifted Chebyshev filter.
    """
    lo, hi = (float(v) for v in interval)
    if not hi > lo:
        raise FilterError(f"degenerate interval {interval}")
    if k < 1:
        raise ValueError("k must be at least 1")
    z0 = _basis(y)

    def mapped(z):
        return (2.0 * spec.apply(z) - (hi + lo) * z) / (hi - lo)

    if k == 1:
        return Subspace(z0, validate=False)
    z_prev, z_cur = z0, mapped(z0)
    for _ in range(k - 2):
        z_prev, z_cur = z_cur, 2.0 * mapped(z_cur) - z_prev
    return Subspace(z_cur, validate=False)


# shift-and-invert -----------------------------------------------------------


@dataclass(frozen=True)
class Pencil:
    """Hermitian pencil ``L v = alpha S v`` with shift ``beta`` and sign of ``Lt = +-L_beta``."""

    L: np.ndarray
    S: np.ndarray
    beta: float
    sign: int = 1

    def __post_init__(self):
        l, s = as_matrix(self.L), as_matrix(self.S)
        if l.shape != s.shape or l.shape[0] != l.shape[1]:
            raise DimensionError("L and S must be square of equal size")
        for name, m in (("L", l), ("S", s)):
            if np.linalg.norm(m - adjoint(m)) > 1e-12 * max(np.linalg.norm(m), 1.0):
                raise NotHermitianError(f"{name} is not Hermitian")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        try:
            np.linalg.cholesky(s)
        except np.linalg.LinAlgError:
            raise ValueError("S is not positive definite") from None
        sv = singular_values(l - self.beta * s).values
        if sv[-1] <= RANK_TOL * sv[0]:
            raise RankDeficiencyError(f"L - beta S is singular at beta={self.beta}", ratio=sv[-1] / sv[0])
        object.__setattr__(self, "L", l)
        object.__setattr__(self, "S", s)

    @property
    def shifted(self):
        return self.L - self.beta * self.S


@dataclass(frozen=True)
class ShiftInvertMap:
    """Eigenvalue map ``lam = sign / (alpha - beta)`` and the factors behind it."""

    beta: float
    sign: int
    m_inv_sqrt: np.ndarray
    m_inverse: np.ndarray
    pencil: Pencil

    def to_pencil(self, lam):
        """Recover ``alpha = beta + sign / lam``."""
        return self.beta + self.sign / np.asarray(lam)

    def from_pencil(self, alpha):
        return self.sign / (np.asarray(alpha) - self.beta)

    def pencil_vectors(self, w):
        """Map eigenvectors of ``A`` back to eigenvectors of the pencil, ``v = M^{-1/2} w``."""
        return self.m_inv_sqrt @ w

    def solve_m(self, r):
        """``M^{-1} r`` by two solves with ``L_beta``: ``L_beta^{-1} S L_beta^{-1} r``."""
        lb = self.pencil.shifted
        return np.linalg.solve(lb, self.pencil.S @ np.linalg.solve(lb, r))


def shift_invert_operator(pencil):
    """Spectrum of ``A = M^{-1/2} Lt M^{-1/2}`` with ``M = L_beta S^{-1} L_beta``.

    Eigenvalues of ``A`` relate to those of the pencil by
    ``lam = sign / (alpha - beta)``; the map is stored as ``transform``.
    """
    lb = pencil.shifted
    m = lb @ np.linalg.solve(pencil.S, lb)
    m = 0.5 * (m + adjoint(m))
    mu, z = hermitian_eig(m)
    mu = mu.values
    if mu[-1] <= 0:
        raise ArithmeticError("M is not positive definite")
    m_is = (z * mu ** -0.5) @ adjoint(z)
    m_inv = (z / mu) @ adjoint(z)
    a = m_is @ (pencil.sign * lb) @ m_is
    transform = ShiftInvertMap(pencil.beta, pencil.sign, m_is, m_inv, pencil)
    lam, x = hermitian_eig(0.5 * (a + adjoint(a)))
    return Spectrum(lam.values, x, hermitian=True, transform=transform, validate=False)


def krylov_transform_check(spec, y, k, v, angle_tol=1e-8):
    """Check that ``V^H K(A, Y)`` is the block Krylov subspace of ``V^H A V`` from ``V^H Y``.

    ``v`` must be an orthonormal basis of a subspace containing the target
    eigenvectors and the Krylov subspace.
    """
    vq = v.q if isinstance(v, Subspace) else as_matrix(v)
    kq = block_krylov_basis(spec, y, k).q
    lhs = adjoint(vq) @ kq
    b = spec.project(vq)
    lam, w = hermitian_eig(0.5 * (b + adjoint(b)))
    small = Spectrum(lam.values, w, hermitian=True, validate=False)
    rhs = block_krylov_basis(small, adjoint(vq) @ _basis(y), k).q
    if lhs.shape[1] != rhs.shape[1]:
        return False
    lq = orthonormalize(lhs)
    return principal_angles_cosine(
        Subspace.from_orthonormal(lq), Subspace.from_orthonormal(rhs)
    ).largest <= angle_tol


__all__ = [
    "BlockKrylov",
    "Pencil",
    "RitzSet",
    "ShiftInvertMap",
    "Spectrum",
    "block_krylov_basis",
    "block_power",
    "chebyshev_block_step",
    "krylov_transform_check",
    "random_unitary",
    "rayleigh_ritz",
    "shift_invert_operator",
]
