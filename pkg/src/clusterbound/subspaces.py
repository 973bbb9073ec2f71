"""Subspaces, principal angles and the biorthogonal auxiliary basis.

Principal angles are available by two independent routes: the cosine
definition through the singular values of ``V^H U`` and the tangent formula
``S(V_perp^H Ut (V^H Ut)^+)``. They agree in exact arithmetic and are used
to cross-check each other.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, RankDeficiencyError, RightAngleError
from .linalg import (
    RANK_TOL,
    adjoint,
    as_matrix,
    complement,
    orthonormalize,
    singular_values,
    svd,
)
from .tuples import DescTuple

ORTHO_TOL = 1e-12
# cos^2 = 1/2 splits the arccos and arcsin regimes
_SPLIT = np.sqrt(0.5)


@dataclass(frozen=True)
class IndexSet:
    """Strictly increasing 1-based indices ``i_1 < ... < i_t``."""

    indices: tuple

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if not idx:
            raise ValueError("index set must not be empty")
        if idx[0] < 1 or any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError(f"indices must be strictly increasing and >= 1, got {idx}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def parse(cls, text):
        """Build from ``"1,2,3"`` or ``"3..8"``."""
        text = text.strip()
        if ".." in text:
            lo, hi = text.split("..")
            return cls(tuple(range(int(lo), int(hi) + 1)))
        return cls(tuple(int(s) for s in text.split(",") if s.strip()))

    @classmethod
    def first(cls, i):
        return cls(tuple(range(1, i + 1)))

    @property
    def t(self):
        return len(self.indices)

    @property
    def last(self):
        return self.indices[-1]

    @property
    def zero_based(self):
        return np.array(self.indices, dtype=int) - 1

    def check_within(self, p):
        if self.indices[-1] > p:
            raise IndexError(f"index {self.indices[-1]} exceeds {p}")
        return self

    def __len__(self):
        return self.t

    def __iter__(self):
        return iter(self.indices)

    def __str__(self):
        return ",".join(str(i) for i in self.indices)


class Subspace:
    """A subspace given by a basis matrix.

    The basis must have full column rank. With ``orthonormal=True`` the basis
    is checked to have orthonormal columns; otherwise an orthonormal basis is
    computed on first use.
    """

    __slots__ = ("basis", "orthonormal", "_q")

    def __init__(self, basis, orthonormal=False, validate=True):
        b = as_matrix(basis)
        self.basis = b
        self.orthonormal = bool(orthonormal)
        self._q = None
        if orthonormal:
            if validate:
                err = np.abs(adjoint(b) @ b - np.eye(b.shape[1])).max()
                if err > ORTHO_TOL * max(1, b.shape[1]):
                    raise ValueError(f"basis is not orthonormal: residual {err:.2e}")
            self._q = b
        elif validate:
            self._q = orthonormalize(b)

    @classmethod
    def from_orthonormal(cls, q):
        return cls(q, orthonormal=True, validate=False)

    @property
    def n(self):
        return self.basis.shape[0]

    @property
    def dim(self):
        return self.basis.shape[1]

    @property
    def q(self):
        """Orthonormal basis of the same range."""
        if self._q is None:
            self._q = orthonormalize(self.basis)
        return self._q

    def complement(self):
        return Subspace.from_orthonormal(complement(self.q))

    def __repr__(self):
        return f"Subspace(n={self.n}, dim={self.dim}, orthonormal={self.orthonormal})"


def _as_subspace(u):
    return u if isinstance(u, Subspace) else Subspace(u)


@dataclass(frozen=True)
class AngleTuple:
    """Principal angles in descending order, all below pi/2."""

    angles: DescTuple
    cosines: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        a = self.angles.values
        if a.min() < 0 or a.max() >= np.pi / 2:
            raise RightAngleError("principal angles must lie in [0, pi/2)", ratio=0.0)

    @property
    def tangents(self):
        return DescTuple(np.tan(self.angles.values))

    @property
    def largest(self):
        return float(self.angles[0])

    def __len__(self):
        return len(self.angles)


def angles_from_cos_sin(cos, sin, method="mixed"):
    """Assemble descending angles from singular values of ``V^H U`` and ``U - V V^H U``.

    ``cos`` and ``sin`` are both descending; the largest angle pairs with
    the largest sine and the smallest cosine. ``method='arccos'`` ignores
    the sines and clamps the cosines into [0, 1].
    """
    c = np.clip(np.asarray(cos, dtype=float)[::-1], 0.0, 1.0)
    if method == "arccos":
        theta = np.arccos(c)
    elif method == "mixed":
        s = np.clip(np.asarray(sin, dtype=float), 0.0, 1.0)
        theta = np.where(s <= _SPLIT, np.arcsin(s), np.arccos(c))
    else:
        raise ValueError(f"unknown method {method!r}")
    cmin = c[0] if c.size else 1.0
    if cmin <= RANK_TOL:
        raise RightAngleError(f"angle pi/2 detected: smallest cosine {cmin:.2e}", ratio=cmin)
    return AngleTuple(DescTuple(theta), cosines=c[::-1].copy())


def principal_angles_cosine(u, v, method="mixed"):
    """Principal angles from ``U`` to ``V`` with ``dim U <= dim V``.

    Cosines are the singular values of ``V^H U``. By default small angles
    are taken from the sines, the singular values of ``U - V V^H U``, which
    keeps them accurate where ``arccos`` is ill-conditioned.
    """
    su, sv = _as_subspace(u), _as_subspace(v)
    if su.n != sv.n:
        raise DimensionError(f"ambient dimensions differ: {su.n} vs {sv.n}")
    if su.dim > sv.dim:
        raise DimensionError(f"dim U = {su.dim} exceeds dim V = {sv.dim}")
    qu, qv = su.q, sv.q
    proj = adjoint(qv) @ qu
    cos = singular_values(proj).values
    sin = singular_values(qu - qv @ proj).values if method == "mixed" else None
    return angles_from_cos_sin(cos, sin, method)


def angles_to_coordinate_span(q, rows, method="mixed"):
    """Angles from ``span{e_r : r in rows}`` to ``range(q)``, ``q`` orthonormal.

    Works in eigen-coordinates without forming the coordinate vectors
    explicitly beyond an ``n x t`` block.
    """
    q = np.asarray(q)
    rows = np.asarray(rows, dtype=int)
    if rows.size > q.shape[1]:
        raise DimensionError(f"{rows.size} coordinates exceed subspace dimension {q.shape[1]}")
    top = adjoint(q[rows, :])
    cos = singular_values(top).values
    sin = None
    if method == "mixed":
        resid = -(q @ top)
        resid[rows, np.arange(rows.size)] += 1.0
        sin = singular_values(resid).values
    return angles_from_cos_sin(cos, sin, method)


def tangents_from_blocks(top, bottom, s=None):
    """Tangent tuple from ``top = V^H Ut`` and ``bottom = V_perp^H Ut``.

    Returns the ``s`` largest singular values of ``bottom @ pinv(top)``,
    ``s`` defaulting to the column count of ``Ut``. The pseudoinverse is
    applied through the SVD of ``top``; its orthonormal left factor does not
    change the singular values and is dropped.
    """
    top = as_matrix(top)
    bottom = as_matrix(bottom)
    if top.shape[1] != bottom.shape[1]:
        raise DimensionError("top and bottom blocks must share the column count")
    cols = top.shape[1]
    s = cols if s is None else s
    if top.shape[0] < cols:
        raise DimensionError(f"V^H Ut is {top.shape}; needs at least as many rows as columns")
    res = svd(top)
    sig = res.singulars.values
    ratio = sig[-1] / sig[0] if sig[0] > 0 else 0.0
    if ratio <= RANK_TOL:
        raise RightAngleError(
            f"V^H Ut is rank deficient (ratio {ratio:.2e}): an angle equals pi/2", ratio=ratio
        )
    if bottom.shape[0] == 0:
        return DescTuple(np.zeros(s))
    core = (bottom @ res.right) / sig
    vals = singular_values(core).values
    out = np.zeros(s)
    m = min(s, vals.size)
    out[:m] = vals[:m]
    return DescTuple(out)


def principal_angles_tangent(utilde, v, vperp):
    """Tangents of the principal angles from ``range(Ut)`` to ``V``.

    ``v`` and ``vperp`` are orthonormal bases of complementary orthogonal
    subspaces; ``utilde`` is any basis (not necessarily orthonormal).
    """
    ut = as_matrix(utilde.basis if isinstance(utilde, Subspace) else utilde)
    vq = v.q if isinstance(v, Subspace) else as_matrix(v)
    wq = vperp.q if isinstance(vperp, Subspace) else as_matrix(vperp)
    n = ut.shape[0]
    if vq.shape[0] != n or wq.shape[0] != n:
        raise DimensionError("ambient dimensions differ")
    if vq.shape[1] + wq.shape[1] != n:
        raise DimensionError("V and V_perp must have complementary dimensions")
    s, t = ut.shape[1], vq.shape[1]
    if s > min(t, n - t) and n - t > 0:
        raise DimensionError(f"need s <= min(t, n - t); got s={s}, t={t}, n={n}")
    return tangents_from_blocks(adjoint(vq) @ ut, adjoint(wq) @ ut, s)


def biorthogonal_basis(x, ytilde):
    """Vectors ``Y = Yt (X^H Yt)^{-1}`` so that ``x_i^H y_j = delta_ij``."""
    xq = x.q if isinstance(x, Subspace) else as_matrix(x)
    yt = ytilde.basis if isinstance(ytilde, Subspace) else as_matrix(ytilde)
    if xq.shape != yt.shape:
        raise DimensionError(f"shapes differ: {xq.shape} vs {yt.shape}")
    g = adjoint(xq) @ yt
    return yt @ _inverse_checked(g)


def biorthogonal_coords(yt_coords, p):
    """Biorthogonal basis in eigen-coordinates where ``X = E_p``: ``Yt @ inv(Yt[:p])``."""
    yt = as_matrix(yt_coords)
    return yt @ _inverse_checked(yt[:p, :])


def _inverse_checked(g):
    sig = singular_values(g).values
    ratio = sig[-1] / sig[0] if sig[0] > 0 else 0.0
    if ratio <= RANK_TOL:
        raise RightAngleError(
            f"X^H Yt is singular (ratio {ratio:.2e}): the angle between X and Y is pi/2",
            ratio=ratio,
        )
    return np.linalg.solve(g, np.eye(g.shape[0]))


def select_columns(y, tau):
    """Columns of ``y`` with the 1-based indices of ``tau``, in order."""
    m = np.asarray(y.basis if isinstance(y, Subspace) else y)
    if not isinstance(tau, IndexSet):
        tau = IndexSet(tuple(tau))
    tau.check_within(m.shape[1])
    return m[:, tau.zero_based]


__all__ = [
    "AngleTuple",
    "IndexSet",
    "RankDeficiencyError",
    "RightAngleError",
    "Subspace",
    "angles_from_cos_sin",
    "angles_to_coordinate_span",
    "biorthogonal_basis",
    "biorthogonal_coords",
    "principal_angles_cosine",
    "principal_angles_tangent",
    "select_columns",
    "tangents_from_blocks",
]
