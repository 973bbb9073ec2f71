"""Scalar spectral filters and their convergence factors.

A filter ``f`` acts on a matrix through its eigenvalues, ``f(A) = X f(Lam) X^H``.
The shifted Chebyshev polynomial maps ``[lam_n, lam_(p+1)]`` onto ``[-1, 1]``
and grows fastest outside that interval, which makes it the natural filter
for the block Lanczos analysis.
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import FilterError, GapError, RankDeficiencyError
from .linalg import RANK_TOL, singular_values
from .spectrum import Spectrum
from .subspaces import IndexSet, Subspace
from .tuples import DescTuple

TABLE_TOL = 1e-12


def chebyshev_eval(l, x):
    """Chebyshev polynomial of the first kind ``T_l(x)`` for real ``x``.

    Uses ``cos(l arccos x)`` on [-1, 1], ``cosh(l arccosh x)`` above 1 and the
    parity ``T_l(-x) = (-1)^l T_l(x)`` below -1. Accepts arrays.
    """
    if l < 0 or int(l) != l:
        raise ValueError("degree must be a nonnegative integer")
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    inside = ax <= 1.0
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.where(
            inside,
            np.cos(l * np.arccos(np.clip(x, -1.0, 1.0))),
            np.cosh(l * np.arccosh(np.maximum(ax, 1.0))),
        )
    out = np.where(~inside & (x < 0) & (l % 2 == 1), -out, out)
    return float(out) if out.ndim == 0 else out


def chebyshev_recurrence(l, x):
    """``T_l(x)`` by the three-term recurrence; works for complex ``x``."""
    x = np.asarray(x)
    t_prev, t_cur = np.ones_like(x), x
    if l == 0:
        return t_prev
    for _ in range(l - 1):
        t_prev, t_cur = t_cur, 2 * x * t_cur - t_prev
    return t_cur


@dataclass(frozen=True)
class FilterSpec:
    """A scalar function ``f`` applied spectrally.

    ``kind`` is ``"polynomial"`` (``coefficients`` in ascending powers),
    ``"shifted_chebyshev"`` (``degree`` and ``interval = (lam_n, lam_p1)``)
    or ``"table"`` (explicit ``(points, values)`` pairs).
    """

    kind: str
    degree: int = 0
    coefficients: tuple = ()
    interval: tuple = ()
    points: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        if self.kind == "shifted_chebyshev":
            lo, hi = self.interval
            if not hi > lo:
                raise FilterError(f"degenerate interval: need lam_p1 > lam_n, got {self.interval}")
        elif self.kind == "polynomial":
            if not self.coefficients:
                raise FilterError("polynomial filter needs coefficients")
        elif self.kind == "table":
            if len(self.points) != len(self.values) or not self.points:
                raise FilterError("table filter needs equally many points and values")
        else:
            raise FilterError(f"unknown filter kind {self.kind!r}")

    @classmethod
    def polynomial(cls, coefficients):
        c = tuple(complex(v) if np.iscomplexobj(v) else float(v) for v in coefficients)
        return cls("polynomial", degree=len(c) - 1, coefficients=c)

    @classmethod
    def table(cls, points, values):
        return cls("table", points=tuple(np.asarray(points).tolist()),
                   values=tuple(np.asarray(values).tolist()))

    @classmethod
    def constant(cls, c=1.0):
        return cls.polynomial([c])

    def __call__(self, alpha):
        a = np.asarray(alpha)
        if self.kind == "polynomial":
            return npoly.polyval(a, np.asarray(self.coefficients))
        if self.kind == "shifted_chebyshev":
            lo, hi = self.interval
            arg = 1.0 + 2.0 * (a - hi) / (hi - lo)
            if np.iscomplexobj(arg):
                return chebyshev_recurrence(self.degree, arg)
            return chebyshev_eval(self.degree, arg)
        return self._lookup(a)

    def _lookup(self, a):
        pts = np.asarray(self.points)
        vals = np.asarray(self.values)
        flat = np.atleast_1d(a).ravel()
        scale = max(1.0, float(np.abs(pts).max()))
        out = np.empty(flat.shape, dtype=vals.dtype)
        for idx, z in enumerate(flat):
            dist = np.abs(pts - z)
            j = int(np.argmin(dist))
            if dist[j] > TABLE_TOL * scale:
                raise FilterError(f"eigenvalue {z} is not covered by the filter table")
            out[idx] = vals[j]
        return out.reshape(np.shape(a)) if np.ndim(a) else out[0]

    def on(self, spec):
        """Filter values ``f(lam_j)`` for every eigenvalue of ``spec``."""
        return np.asarray(self(spec.eigenvalues))


def make_shifted_chebyshev(lam_p1, lam_n, k):
    """``f(a) = T_{k-1}(1 + 2 (a - lam_p1) / (lam_p1 - lam_n))``."""
    if k < 1:
        raise FilterError("k must be at least 1")
    if not lam_p1 > lam_n:
        raise FilterError(f"degenerate interval: need lam_p1 > lam_n, got {lam_p1}, {lam_n}")
    return FilterSpec("shifted_chebyshev", degree=k - 1, interval=(float(lam_n), float(lam_p1)))


@dataclass(frozen=True)
class ChebyFactors:
    """Per-index Chebyshev quantities for ``j = 1..p`` (stored 0-based).

    ``sigma_j = 1 / T_{k-1}(1 + 2 gamma_j)``, ``gamma_j`` the gap ratio,
    ``xi_j = (lam_j - lam_p1) / (lam_j - lam_n)`` and ``beta_j = sigma_{p+1-j}^2``.
    ``sigma_xi`` holds the same factors evaluated through ``(1 + xi) / (1 - xi)``.
    """

    sigma: np.ndarray
    gamma: np.ndarray
    xi: np.ndarray
    beta: np.ndarray
    k: int
    lam_p1: float
    lam_n: float
    sigma_xi: np.ndarray = None

    def sigma_of(self, tau):
        """``[sigma_{i_t}, ..., sigma_{i_1}]`` as a descending tuple."""
        tau = tau if isinstance(tau, IndexSet) else IndexSet(tuple(tau))
        return DescTuple(self.sigma[tau.zero_based])


def convergence_factors(spec, k, p=None, lam_p1=None, lam_n=None):
    """Chebyshev convergence factors for the top ``p`` eigenvalues of ``spec``.

    ``lam_p1`` and ``lam_n`` default to the true eigenvalues; passing other
    values (for instance Ritz values) changes only the interval.
    """
    lam = spec.lam
    p = spec.p if p is None else int(p)
    if p is None:
        raise ValueError("target size p is required")
    if not lam[p - 1] > lam[p]:
        raise GapError(f"need lambda_p > lambda_(p+1); got {lam[p - 1]} and {lam[p]}")
    lp1 = lam[p] if lam_p1 is None else float(lam_p1)
    ln = lam[-1] if lam_n is None else float(lam_n)
    if not lp1 > ln:
        raise FilterError(f"degenerate interval [{ln}, {lp1}]")
    top = lam[:p]
    if not top.min() > lp1:
        raise GapError("target eigenvalues must lie above the interval")
    gamma = (top - lp1) / (lp1 - ln)
    xi = (top - lp1) / (top - ln)
    with np.errstate(over="ignore"):
        sigma = 1.0 / chebyshev_eval(k - 1, 1.0 + 2.0 * gamma)
        sigma_xi = 1.0 / chebyshev_eval(k - 1, (1.0 + xi) / (1.0 - xi))
    sigma = np.atleast_1d(sigma)
    return ChebyFactors(sigma, gamma, xi, sigma[::-1] ** 2, int(k), lp1, ln,
                        np.atleast_1d(sigma_xi))


@dataclass(frozen=True)
class FilterTuples:
    """``Phi_tau``, ``Phi_hat_t`` and the full ``Phi_hat`` for a filter and index set."""

    phi_tau: DescTuple
    phi_hat_t: DescTuple
    phi_hat: DescTuple
    assumption_holds: bool
    values: np.ndarray

    @property
    def factor(self):
        """Componentwise product ``Phi_tau * Phi_hat_t``."""
        return self.phi_tau * self.phi_hat_t


def filter_assumption(values, p):
    """Whether ``max_{j>p} |f(lam_j)| < min_{j<=p} |f(lam_j)|``."""
    a = np.abs(values)
    return bool(a[p:].max() < a[:p].min())


def filter_tuples(spec, f, tau):
    """Convergence-factor tuples of ``f`` for the index set ``tau``.

    ``Phi_tau = [|f(lam_i)|^{-1} : i in tau]`` descending,
    ``Phi_hat = [|f(lam_j)| : j > p]`` descending and ``Phi_hat_t`` its
    leading ``t`` entries (zero padded if fewer than ``t`` remain).
    """
    p = spec._require_p()
    tau = tau if isinstance(tau, IndexSet) else IndexSet(tuple(tau))
    tau.check_within(p)
    vals = f.on(spec) if isinstance(f, FilterSpec) else np.asarray(f)
    a = np.abs(vals)
    sel = a[tau.zero_based]
    if sel.min() == 0.0:
        raise FilterError("filter vanishes at a target eigenvalue")
    phi_hat = DescTuple(a[p:])
    head = phi_hat.values[: tau.t]
    if head.size < tau.t:
        head = np.pad(head, (0, tau.t - head.size))
    return FilterTuples(DescTuple(1.0 / sel), DescTuple(head), phi_hat,
                        filter_assumption(vals, p), vals)


def apply_filter(spec, f, y):
    """Basis of ``f(A) Y`` computed through the eigendecomposition.

    The result is not orthonormalized; it is wrapped in a :class:`Subspace`
    whose construction verifies that no rank was lost.
    """
    basis = y.basis if isinstance(y, Subspace) else np.asarray(y)
    vals = f.on(spec) if isinstance(f, FilterSpec) else np.asarray(f)
    img = spec.apply_values(vals, basis)
    s = singular_values(img).values
    ratio = s[-1] / s[0] if s[0] > 0 else 0.0
    if ratio <= RANK_TOL:
        raise RankDeficiencyError(f"filtered block lost rank (ratio {ratio:.2e})", ratio=ratio)
    return Subspace(img)


__all__ = [
    "ChebyFactors",
    "FilterSpec",
    "FilterTuples",
    "Spectrum",
    "apply_filter",
    "chebyshev_eval",
    "chebyshev_recurrence",
    "convergence_factors",
    "filter_assumption",
    "filter_tuples",
    "make_shifted_chebyshev",
]
