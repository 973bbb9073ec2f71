"""Weak, strong and log majorization checks with explicit tolerances.

Every check returns a :class:`MajorizationVerdict` carrying the prefix sums
on both sides, so callers can report by how much a relation held or failed.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, RankDeficiencyError
from .linalg import as_matrix, singular_values
from .tuples import DescTuple, sort_desc

DEFAULT_TOL = 1e-10

__all__ = [
    "DescTuple",
    "MajorizationVerdict",
    "ProductCheck",
    "componentwise_leq",
    "indexwise_leq",
    "leading_subtuple",
    "log_weakly_majorizes",
    "product_majorization_check",
    "sort_desc",
    "strongly_majorizes",
    "weakly_majorizes",
]


@dataclass(frozen=True)
class MajorizationVerdict:
    """Outcome of comparing a left-hand tuple against a right-hand tuple.

    ``worst_violation`` is ``max(0, max_k (lhs_k - rhs_k))`` over the prefix
    quantities and the relation holds exactly when it does not exceed
    ``tolerance_used``.
    """

    holds: bool
    prefix_sums_lhs: np.ndarray
    prefix_sums_rhs: np.ndarray
    worst_violation: float
    tolerance_used: float
    mode: str = "weak"

    def __bool__(self):
        return self.holds

    @property
    def slack(self):
        """Per-prefix margin ``rhs_k - lhs_k`` (negative where violated)."""
        return self.prefix_sums_rhs - self.prefix_sums_lhs


def _desc(x):
    return x.values if isinstance(x, DescTuple) else DescTuple(x).values


def _pad(a, b):
    if len(a) == len(b):
        return a, b
    if min(a.min(), b.min()) < 0:
        raise DimensionError("tuples of different length can only be compared when nonnegative")
    d = max(len(a), len(b))
    return np.pad(a, (0, d - len(a))), np.pad(b, (0, d - len(b)))


def _verdict(sa, sb, tol, atol, mode):
    scale = max(np.abs(sa).max(), np.abs(sb).max())
    tol_used = tol * scale + atol
    worst = max(0.0, float(np.max(sa - sb)))
    return MajorizationVerdict(bool(worst <= tol_used), sa, sb, worst, tol_used, mode)


def weakly_majorizes(b, a, tol=DEFAULT_TOL, atol=0.0):
    """Check ``a ≺_w b``: each prefix sum of ``a`` is at most that of ``b``.

    ``tol`` is relative to the largest prefix magnitude; ``atol`` is an extra
    absolute allowance for callers that know their noise floor.
    """
    x, y = _pad(_desc(a), _desc(b))
    return _verdict(np.cumsum(x), np.cumsum(y), tol, atol, "weak")


def strongly_majorizes(b, a, tol=DEFAULT_TOL, atol=0.0):
    """Check ``a ≺ b``: weak majorization with equal totals."""
    weak = weakly_majorizes(b, a, tol=tol, atol=atol)
    gap = abs(weak.prefix_sums_lhs[-1] - weak.prefix_sums_rhs[-1])
    worst = max(weak.worst_violation, gap)
    return MajorizationVerdict(
        bool(worst <= weak.tolerance_used),
        weak.prefix_sums_lhs,
        weak.prefix_sums_rhs,
        worst,
        weak.tolerance_used,
        "strong",
    )


def log_weakly_majorizes(b, a, rel_tol=DEFAULT_TOL):
    """Check ``log a ≺_w log b`` for nonnegative tuples.

    Prefix products are compared directly, so a zero in ``a`` makes every
    later prefix trivially true. The reported violation is relative:
    ``max_k (prod a / prod b - 1)``.
    """
    x, y = _pad(_desc(a), _desc(b))
    if x.min() < 0 or y.min() < 0:
        raise ValueError("log majorization needs nonnegative tuples")
    pa, pb = np.cumprod(x), np.cumprod(y)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(pa == 0.0, -1.0, np.where(pb > 0.0, pa / pb - 1.0, np.inf))
    worst = max(0.0, float(rel.max()))
    return MajorizationVerdict(bool(worst <= rel_tol), pa, pb, worst, rel_tol, "log")


def componentwise_leq(b, a, tol=DEFAULT_TOL, atol=0.0):
    """Check ``a_j <= b_j`` for every rank ``j`` of the descending tuples."""
    x, y = _pad(_desc(a), _desc(b))
    return _verdict(x, y, tol, atol, "componentwise")


def indexwise_leq(b, a, tol=DEFAULT_TOL, atol=0.0):
    """Check ``a[j] <= b[j]`` position by position, without sorting."""
    x = np.asarray(a, dtype=float).ravel()
    y = np.asarray(b, dtype=float).ravel()
    if x.shape != y.shape:
        raise DimensionError("indexwise comparison needs equal lengths")
    return _verdict(x, y, tol, atol, "indexwise")


def leading_subtuple(a, t):
    """First ``t`` entries of a descending tuple."""
    d = a if isinstance(a, DescTuple) else DescTuple(a)
    return d.lead(t)


@dataclass(frozen=True)
class ProductCheck:
    """Verdicts for the product and the quotient singular-value claims."""

    product: MajorizationVerdict
    quotient: MajorizationVerdict

    @property
    def holds(self):
        return self.product.holds and self.quotient.holds

    def __bool__(self):
        return self.holds


def product_majorization_check(b1, b2, b3, t, c=1, tol=DEFAULT_TOL):
    """Check the singular-value product inequalities for ``B1 @ B2 @ B3``.

    With ``S_t`` the leading ``t`` singular values and componentwise powers,
    the claims are ``S_t^c(B1B2B3) ≺_w S_t^c(B1) S_t^c(B2) S_t^c(B3)`` and
    ``S_t^c(B1B2B3) / S_t^c(B2) ≺_w S_t^c(B1) S_t^c(B3)``, with entries
    paired by descending rank.
    """
    m1, m2, m3 = as_matrix(b1), as_matrix(b2), as_matrix(b3)
    if m1.shape[1] != m2.shape[0] or m2.shape[1] != m3.shape[0]:
        raise DimensionError(f"non-conformable shapes {m1.shape}, {m2.shape}, {m3.shape}")
    dims = (m1.shape[0], m1.shape[1], m2.shape[1], m3.shape[1])
    if not 1 <= t <= min(dims):
        raise DimensionError(f"t={t} must lie in 1..{min(dims)}")
    if int(c) != c or c < 1:
        raise ValueError("c must be a positive integer")
    s1, s2, s3 = (singular_values(m).values[:t] ** c for m in (m1, m2, m3))
    s123 = singular_values(m1 @ m2 @ m3).values[:t] ** c
    if s2.min() <= 0.0:
        raise RankDeficiencyError("S_t(B2) has a zero entry; the quotient form is undefined", ratio=0.0)
    product = weakly_majorizes(s1 * s2 * s3, s123, tol=tol)
    quotient = weakly_majorizes(s1 * s3, s123 / s2, tol=tol)
    return ProductCheck(product, quotient)
