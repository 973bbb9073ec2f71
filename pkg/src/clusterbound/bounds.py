"""Evaluators for cluster-robust convergence bounds.

Every evaluator computes a measured quantity from an actual iterate (a
filtered subspace, a block Krylov subspace, Ritz values) together with the
right-hand side of a bound, and compares them. A :class:`BoundReport`
collects the stated bound as its main check and the intermediate links of
the argument behind it as further checks, so a failure points at the link
that broke.

Computations run in eigen-coordinates, where the target eigenvectors
``x_1, ..., x_p`` are the first coordinate vectors. Principal angles do not
change under the unitary change of basis.

Comparisons use a relative tolerance on the largest prefix sum plus an
absolute noise floor that scales with the conditioning of the quantities
involved (tangents near pi/2, small Ritz denominators).
"""

from dataclasses import dataclass, field

import numpy as np

from .eigensolvers import BlockKrylov, block_power, rayleigh_ritz
from .errors import DimensionError, FilterError, GapError, RankDeficiencyError, RightAngleError
from .filters import (
    FilterSpec,
    apply_filter,
    convergence_factors,
    filter_assumption,
    filter_tuples,
    make_shifted_chebyshev,
)
from .linalg import EPS, adjoint, as_matrix, complement, hermitian_eig, orthonormalize, svd
from .majorization import MajorizationVerdict, componentwise_leq, indexwise_leq, weakly_majorizes
from .subspaces import (
    IndexSet,
    Subspace,
    angles_to_coordinate_span,
    biorthogonal_coords,
    tangents_from_blocks,
)
from .tuples import DescTuple

DEFAULT_TOL = 1e-8
NOISE = 100.0
# denominators below this fraction of lambda_1 - lambda_n are treated as zero
DENOM_FLOOR = 1e-14
# directions of K outside X with smaller singular values are rounding noise
RITZ_SPAN_TOL = 1e-13


# reports --------------------------------------------------------------------


@dataclass
class Check:
    """One inequality: ``lhs`` against ``rhs`` in the sense of ``kind``.

    ``kind`` is ``"weak"`` (weak majorization of the sorted tuples),
    ``"tuple"`` (componentwise after sorting both descending) or ``"index"``
    (position by position). ``verdict`` is None when a side is not finite.
    """

    name: str
    lhs: np.ndarray
    rhs: np.ndarray
    kind: str
    atol: float
    verdict: MajorizationVerdict = None

    def evaluate(self, tol=DEFAULT_TOL, atol=None):
        atol = self.atol if atol is None else atol
        if not (np.all(np.isfinite(self.lhs)) and np.all(np.isfinite(self.rhs))):
            return None
        if self.kind == "weak":
            return weakly_majorizes(self.rhs, self.lhs, tol, atol)
        if self.kind == "tuple":
            return componentwise_leq(self.rhs, self.lhs, tol, atol)
        if self.kind == "index":
            return indexwise_leq(self.rhs, self.lhs, tol, atol)
        raise ValueError(f"unknown check kind {self.kind!r}")

    @property
    def holds(self):
        return self.verdict is None or self.verdict.holds


@dataclass
class BoundReport:
    """Measured side, bound side and verdicts of one bound.

    ``checks[0]`` is the stated bound; the rest are the links of its
    derivation or the eliminated right-hand side. ``applicable`` is False
    when a hypothesis (filter enlargement, gap) fails; such reports are
    informational and do not count as violations.
    """

    bound_name: str
    applicable: bool
    checks: list
    metadata: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    @property
    def main(self):
        return self.checks[0] if self.checks else None

    def check(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def measured(self):
        c = self.main
        if c is None:
            return None
        return DescTuple(c.lhs) if c.kind != "index" and np.all(np.isfinite(c.lhs)) else c.lhs

    @property
    def bound(self):
        c = self.main
        if c is None:
            return None
        return DescTuple(c.rhs) if c.kind != "index" and np.all(np.isfinite(c.rhs)) else c.rhs

    @property
    def verdict(self):
        return None if self.main is None else self.main.verdict

    @property
    def holds(self):
        return all(c.holds for c in self.checks)

    @property
    def failures(self):
        return [c for c in self.checks if not c.holds]

    @property
    def violated(self):
        return self.applicable and not self.holds

    def summary(self):
        lines = [f"{self.bound_name}: applicable={self.applicable}"]
        for c in self.checks:
            state = "n/a" if c.verdict is None else ("ok" if c.verdict.holds else "VIOLATED")
            slack = "" if c.verdict is None else f" min slack {c.verdict.slack.min():.3e}"
            lines.append(f"  {c.name:<24s} {c.kind:<6s} {state}{slack}")
        lines.extend(f"  flag: {f}" for f in self.flags)
        return "\n".join(lines)


def verify_report(report, tol=DEFAULT_TOL, atol=None):
    """Re-run every check of ``report`` at relative tolerance ``tol``.

    Returns the verdict of the first failing check, otherwise the main
    check's verdict. Checks with non-finite sides are skipped; if none can
    be evaluated the result holds vacuously with mode ``"not-applicable"``.
    """
    first = None
    for c in report.checks:
        v = c.evaluate(tol, atol)
        if v is None:
            continue
        if not v.holds:
            return v
        if first is None:
            first = v
    if first is None:
        z = np.zeros(0)
        return MajorizationVerdict(True, z, z, 0.0, 0.0, "not-applicable")
    return first


def _make(name, lhs, rhs, kind, atol, tol):
    c = Check(name, np.asarray(lhs, dtype=float), np.asarray(rhs, dtype=float), kind, float(atol))
    c.verdict = c.evaluate(tol)
    return c


def _tan_floor(n, *arrays):
    """Noise floor for prefix sums of tangent-type quantities."""
    m, count = 0.0, 1
    for a in arrays:
        a = np.asarray(a, dtype=float)
        fin = a[np.isfinite(a)]
        if fin.size:
            m = max(m, float(np.abs(fin).max()))
        count = max(count, a.size)
    return NOISE * EPS * np.sqrt(n) * count * (1.0 + m) ** 2


def _ratio_floor(n, scale, denoms, values):
    """Noise floor for prefix sums of Ritz error ratios."""
    d = np.asarray(denoms, dtype=float)
    d = d[np.isfinite(d) & (d > 0)]
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    if not d.size:
        return 0.0
    m = float(np.abs(v).max()) if v.size else 0.0
    return NOISE * EPS * np.sqrt(n) * max(v.size, 1) * scale / d.min() * (1.0 + m)


def _ratios(lam_top, ritz, base, span):
    """``(lam_j - ritz_j) / (ritz_j - base)``, +inf where the denominator is negligible."""
    num = np.asarray(lam_top, dtype=float) - np.asarray(ritz, dtype=float)
    den = np.asarray(ritz, dtype=float) - base
    small = den < DENOM_FLOOR * span
    out = np.where(small, np.inf, num / np.where(small, 1.0, den))
    return out, den, bool(small.any())


# shared geometry ------------------------------------------------------------


def _as_index_set(tau):
    if isinstance(tau, IndexSet):
        return tau
    if isinstance(tau, str):
        return IndexSet.parse(tau)
    if np.ndim(tau) == 0:
        return IndexSet((int(tau),))
    return IndexSet(tuple(tau))


def _others(n, rows):
    mask = np.ones(n, dtype=bool)
    mask[np.asarray(rows, dtype=int)] = False
    return np.flatnonzero(mask)


def tan_to_span(q, rows):
    """Tangents of the angles from ``span{e_r : r in rows}`` to ``range(q)``."""
    return angles_to_coordinate_span(q, rows).tangents


def tan_between_spans(coeffs, rows):
    """Tangents between ``span{e_r}`` and ``range(coeffs[:, cols])`` of equal dimension.

    ``coeffs`` has one column per row in ``rows``; this is the tangent
    formula with ``V`` the coordinate span.
    """
    rows = np.asarray(rows, dtype=int)
    other = _others(coeffs.shape[0], rows)
    return tangents_from_blocks(coeffs[rows, :], coeffs[other, :])


class BoundContext:
    """Quantities shared by all evaluators for one ``(spec, Ytilde)`` pair.

    ``coeffs`` are eigen-coordinates of the given basis, ``biorth`` those of
    the biorthogonal vectors ``y_1, ..., y_p`` (so ``biorth[:p] = I``) and
    ``tan_xy`` the tangents of ``Theta(X, Y)``.
    """

    def __init__(self, spec, ytilde):
        self.spec = spec
        self.p = spec._require_p()
        basis = ytilde.basis if isinstance(ytilde, Subspace) else as_matrix(ytilde)
        if basis.shape != (spec.n, self.p):
            raise DimensionError(f"initial basis must be {spec.n} x {self.p}, got {basis.shape}")
        self.basis = basis
        self.coeffs = spec.coords(basis)
        self.biorth = biorthogonal_coords(self.coeffs, self.p)
        self.tan_xy = tangents_from_blocks(self.coeffs[: self.p], self.coeffs[self.p:])
        self._aux = {}
        self._krylov_ritz = {}

    @property
    def n(self):
        return self.spec.n

    def tan_aux(self, tau):
        """``tan Theta(X_tau, Y_tau)``."""
        tau = _as_index_set(tau)
        key = tau.indices
        if key not in self._aux:
            rows = tau.zero_based
            self._aux[key] = tan_between_spans(self.biorth[:, rows], rows)
        return self._aux[key]

    def tan_lead(self, t):
        """Leading ``t`` entries of ``tan Theta(X, Y)``."""
        return DescTuple(self.tan_xy.values[:t])

    def tan_pair(self, i):
        """``tan angle(x_i, y_i)`` for 1-based ``i``."""
        return float(self.tan_aux((i,))[0])

    def filtered(self, f):
        """Filter values and eigen-coordinates of an orthonormal basis of ``f(A) Y``."""
        vals = f.on(self.spec) if isinstance(f, FilterSpec) else np.asarray(f)
        sub = apply_filter(self.spec, vals, self.basis)
        return vals, self.spec.coords(sub.q)


def _ritz(spec, q, want=None):
    """Ritz values of ``A`` in the span of eigen-coordinates ``q`` (orthonormal)."""
    return rayleigh_ritz(spec, spec.from_coords(q), want).values.values


def _context(spec, ytilde):
    if isinstance(ytilde, BoundContext):
        if ytilde.spec is not spec:
            raise ValueError("context was built for a different spectrum")
        return ytilde
    return BoundContext(spec, ytilde)


def _hermitian(spec):
    lam = spec.lam
    return lam, float(lam[0] - lam[-1])


# classical single-angle bounds ----------------------------------------------


def bound_power_tangent(spec, ytilde, steps, tol=DEFAULT_TOL):
    """Block power method: ``tan angle(x_i, Y_l) <= |lam_(p+1) / lam_i|^l tan angle(X, Y_0)``."""
    ctx = _context(spec, ytilde)
    p = ctx.p
    mag = np.abs(spec.eigenvalues)
    if not mag[:p].min() > mag[p:].max():
        raise GapError("power bound needs |lam_p| > |lam_(p+1)| in modulus ordering")
    factor = (mag[p:].max() / mag[:p]) ** steps
    q = spec.coords(block_power(spec, ctx.basis, steps).q)
    return _single_angle(spec, ctx, None, factor, "power_tangent", tol,
                         {"steps": steps, "factor": factor}, q=q)


def bound_filtered_tangent(spec, f, ytilde, tol=DEFAULT_TOL):
    """``tan angle(x_i, f(A) Y) <= sigma_i tan angle(x_i, y_i) <= sigma_i tan angle(X, Y)``.

    ``sigma_i = max_{j>p} |f(lam_j)| / |f(lam_i)|``.
    """
    ctx = _context(spec, ytilde)
    p = ctx.p
    vals = f.on(spec) if isinstance(f, FilterSpec) else np.asarray(f)
    a = np.abs(vals)
    if a[:p].min() == 0.0:
        raise FilterError("filter vanishes at a target eigenvalue")
    factor = a[p:].max() / a[:p]
    return _single_angle(spec, ctx, vals, factor, "filtered_tangent", tol,
                         {"factor": factor}, applicable=filter_assumption(vals, p))


def bound_chebyshev_tangent(spec, k, ytilde, tol=DEFAULT_TOL):
    """Chebyshev filter of degree ``k-1``: ``tan angle(x_i, Y') <= tan angle(X, Y) / T_{k-1}(1 + 2 gamma_i)``."""
    ctx = _context(spec, ytilde)
    p = ctx.p
    cf = convergence_factors(spec, k, p)
    f = make_shifted_chebyshev(cf.lam_p1, cf.lam_n, k)
    vals = f.on(spec)
    meta = {"sigma": cf.sigma, "gamma": cf.gamma, "k": k}
    return _single_angle(spec, ctx, vals, cf.sigma, "chebyshev_tangent", tol, meta)


def _single_angle(spec, ctx, vals, factor, name, tol, meta, applicable=True, q=None):
    p, n = ctx.p, ctx.n
    if q is None:
        try:
            _, q = ctx.filtered(vals)
        except RankDeficiencyError as exc:
            return BoundReport(name, False, [], meta, [f"filtered block lost rank: {exc}"])
    measured = np.array([tan_to_span(q, [i])[0] for i in range(p)])
    pair = np.array([ctx.tan_pair(i + 1) for i in range(p)])
    whole = np.full(p, ctx.tan_xy[0])
    factor = np.asarray(factor, dtype=float)
    floor = _tan_floor(n, measured, factor * whole)
    checks = [
        _make("bound", measured, factor * whole, "index", floor, tol),
        _make("auxiliary", measured, factor * pair, "index", floor, tol),
        _make("pair_vs_subspace", pair, whole, "index", _tan_floor(n, whole), tol),
    ]
    return BoundReport(name, bool(applicable), checks, meta)


# Ritz value bounds for filtered subspaces -----------------------------------


def _index_factors(vals, p):
    """``c_i = max_{j>p} |f(lam_j)| / min_{j<=i} |f(lam_j)|`` for ``i = 1..p``."""
    a = np.abs(vals)
    return a[p:].max() / np.minimum.accumulate(a[:p])


def bound_chebyshev_ritz(spec, f_or_k, ytilde, tol=DEFAULT_TOL):
    """Ritz values ``eta'`` of ``A`` in ``f(A) Y``, one index at a time.

    Main check: ``(lam_i - eta'_i) / (eta'_i - lam_n) <= c_i^2 tan^2 angle(X, Y)``
    where ``c_i = max_{j>p} |f(lam_j)| / min_{j<=i} |f(lam_j)|``; for an
    integer ``k`` the filter is the shifted Chebyshev polynomial and
    ``c_i = 1 / T_{k-1}(1 + 2 gamma_i)``. Further checks:
    the error ratio against ``tan^2 angle(X_i, Y'_i)``, the angle update
    ``tan angle(X_i, Y'_i) <= c_i tan angle(X_i, Y_i)`` and the auxiliary form
    ``c_i^2 tan^2 angle(X_i, Y_i)``.
    """
    ctx = _context(spec, ytilde)
    p, n = ctx.p, ctx.n
    lam, span = _hermitian(spec)
    meta = {}
    if isinstance(f_or_k, (int, np.integer)):
        cf = convergence_factors(spec, int(f_or_k), p)
        f = make_shifted_chebyshev(cf.lam_p1, cf.lam_n, int(f_or_k))
        vals = f.on(spec)
        c = cf.sigma
        meta.update(sigma=cf.sigma, gamma=cf.gamma, k=int(f_or_k))
    else:
        vals = f_or_k.on(spec) if isinstance(f_or_k, FilterSpec) else np.asarray(f_or_k)
        c = _index_factors(vals, p)
    meta["factor"] = c
    # the Chebyshev form holds for every k, including the constant T_0
    applicable = "k" in meta or filter_assumption(vals, p)
    try:
        _, q = ctx.filtered(vals)
    except RankDeficiencyError as exc:
        return BoundReport("chebyshev_ritz", False, [], meta, [f"filtered block lost rank: {exc}"])
    eta = _ritz(spec, q)
    eps_i, den, tiny = _ratios(lam[:p], eta, lam[-1], span)
    # Y'_i = f(A) span{y_1..y_i}: coordinates of the filtered biorthogonal vectors
    fy = vals[:, None] * ctx.biorth
    tan_i_new = np.array([tan_between_spans(fy[:, :i], np.arange(i))[0] for i in range(1, p + 1)])
    tan_i_aux = np.array([ctx.tan_aux(IndexSet.first(i))[0] for i in range(1, p + 1)])
    whole = np.full(p, ctx.tan_xy[0])
    c2 = np.asarray(c) ** 2
    rfloor = _ratio_floor(n, np.abs(lam).max(), den, eps_i)
    tfloor = _tan_floor(n, tan_i_new ** 2, c2 * whole ** 2)
    checks = [
        _make("bound", eps_i, c2 * whole ** 2, "index", rfloor + tfloor, tol),
        _make("ritz_by_angle", eps_i, tan_i_new ** 2, "index", rfloor + tfloor, tol),
        _make("angle_update", tan_i_new, c * tan_i_aux, "index", _tan_floor(n, tan_i_new, tan_i_aux), tol),
        _make("auxiliary", eps_i, c2 * tan_i_aux ** 2, "index", rfloor + tfloor, tol),
        _make("aux_vs_subspace", tan_i_aux, whole, "index", _tan_floor(n, whole), tol),
    ]
    meta.update(ritz=eta)
    flags = ["Ritz denominator below floor; ratio set to inf"] if tiny else []
    return BoundReport("chebyshev_ritz", applicable, checks, meta, flags)


def bound_stationary_major(spec, k, ytilde, tol=DEFAULT_TOL):
    """Weak majorization of the sorted Ritz errors of the Chebyshev-filtered subspace.

    ``eps ≺_w beta * tan^2 Theta(X, Y)`` with ``beta_j = sigma_{p+1-j}^2``;
    the intermediate check is ``eps ≺_w tan^2 Theta(X, Y')``.
    """
    ctx = _context(spec, ytilde)
    p, n = ctx.p, ctx.n
    lam, span = _hermitian(spec)
    cf = convergence_factors(spec, k, p)
    f = make_shifted_chebyshev(cf.lam_p1, cf.lam_n, k)
    vals, q = ctx.filtered(f)
    eta = _ritz(spec, q)
    eps_j, den, tiny = _ratios(lam[:p], eta, lam[-1], span)
    tan_new = tan_to_span(q, np.arange(p)).values
    rhs = cf.beta * ctx.tan_xy.values ** 2
    floor = _ratio_floor(n, np.abs(lam).max(), den, eps_j) + _tan_floor(n, rhs, tan_new ** 2)
    checks = [
        _make("bound", eps_j, rhs, "weak", floor, tol),
        _make("ritz_by_angles", eps_j, tan_new ** 2, "weak", floor, tol),
    ]
    flags = ["Ritz denominator below floor; ratio set to inf"] if tiny else []
    return BoundReport("stationary_major", True, checks,
                       {"beta": cf.beta, "sigma": cf.sigma, "k": k, "ritz": eta}, flags)


# majorization bounds for filtered subspaces ---------------------------------


def bound_multiangle_major(spec, f, tau, ytilde, tol=DEFAULT_TOL):
    """Multi-angle bound ``tan Theta(X_tau, Y') ≺_w Phi_tau Phi_hat_t tan Theta(X_tau, Y_tau)``.

    Checks, in order: the bound with the auxiliary right-hand side; the
    eliminated right-hand side with ``tan Theta_t(X, Y)``; monotonicity
    ``tan Theta(X_tau, Y') <= tan Theta(X_tau, Y'_tau)``; the majorization for
    ``Y'_tau``; and the subtuple inequality linking the two right-hand sides.
    """
    ctx = _context(spec, ytilde)
    p, n = ctx.p, ctx.n
    tau = _as_index_set(tau).check_within(p)
    ft = filter_tuples(spec, f, tau)
    meta = {"phi_tau": ft.phi_tau, "phi_hat_t": ft.phi_hat_t, "tau": tau}
    try:
        vals, q = ctx.filtered(ft.values)
    except RankDeficiencyError as exc:
        return BoundReport("multiangle_major", False, [], meta, [f"filtered block lost rank: {exc}"])
    rows = tau.zero_based
    measured = tan_to_span(q, rows).values
    fy_tau = vals[:, None] * ctx.biorth[:, rows]
    tau_side = tan_between_spans(fy_tau, rows).values
    aux = ctx.tan_aux(tau).values
    lead = ctx.tan_lead(tau.t).values
    factor = ft.factor.values
    floor = _tan_floor(n, measured, factor * lead)
    checks = [
        _make("bound", measured, factor * aux, "weak", floor, tol),
        _make("eliminated", measured, factor * lead, "weak", floor, tol),
        _make("monotonicity", measured, tau_side, "tuple", _tan_floor(n, tau_side), tol),
        _make("tau_subspace", tau_side, factor * aux, "weak", _tan_floor(n, tau_side, factor * aux), tol),
        _make("subtuple", aux, lead, "tuple", _tan_floor(n, lead), tol),
    ]
    return BoundReport("multiangle_major", ft.assumption_holds, checks, meta)


def bound_abstract_filter(spec, f, utilde, v, tol=DEFAULT_TOL):
    """``tan Theta(F U, V) ≺_w S_s((V^H F V)^{-1}) S_s(V_perp^H F V_perp) tan Theta(U, V)``.

    ``F = f(A)``. ``v`` is either an index set of eigenvectors or an
    orthonormal basis; a basis must span an invariant subspace of ``F^H``.
    """
    vals = f.on(spec) if isinstance(f, FilterSpec) else np.asarray(f)
    u = utilde.basis if isinstance(utilde, Subspace) else as_matrix(utilde)
    n, s = u.shape
    if not (isinstance(v, Subspace) or (isinstance(v, np.ndarray) and v.ndim == 2)):
        rows = _as_index_set(v).zero_based
        if rows.max() >= n:
            raise DimensionError("eigenvector index exceeds n")
        other = _others(n, rows)
        cu = spec.coords(u)
        fu = vals[:, None] * cu
        top, bot, utop, ubot = fu[rows], fu[other], cu[rows], cu[other]
        fv = np.abs(vals[rows])
        if fv.min() == 0.0:
            raise RankDeficiencyError("V^H F V is singular", ratio=0.0)
        inv_s = np.sort(1.0 / fv)[::-1]
        rest_s = np.sort(np.abs(vals[other]))[::-1]
        t = rows.size
    else:
        vq = v.q if isinstance(v, Subspace) else as_matrix(v)
        t = vq.shape[1]
        fmat = spec.apply_values(vals, np.eye(n))
        fh_v = adjoint(fmat) @ vq
        resid = np.linalg.norm(fh_v - vq @ (adjoint(vq) @ fh_v))
        if resid > 1e-10 * max(1.0, np.linalg.norm(fmat)):
            raise ValueError(f"V is not invariant under F^H (residual {resid:.2e})")
        w = complement(vq)
        top, bot = adjoint(vq) @ fmat @ u, adjoint(w) @ fmat @ u
        utop, ubot = adjoint(vq) @ u, adjoint(w) @ u
        core = svd(adjoint(vq) @ fmat @ vq).singulars.values
        if core[-1] == 0.0:
            raise RankDeficiencyError("V^H F V is singular", ratio=0.0)
        inv_s = np.sort(1.0 / core)[::-1]
        rest_s = svd(adjoint(w) @ fmat @ w).singulars.values if w.shape[1] else np.zeros(0)
    if s > min(t, n - t):
        raise DimensionError(f"need s <= min(t, n - t); got s={s}, t={t}, n={n}")
    measured = tangents_from_blocks(top, bot, s).values
    before = tangents_from_blocks(utop, ubot, s).values
    factor = inv_s[:s] * np.pad(rest_s, (0, max(0, s - rest_s.size)))[:s]
    floor = _tan_floor(n, measured, factor * before)
    checks = [_make("bound", measured, factor * before, "weak", floor, tol)]
    return BoundReport("abstract_filter", True, checks,
                       {"inverse_factor": inv_s[:s], "rest_factor": rest_s[:s]})


def bound_ritz_major(spec, f, i, ytilde, tol=DEFAULT_TOL):
    """Ritz errors of ``f(A) Y``: ``eps ≺_w Phi_i^2 Phi_hat_i^2 tan^2 Theta(X_i, Y_i)``.

    ``eps_j = (lam_j - eta'_j) / (eta'_j - lam_n)`` for ``j <= i``. Further
    checks: the eliminated form with ``tan^2 Theta_i(X, Y)``, the angle update
    for ``Y'_i`` and ``eps ≺_w tan^2 Theta(X_i, Y'_i)``.
    """
    ctx = _context(spec, ytilde)
    p, n = ctx.p, ctx.n
    lam, span = _hermitian(spec)
    tau = IndexSet.first(int(i)).check_within(p)
    ft = filter_tuples(spec, f, tau)
    meta = {"phi_i": ft.phi_tau, "phi_hat_i": ft.phi_hat_t, "i": int(i)}
    try:
        vals, q = ctx.filtered(ft.values)
    except RankDeficiencyError as exc:
        return BoundReport("ritz_major", False, [], meta, [f"filtered block lost rank: {exc}"])
    eta = _ritz(spec, q)
    eps_j, den, tiny = _ratios(lam[:i], eta[:i], lam[-1], span)
    rows = tau.zero_based
    tan_new = tan_between_spans(vals[:, None] * ctx.biorth[:, rows], rows).values
    aux = ctx.tan_aux(tau).values
    lead = ctx.tan_lead(i).values
    f2 = ft.factor.values ** 2
    floor = _ratio_floor(n, np.abs(lam).max(), den, eps_j) + _tan_floor(n, f2 * lead ** 2, tan_new ** 2)
    checks = [
        _make("bound", eps_j, f2 * aux ** 2, "weak", floor, tol),
        _make("eliminated", eps_j, f2 * lead ** 2, "weak", floor, tol),
        _make("angle_update", tan_new ** 2, f2 * aux ** 2, "weak", _tan_floor(n, tan_new ** 2, f2 * aux ** 2), tol),
        _make("ritz_by_angles", eps_j, tan_new ** 2, "weak", floor, tol),
        _make("subtuple", aux, lead, "tuple", _tan_floor(n, lead), tol),
    ]
    meta["ritz"] = eta
    flags = ["Ritz denominator below floor; ratio set to inf"] if tiny else []
    return BoundReport("ritz_major", ft.assumption_holds, checks, meta, flags)


def bound_ritz_abstract(spec, f, utilde, v=None, tol=DEFAULT_TOL):
    """Ritz value bounds for ``W = orth(F U)`` against eigenvectors ``V``, ``dim U = dim V = t``.

    With ``v=None``, ``V`` spans the top ``t`` eigenvectors and both forms
    are checked; otherwise ``v`` is an index set of any ``t`` eigenvectors
    and only the spread form applies.

    * smallest-Ritz form: ``[(lam_j - psi_j) / (psi_j - psi)] ≺_w
      S^2((V^H F V)^{-1}) S_t^2(V_perp^H F V_perp) tan^2 Theta(U, V)`` with
      ``psi`` the smallest Ritz value in ``F U + V``;
    * spread form: ``|Lam(V^H A V) - Lam(W^H A W)| / (zeta - |...|)`` is weakly
      majorized by the same right-hand side, ``zeta`` being the spread of the
      Ritz values in ``F U + V``. Intermediate links:
      ``zeta^{-1} |...| ≺_w sin^2 Theta(F U, V)`` and the transformed
      tuple ``≺_w tan^2 Theta(F U, V)``.
    """
    lam, span = _hermitian(spec)
    vals = f.on(spec) if isinstance(f, FilterSpec) else np.asarray(f)
    u = utilde.basis if isinstance(utilde, Subspace) else as_matrix(utilde)
    n, t = u.shape
    top_form = v is None
    rows = np.arange(t) if top_form else _as_index_set(v).zero_based
    if rows.size != t:
        raise DimensionError(f"dim V = {rows.size} must equal dim U = {t}")
    if t > n - t:
        raise DimensionError("need dim U <= n - dim U")
    other = _others(n, rows)
    cu = spec.coords(u)
    fv = np.abs(vals[rows])
    if fv.min() == 0.0:
        raise RankDeficiencyError("V^H F V is singular", ratio=0.0)
    factor = np.sort(1.0 / fv)[::-1] * np.sort(np.abs(vals[other]))[::-1][:t]
    before = tangents_from_blocks(cu[rows], cu[other]).values
    rhs = (factor * before) ** 2
    try:
        w = orthonormalize(vals[:, None] * cu)
    except RankDeficiencyError as exc:
        return BoundReport("ritz_abstract", False, [], {}, [f"filtered block lost rank: {exc}"])
    h = adjoint(w) @ (lam[:, None] * w)
    psi = hermitian_eig(0.5 * (h + adjoint(h)))[0].values
    # F U + V: W plus the coordinate vectors of V, re-orthonormalized
    ext = np.zeros((n, rows.size), dtype=complex)
    ext[rows, np.arange(rows.size)] = 1.0
    joint = np.hstack([w, ext - w @ (adjoint(w) @ ext)])
    res = svd(joint)
    keep = res.singulars.values > RITZ_SPAN_TOL * res.singulars.values[0]
    zq = res.left[:, keep]
    hz = adjoint(zq) @ (lam[:, None] * zq)
    mu = hermitian_eig(0.5 * (hz + adjoint(hz)))[0].values
    psi_min, zeta = float(mu[-1]), float(mu[0] - mu[-1])
    tan_fuv = tangents_from_blocks(w[rows], w[other]).values
    sin2 = tan_fuv ** 2 / (1.0 + tan_fuv ** 2)
    lam_v = np.sort(lam[rows])[::-1]
    gap = np.abs(lam_v - psi)
    tfloor = _tan_floor(n, rhs, tan_fuv ** 2)
    checks = []
    flags = []
    if top_form:
        ratio, den, tiny = _ratios(lam[:t], psi, psi_min, span)
        if tiny:
            flags.append("Ritz denominator below floor; ratio set to inf")
        floor = _ratio_floor(n, np.abs(lam).max(), den, ratio) + tfloor
        checks.append(_make("bound", ratio, rhs, "weak", floor, tol))
    spread_den = zeta - gap
    small = spread_den < DENOM_FLOOR * span
    spread_ratio = np.where(small, np.inf, gap / np.where(small, 1.0, spread_den))
    if small.any():
        flags.append("spread denominator below floor; ratio set to inf")
    sfloor = _ratio_floor(n, np.abs(lam).max(), spread_den, spread_ratio) + tfloor
    checks.append(_make("spread_bound", spread_ratio, rhs, "weak", sfloor, tol))
    checks.append(_make("spread_by_sines", gap / zeta if zeta > 0 else gap * np.inf,
                        sin2, "weak", sfloor, tol))
    checks.append(_make("spread_by_tangents", spread_ratio, tan_fuv ** 2, "weak", sfloor, tol))
    checks.append(_make("abstract_angles", tan_fuv ** 2, rhs, "weak", tfloor, tol))
    meta = {"ritz": psi, "smallest_ritz": psi_min, "spread": zeta, "factor": factor}
    return BoundReport("ritz_abstract", True, checks, meta, flags)


# block Lanczos --------------------------------------------------------------


def _krylov_state(spec, ctx, k, krylov):
    kr = krylov if krylov is not None else BlockKrylov(spec, ctx.basis)
    kr.build(k)
    q = spec.coords(kr.basis(k))
    return kr, q


def _krylov_ritz(spec, ctx, kr, k, q):
    """Top ``p`` Ritz values in the Krylov basis, cached on the context."""
    key = (id(kr), k)
    if key not in ctx._krylov_ritz:
        if q.shape[1] < ctx.p:
            raise DimensionError("Krylov subspace is smaller than the target")
        ctx._krylov_ritz[key] = _ritz(spec, q, want=ctx.p)
    return ctx._krylov_ritz[key]


def _ritz_interval(spec, q, p):
    """``(mu_min, mu_(p+1))``: extreme Ritz values of ``A`` in ``(X + K)`` orthogonal to ``X``.

    Since ``X`` is invariant, the compression of ``A`` to ``X + K`` is
    block diagonal and its eigenvalues outside the target are those of
    the compression onto the part of ``K`` orthogonal to ``X``. Returns
    None when that part is empty or degenerate.
    """
    r = q.copy()
    r[:p] = 0.0
    if r.shape[1] == 0:
        return None
    res = svd(r)
    s = res.singulars.values
    if s[0] == 0.0:
        return None
    z = res.left[:, s > RITZ_SPAN_TOL]
    h = adjoint(z) @ (spec.lam[:, None] * z)
    mu = hermitian_eig(0.5 * (h + adjoint(h)))[0].values
    if not mu[0] > mu[-1]:
        return None
    return float(mu[-1]), float(mu[0])


def _cheby_factors(spec, ctx, k, q, cheby_params):
    p = ctx.p
    if cheby_params == "eigen":
        return convergence_factors(spec, k, p), False
    if cheby_params != "ritz":
        raise ValueError(f"unknown cheby_params {cheby_params!r}")
    iv = _ritz_interval(spec, q, p)
    if iv is None:
        return convergence_factors(spec, k, p), True
    return convergence_factors(spec, k, p, lam_p1=iv[1], lam_n=iv[0]), False


def bound_lanczos_angles(spec, ytilde, k, tau, cheby_params="eigen", krylov=None, tol=DEFAULT_TOL):
    """Block Lanczos: ``tan Theta(X_tau, K) ≺_w [sigma_(i_t), ..., sigma_(i_1)] tan Theta(X_tau, Y_tau)``.

    Further checks: the eliminated right-hand side, the subtuple inequality
    and ``tan Theta(X_tau, K) <= tan Theta(X_tau, f(A) Y)`` for the Chebyshev
    filter ``f`` behind the factors. ``cheby_params='ritz'`` replaces
    ``lam_(p+1)`` and ``lam_n`` by Ritz values of ``A`` in ``X + K``.
    """
    ctx = _context(spec, ytilde)
    p, n = ctx.p, ctx.n
    tau = _as_index_set(tau).check_within(p)
    kr, q = _krylov_state(spec, ctx, k, krylov)
    cf, fell_back = _cheby_factors(spec, ctx, k, q, cheby_params)
    rows = tau.zero_based
    measured = tan_to_span(q, rows).values
    sig = cf.sigma_of(tau).values
    aux = ctx.tan_aux(tau).values
    lead = ctx.tan_lead(tau.t).values
    f = make_shifted_chebyshev(cf.lam_p1, cf.lam_n, k)
    meta = {"sigma": sig, "k": k, "tau": tau, "interval": (cf.lam_n, cf.lam_p1),
            "krylov_dim": q.shape[1]}
    floor = _tan_floor(n, measured, sig * lead)
    checks = [
        _make("bound", measured, sig * aux, "weak", floor, tol),
        _make("eliminated", measured, sig * lead, "weak", floor, tol),
        _make("subtuple", aux, lead, "tuple", _tan_floor(n, lead), tol),
    ]
    try:
        _, qf = ctx.filtered(f)
        cheb = tan_to_span(qf, rows).values
        checks.append(_make("chebyshev_inclusion", measured, cheb, "tuple", _tan_floor(n, cheb), tol))
        meta["chebyshev"] = cheb
    except (RankDeficiencyError, RightAngleError):
        pass
    flags = ["Ritz interval degenerate; eigenvalue parameters used"] if fell_back else []
    return BoundReport("lanczos_angles", True, checks, meta, flags)


def bound_lanczos_ritz(spec, ytilde, k, i, denominator="psi", cheby_params="eigen",
                       krylov=None, tol=DEFAULT_TOL):
    """Block Lanczos Ritz values ``psi_j`` in ``K``: ``eps ≺_w [sigma_i^2, ..., sigma_1^2] tan^2 Theta(X_i, Y_i)``.

    ``eps_j = (lam_j - psi_j) / (psi_j - base)`` for ``j <= i``, ``base`` being
    ``lam_n`` (or the smallest Ritz value in ``X + K`` with Ritz parameters).
    ``denominator='lam1'`` uses ``lam_1 - lam_n`` instead, a weaker
    measured side. Further checks: the eliminated right-hand side and the
    Courant-Fischer ordering ``lam_j >= psi_j >= eta'_j`` against the
    Chebyshev-filtered subspace.
    """
    ctx = _context(spec, ytilde)
    p, n = ctx.p, ctx.n
    lam, span = _hermitian(spec)
    i = int(i)
    tau = IndexSet.first(i).check_within(p)
    kr, q = _krylov_state(spec, ctx, k, krylov)
    psi = _krylov_ritz(spec, ctx, kr, k, q)
    cf, fell_back = _cheby_factors(spec, ctx, k, q, cheby_params)
    base = cf.lam_n if cheby_params == "ritz" else lam[-1]
    if denominator == "psi":
        eps_j, den, tiny = _ratios(lam[:i], psi[:i], base, span)
    elif denominator == "lam1":
        den = np.full(i, lam[0] - lam[-1])
        eps_j, tiny = (lam[:i] - psi[:i]) / den, False
    else:
        raise ValueError(f"unknown denominator {denominator!r}")
    sig2 = cf.sigma_of(tau).values ** 2
    aux = ctx.tan_aux(tau).values
    lead = ctx.tan_lead(i).values
    floor = _ratio_floor(n, np.abs(lam).max(), den, eps_j) + _tan_floor(n, sig2 * lead ** 2)
    checks = [
        _make("bound", eps_j, sig2 * aux ** 2, "weak", floor, tol),
        _make("eliminated", eps_j, sig2 * lead ** 2, "weak", floor, tol),
    ]
    rfloor = NOISE * EPS * np.sqrt(n) * np.abs(lam).max()
    checks.append(_make("ritz_below_eigen", psi, lam[:p], "index", rfloor, tol))
    f = make_shifted_chebyshev(cf.lam_p1, cf.lam_n, k)
    try:
        _, qf = ctx.filtered(f)
        eta = _ritz(spec, qf)
        checks.append(_make("chebyshev_below_ritz", eta, psi, "index", rfloor, tol))
    except (RankDeficiencyError, RightAngleError):
        eta = None
    flags = []
    if tiny:
        flags.append("Ritz denominator below floor; ratio set to inf")
    if fell_back:
        flags.append("Ritz interval degenerate; eigenvalue parameters used")
    meta = {"sigma2": sig2, "ritz": psi, "chebyshev_ritz": eta, "k": k, "i": i,
            "interval": (cf.lam_n, cf.lam_p1)}
    return BoundReport("lanczos_ritz", True, checks, meta, flags)


def bound_lz_angles(spec, ytilde, k, tau, krylov=None, tol=DEFAULT_TOL):
    """Comparison bound with the scalar factor: ``sum_{j<=l} tan theta_j(X_tau, K) <= sigma_(i_t) sum_{j<=l} tan theta_j(X_tau, Y_tau)``."""
    ctx = _context(spec, ytilde)
    p, n = ctx.p, ctx.n
    tau = _as_index_set(tau).check_within(p)
    kr, q = _krylov_state(spec, ctx, k, krylov)
    cf = convergence_factors(spec, k, p)
    s_last = float(cf.sigma[tau.last - 1])
    measured = tan_to_span(q, tau.zero_based).values
    aux = ctx.tan_aux(tau).values
    lead = ctx.tan_lead(tau.t).values
    floor = _tan_floor(n, measured, s_last * lead)
    checks = [
        _make("bound", measured, s_last * aux, "weak", floor, tol),
        _make("eliminated", measured, s_last * lead, "weak", floor, tol),
    ]
    return BoundReport("lz_angles", True, checks, {"sigma": s_last, "k": k, "tau": tau})


def bound_lz_ritz(spec, ytilde, k, i, krylov=None, tol=DEFAULT_TOL):
    """Comparison bound: ``sum_{j<=l} (lam_j - psi_j) / (lam_1 - lam_n) <= sigma_i^2 sum_{j<=l} tan^2 theta_j(X_i, Y_i)``."""
    ctx = _context(spec, ytilde)
    p, n = ctx.p, ctx.n
    lam, span = _hermitian(spec)
    i = int(i)
    tau = IndexSet.first(i).check_within(p)
    kr, q = _krylov_state(spec, ctx, k, krylov)
    psi = _krylov_ritz(spec, ctx, kr, k, q)
    cf = convergence_factors(spec, k, p)
    s2 = float(cf.sigma[i - 1]) ** 2
    eps_j = (lam[:i] - psi[:i]) / span
    aux = ctx.tan_aux(tau).values
    lead = ctx.tan_lead(i).values
    floor = _ratio_floor(n, np.abs(lam).max(), np.full(i, span), eps_j) + _tan_floor(n, s2 * lead ** 2)
    checks = [
        _make("bound", eps_j, s2 * aux ** 2, "weak", floor, tol),
        _make("eliminated", eps_j, s2 * lead ** 2, "weak", floor, tol),
    ]
    return BoundReport("lz_ritz", True, checks, {"sigma2": s2, "ritz": psi, "k": k, "i": i})


__all__ = [
    "BoundContext",
    "BoundReport",
    "Check",
    "IndexSet",
    "bound_abstract_filter",
    "bound_chebyshev_ritz",
    "bound_chebyshev_tangent",
    "bound_filtered_tangent",
    "bound_lanczos_angles",
    "bound_lanczos_ritz",
    "bound_lz_angles",
    "bound_lz_ritz",
    "bound_multiangle_major",
    "bound_power_tangent",
    "bound_ritz_abstract",
    "bound_ritz_major",
    "bound_stationary_major",
    "tan_between_spans",
    "tan_to_span",
    "verify_report",
]
