"""Acceptance gate: one test per criterion, each recording a PASS/FAIL line.

The lines are printed inline (visible with ``-s``) and again in the
terminal summary of every run.
"""
import pickle
import subprocess
import sys
import tempfile
import time

import numpy as np
import pytest

from clusterbound import bounds as B
from clusterbound.eigensolvers import (
    Pencil,
    block_krylov_basis,
    chebyshev_block_step,
    rayleigh_ritz,
    shift_invert_operator,
)
from clusterbound.experiments import ExperimentConfig, run_experiment
from clusterbound.filters import apply_filter, make_shifted_chebyshev
from clusterbound.linalg import adjoint, complement, orthonormalize
from clusterbound.majorization import product_majorization_check
from clusterbound.spectrum import Spectrum, random_unitary
from clusterbound.subspaces import (
    IndexSet,
    biorthogonal_basis,
    principal_angles_cosine,
    principal_angles_tangent,
)

from conftest import admissible_filter, rand_complex, random_instance, record_criterion

TOL = 1e-8


def random_tau(rng, p):
    size = int(rng.integers(1, p + 1))
    return IndexSet(tuple(sorted(int(j) for j in rng.choice(np.arange(1, p + 1), size, replace=False))))


def all_reports(rng, spec, y):
    """Every evaluator on one instance; returns ``(name, report)`` pairs."""
    lam, p, n = spec.lam, spec.p, spec.n
    k = int(rng.integers(1, 9))
    cheb = make_shifted_chebyshev(lam[p], lam[-1], k)
    g = admissible_filter(rng, spec)
    tau = random_tau(rng, p)
    i = int(rng.integers(1, p + 1))
    out = [
        ("filtered_tangent/cheb", B.bound_filtered_tangent(spec, cheb, y)),
        ("filtered_tangent/poly", B.bound_filtered_tangent(spec, g, y)),
        ("chebyshev_tangent", B.bound_chebyshev_tangent(spec, k, y)),
        ("chebyshev_ritz/k", B.bound_chebyshev_ritz(spec, k, y)),
        ("chebyshev_ritz/poly", B.bound_chebyshev_ritz(spec, g, y)),
        ("stationary_major", B.bound_stationary_major(spec, k, y)),
        ("multiangle/cheb", B.bound_multiangle_major(spec, cheb, tau, y)),
        ("multiangle/poly", B.bound_multiangle_major(spec, g, tau, y)),
        ("ritz_major/cheb", B.bound_ritz_major(spec, cheb, i, y)),
        ("ritz_major/poly", B.bound_ritz_major(spec, g, i, y)),
        ("lanczos_angles/eigen", B.bound_lanczos_angles(spec, y, k, tau)),
        ("lanczos_angles/ritz", B.bound_lanczos_angles(spec, y, k, tau, cheby_params="ritz")),
        ("lanczos_ritz/psi", B.bound_lanczos_ritz(spec, y, k, i)),
        ("lanczos_ritz/lam1", B.bound_lanczos_ritz(spec, y, k, i, denominator="lam1")),
        ("lanczos_ritz/ritz", B.bound_lanczos_ritz(spec, y, k, i, cheby_params="ritz")),
        ("lz_angles", B.bound_lz_angles(spec, y, k, tau)),
        ("lz_ritz", B.bound_lz_ritz(spec, y, k, i)),
    ]
    t = int(rng.integers(1, n // 2 + 1))
    u = rand_complex(rng, n, t)
    v = sorted(int(j) for j in rng.choice(np.arange(1, n + 1), t, replace=False))
    out.append(("ritz_abstract/top", B.bound_ritz_abstract(spec, g, u)))
    out.append(("ritz_abstract/v", B.bound_ritz_abstract(spec, g, u, v=v)))
    s = int(rng.integers(1, t + 1))
    out.append(("abstract_filter/index", B.bound_abstract_filter(spec, g, u[:, :s], v)))
    if spec.eigenvectors is not None:
        basis = spec.eigenvectors[:, np.asarray(v) - 1]
        out.append(("abstract_filter/basis", B.bound_abstract_filter(spec, g, u[:, :s], basis)))
    # power iteration needs a modulus gap; a positive shift of the spectrum provides one
    pos = Spectrum(lam - lam[-1] + 0.1, spec.eigenvectors, p=p)
    out.append(("power_tangent", B.bound_power_tangent(pos, y, int(rng.integers(1, 6)))))
    return out


def test_criterion_1_random_instances():
    rng = np.random.default_rng(1001)
    start = time.perf_counter()
    violations, applicable, total = [], 0, 0
    for trial in range(500):
        spec, y = random_instance(rng, n_range=(8, 81), p_max=6)
        state = rng.bit_generator.state
        for name, rep in all_reports(rng, spec, y):
            total += 1
            applicable += rep.applicable
            if rep.applicable and (rep.violated or not B.verify_report(rep, tol=TOL).holds):
                violations.append((trial, name, rep.summary(), spec.lam, spec.eigenvectors, y, state))
    elapsed = time.perf_counter() - start
    detail = f"{total} reports ({applicable} applicable), {len(violations)} violations, {elapsed:.1f}s"
    if violations:
        dump = tempfile.NamedTemporaryFile(prefix="counterexamples_", suffix=".pkl", delete=False)
        with dump:
            pickle.dump(violations, dump)
        detail += f"; inputs dumped to {dump.name}; first: trial {violations[0][0]} {violations[0][1]}"
    ok = record_criterion(1, not violations and elapsed < 180, detail)
    assert ok, detail + ("\n" + violations[0][2] if violations else "")


def check_example(result, number, limit, elapsed):
    """Shared checks for the two reference experiments."""
    problems = []
    if result.total_violations:
        problems.append(f"{result.total_violations} violations")
    if result.failed_samples:
        problems.append(f"failed samples {result.failed_samples}")
    for panel, rows in (("angle", result.angle_rows), ("ritz", result.ritz_rows)):
        for r in rows:
            if not r.bound_new_mean <= r.bound_lz_mean:
                problems.append(f"{panel} k={r.k}: new {r.bound_new_mean:.6g} > lz {r.bound_lz_mean:.6g}")
    # strictness on the uncapped means; the cap only clips both curves at i
    raw = result.raw
    for panel, new, lz in (("angle", "new", "lz"), ("ritz", "ritz_new", "ritz_lz")):
        mean_new, mean_lz = raw[new].mean(axis=0), raw[lz].mean(axis=0)
        for k in range(2, result.config.k_max + 1):
            if not mean_new[k - 1] < mean_lz[k - 1]:
                problems.append(f"{panel} k={k}: new not strictly below lz")
    lan = [r.measure_mean for r in result.angle_rows]
    if not all(b <= a for a, b in zip(lan, lan[1:])):
        problems.append("Lanczos mean not monotone")
    if elapsed >= limit:
        problems.append(f"took {elapsed:.0f}s (limit {limit}s)")
    cfg = result.config
    detail = (f"{cfg.example}, {cfg.samples} samples, k=1..{cfg.k_max}, {elapsed:.1f}s"
              + (": " + "; ".join(problems[:5]) if problems else ""))
    return record_criterion(number, not problems, detail), detail


def test_criterion_2_example1():
    start = time.perf_counter()
    result = run_experiment(ExperimentConfig.preset("example1", samples=200))
    ok, detail = check_example(result, 2, 300, time.perf_counter() - start)
    assert ok, detail


def test_criterion_3_example2():
    start = time.perf_counter()
    result = run_experiment(ExperimentConfig.preset("example2", samples=50, workers=4))
    ok, detail = check_example(result, 3, 600, time.perf_counter() - start)
    assert ok, detail


def test_criterion_4_oracle_equivalences():
    rng = np.random.default_rng(1004)
    problems = []
    # tangents from the complement route against tan(arccos) of the cosine route
    for _ in range(200):
        n = int(rng.integers(4, 101))
        t = int(rng.integers(1, n // 2 + 1))
        s = int(rng.integers(1, t + 1))
        v = orthonormalize(rand_complex(rng, n, t))
        ut = rand_complex(rng, n, s)
        tan = principal_angles_tangent(ut, v, complement(v)).values
        ref = principal_angles_cosine(ut, v).tangents.values
        if not np.allclose(tan, ref, rtol=TOL, atol=0):
            problems.append(f"tangent route differs at n={n}, t={t}, s={s}")
    # three-term Chebyshev recurrence against the filter evaluated on the spectrum
    for _ in range(40):
        spec, y = random_instance(rng, n_range=(8, 81), p_max=6, dense=True)
        k = int(rng.integers(1, 16))
        lam, p = spec.lam, spec.p
        z = chebyshev_block_step(spec, (lam[-1], lam[p]), k, y).basis
        ref = apply_filter(spec, make_shifted_chebyshev(lam[p], lam[-1], k), y).basis
        if np.linalg.norm(z - ref) > TOL * np.linalg.norm(ref):
            problems.append(f"Chebyshev step differs at n={spec.n}, k={k}")
    # product inequality on random square triples
    for _ in range(1000):
        m = int(rng.integers(1, 7))
        b1, b2, b3 = (rng.standard_normal((m, m)) for _ in range(3))
        t = int(rng.integers(1, m + 1))
        c = int(rng.integers(1, 3))
        if not product_majorization_check(b1, b2, b3, t, c, tol=1e-10).holds:
            problems.append(f"product check failed at m={m}, t={t}, c={c}")
    detail = "200 tangent pairs, 40 Chebyshev steps, 1000 product triples" + (
        ": " + "; ".join(problems[:5]) if problems else "")
    assert record_criterion(4, not problems, detail), detail


def random_pencil(rng, n):
    a = rng.standard_normal((n, n))
    b = rng.standard_normal((n, n))
    return a + a.T, b @ b.T + n * np.eye(n)


def test_criterion_5_exact_invariants():
    rng = np.random.default_rng(1005)
    worst = {"biorth": 0.0, "rr": 0.0, "krylov": 0.0, "shift_invert": 0.0}
    for _ in range(50):
        n = int(rng.integers(6, 60))
        p = int(rng.integers(1, min(6, n // 2) + 1))
        x = orthonormalize(rand_complex(rng, n, p))
        y = biorthogonal_basis(x, orthonormalize(rand_complex(rng, n, p)))
        worst["biorth"] = max(worst["biorth"], np.abs(adjoint(x) @ y - np.eye(p)).max())

        lam = np.sort(rng.uniform(-2, 2, n))[::-1]
        spec = Spectrum(lam, random_unitary(n, rng), p=p)
        r = rayleigh_ritz(spec, spec.target_basis())
        worst["rr"] = max(worst["rr"], np.abs(r.values.values - lam[:p]).max())

        kdim = -(-n // p) + 1
        q = block_krylov_basis(spec, rand_complex(rng, n, p), kdim).q
        worst["krylov"] = max(worst["krylov"], np.abs(rayleigh_ritz(spec, q).values.values - lam).max()
                              if q.shape[1] == n else np.inf)
    for _ in range(10):
        n = int(rng.integers(10, 201))
        l, s = random_pencil(rng, n)
        d, v = np.linalg.eigh(s)
        s_is = (v / np.sqrt(d)) @ v.T
        alpha = np.sort(np.linalg.eigvalsh(s_is @ l @ s_is))
        beta = 0.5 * (alpha[n // 2] + alpha[n // 2 - 1])
        op = shift_invert_operator(Pencil(l, s, beta))
        back = np.sort(op.transform.to_pencil(op.lam))
        worst["shift_invert"] = max(worst["shift_invert"], np.abs(back - alpha).max() / np.abs(alpha).max())
    limits = {"biorth": 1e-10, "rr": 1e-10, "krylov": 1e-9, "shift_invert": 1e-8}
    ok = all(worst[key] <= limits[key] for key in limits)
    detail = ", ".join(f"{key} {worst[key]:.1e} (<= {limits[key]:.0e})" for key in limits)
    assert record_criterion(5, ok, detail), detail


def test_criterion_6_scalar_reductions():
    rng = np.random.default_rng(1006)
    worst = 0.0

    def close(a, b):
        nonlocal worst
        a, b = np.atleast_1d(np.asarray(a, dtype=float)), np.atleast_1d(np.asarray(b, dtype=float))
        worst = max(worst, float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300))))

    for _ in range(50):
        spec, y = random_instance(rng, n_range=(8, 81), p_max=6)
        f = admissible_filter(rng, spec)
        p = spec.p
        k = int(rng.integers(1, 9))
        j = int(rng.integers(1, p + 1))
        # one angle of the multi-angle bound is the single-vector filtered bound
        multi = B.bound_multiangle_major(spec, f, IndexSet((j,)), y)
        single = B.bound_filtered_tangent(spec, f, y)
        close(multi.main.lhs[0], single.main.lhs[j - 1])
        close(multi.main.rhs[0], single.check("auxiliary").rhs[j - 1])
        # the first Ritz error of the majorization bound is the single-index bound
        rm = B.bound_ritz_major(spec, f, 1, y)
        cr = B.bound_chebyshev_ritz(spec, f, y)
        close(rm.main.lhs[0], cr.main.lhs[0])
        close(rm.main.rhs[0], cr.check("auxiliary").rhs[0])
        # block Lanczos with one index equals the Chebyshev tangent form and the older bound
        lan = B.bound_lanczos_angles(spec, y, k, IndexSet((p,)))
        cheb = B.bound_chebyshev_tangent(spec, k, y)
        close(lan.main.rhs[0], cheb.check("auxiliary").rhs[p - 1])
        close(lan.main.rhs, B.bound_lz_angles(spec, y, k, IndexSet((p,))).main.rhs)
        # same for the first Ritz value of block Lanczos
        cheb_ritz = B.bound_chebyshev_ritz(spec, k, y).check("auxiliary").rhs[0]
        close(B.bound_lanczos_ritz(spec, y, k, 1).main.rhs, cheb_ritz)
        close(B.bound_lz_ritz(spec, y, k, 1).main.rhs, cheb_ritz)
        # one wanted eigenvalue: majorization bounds collapse to the vector bounds
        one = spec.with_target(1)
        y1 = y[:, :1]
        sm = B.bound_stationary_major(one, k, y1)
        cr1 = B.bound_chebyshev_ritz(one, k, y1)
        close(sm.main.lhs, cr1.main.lhs)
        close(sm.main.rhs, cr1.main.rhs)
        f1 = admissible_filter(rng, one)
        af = B.bound_abstract_filter(one, f1, y1, [1])
        ft = B.bound_filtered_tangent(one, f1, y1)
        close(af.main.lhs, ft.main.lhs)
        close(af.main.rhs, ft.main.rhs)
        close(B.bound_ritz_abstract(one, f1, y1).main.rhs, B.bound_chebyshev_ritz(one, f1, y1).main.rhs)
    ok = worst <= 1e-12
    detail = f"50 instances, largest relative difference {worst:.1e} (<= 1e-12)"
    assert record_criterion(6, ok, detail), detail


def test_criterion_7_determinism(tmp_path):
    outputs = []
    for run, workers in enumerate(("1", "1", "4")):
        path = tmp_path / f"run{run}.csv"
        res = subprocess.run([sys.executable, "-m", "clusterbound", "experiment", "example1",
                              "--samples", "20", "--seed", "42", "--workers", workers,
                              "--out", str(path)], capture_output=True, text=True)
        assert res.returncode == 0, res.stderr
        ritz = tmp_path / f"run{run}_ritz.csv"
        outputs.append(path.read_bytes() + ritz.read_bytes())
    identical = all(o == outputs[0] for o in outputs)
    detail = f"3 runs (workers 1, 1, 4): {'byte-identical' if identical else 'outputs differ'}"
    assert record_criterion(7, identical, detail), detail


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-s", "-q"]))
