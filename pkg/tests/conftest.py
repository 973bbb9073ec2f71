import numpy as np
import pytest
from numpy.polynomial import polynomial as npoly

from clusterbound.filters import FilterSpec, filter_assumption
from clusterbound.spectrum import Spectrum, random_unitary


def random_instance(rng, n_range=(12, 60), p_max=5, dense=None, gap=0.5):
    """Random Hermitian spectrum with a clear gap after ``p`` plus a complex start."""
    n = int(rng.integers(*n_range))
    p = int(rng.integers(1, p_max + 1))
    lam = np.sort(rng.uniform(-1.0, 2.0, n))[::-1]
    lam[:p] += gap
    dense = bool(rng.integers(2)) if dense is None else dense
    x = random_unitary(n, rng) if dense else None
    spec = Spectrum(lam, x, p=p)
    y = rng.standard_normal((n, p)) + 1j * rng.standard_normal((n, p))
    return spec, y


def admissible_filter(rng, spec, max_degree=6):
    """Random real polynomial filter with ``max_{j>p} |f| < min_{j<=p} |f|``.

    Roots are drawn inside the unwanted part of the spectrum, which makes
    the filter small there; draws that still fail the condition are redrawn.
    """
    lam, p = spec.lam, spec.p
    for _ in range(200):
        deg = int(rng.integers(1, max_degree + 1))
        roots = rng.uniform(lam[-1], lam[p], deg)
        coef = npoly.polyfromroots(roots) * rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0)
        f = FilterSpec.polynomial(coef)
        if filter_assumption(f.on(spec), p):
            return f
    raise RuntimeError("no admissible filter found")


def rand_complex(rng, m, n):
    return rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


# one line per acceptance criterion, printed after the run whatever the capture mode
ACCEPTANCE_LINES = {}


def record_criterion(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
