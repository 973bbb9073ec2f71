"""Monte Carlo comparison of block Lanczos bounds on diagonal test matrices.

For every random initial subspace and every number of blocks ``k`` the
harness builds the block Krylov subspace and the Chebyshev-filtered
subspace, measures angles and Ritz errors, evaluates the new bounds and the
comparison bounds with a scalar factor, and aggregates over samples.

Two panels are produced. The angle panel tracks
``sum_j tan theta_j(X_tau, .)``; the Ritz panel tracks
``sum_{j<=i} (lam_j - psi_j) / (lam_1 - lam_n)`` with bound curves capped
at the trivial value ``i``.
"""

import io
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import bounds
from .eigensolvers import BlockKrylov
from .errors import ClusterBoundError, ConfigError
from .linalg import orthonormalize
from .rng import SampleStream
from .spectrum import Spectrum
from .subspaces import IndexSet

log = logging.getLogger(__name__)

ANGLE_COLUMNS = ("k", "lanczos_mean", "chebyshev_mean", "bound_new_mean", "bound_lz_mean", "violations")
RITZ_COLUMNS = ("k", "ritz_lanczos_mean", "ritz_chebyshev_mean", "ritz_bound_new_mean",
                "ritz_bound_lz_mean", "violations")

PRESETS = {
    "example1": {"n": 900, "p": 3, "tau": IndexSet((1, 2, 3)), "i": 3},
    "example2": {"n": 3600, "p": 9, "tau": IndexSet(tuple(range(3, 9))), "i": 8},
}


def build_example_spectrum(which):
    """Diagonal test matrix of the named example, target size set."""
    if which == "example1":
        n, top = 900, [2.0, 1.6, 1.4]
    elif which == "example2":
        n, top = 3600, [2.05, 2.0, 1.95, 1.65, 1.6, 1.55, 1.45, 1.4, 1.35]
    else:
        raise ConfigError(f"unknown example {which!r}")
    p = len(top)
    j = np.arange(p + 1, n + 1)
    lam = np.concatenate([top, 1.0 - (j - p) / n])
    return Spectrum(lam, None, hermitian=True, p=p)


def sample_initial_subspace(n, p, stream, max_tries=10):
    """``[orth(randn(p, p)); randn(n - p, p)]`` from a :class:`SampleStream`.

    Returns ``(basis, resamples)``; a rank-deficient top block (a
    probability-zero event) is redrawn from the same stream.
    """
    if not 1 <= p < n:
        raise ConfigError(f"need 1 <= p < n, got p={p}, n={n}")
    for attempt in range(max_tries):
        top = stream.normal((p, p))
        bottom = stream.normal((n - p, p))
        try:
            q = orthonormalize(top)
        except ClusterBoundError:
            continue
        return np.vstack([q.real, bottom]), attempt
    raise ArithmeticError("could not draw a full-rank initial block")


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings of one run; see :data:`PRESETS` for the two examples."""

    example: str
    n: int
    p: int
    tau: IndexSet
    i: int
    k_max: int = 15
    samples: int = 1000
    seed: int = 0
    aggregation: str = "mean"
    rhs: str = "auxiliary"
    ritz_denominator: str = "lam1"
    cheby_params: str = "eigen"
    cap: bool = True
    tol: float = bounds.DEFAULT_TOL
    workers: int = 1
    eigenvalues: tuple = None
    out: str = None
    fmt: str = "csv"

    def __post_init__(self):
        if self.example in PRESETS:
            for key, val in PRESETS[self.example].items():
                if key in ("n", "p") and getattr(self, key) != val:
                    raise ConfigError(f"{self.example} requires {key}={val}")
        elif self.example != "custom":
            raise ConfigError(f"unknown example {self.example!r}")
        if self.samples < 1 or self.k_max < 1:
            raise ConfigError("samples and k_max must be at least 1")
        if not 1 <= self.p < self.n:
            raise ConfigError(f"need 1 <= p < n, got p={self.p}, n={self.n}")
        if not isinstance(self.tau, IndexSet):
            raise ConfigError("tau must be an IndexSet")
        if self.tau.last > self.p:
            raise ConfigError(f"tau {self.tau} exceeds p={self.p}")
        if not 1 <= self.i <= self.p:
            raise ConfigError(f"i={self.i} outside 1..{self.p}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        choices = {
            "aggregation": ("mean", "max"),
            "rhs": ("auxiliary", "eliminated"),
            "ritz_denominator": ("lam1", "psi"),
            "cheby_params": ("eigen", "ritz"),
            "fmt": ("csv", "json"),
        }
        for key, allowed in choices.items():
            if getattr(self, key) not in allowed:
                raise ConfigError(f"{key} must be one of {allowed}, got {getattr(self, key)!r}")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if not self.tol >= 0:
            raise ConfigError("tol must be nonnegative")
        if self.example == "custom":
            if self.eigenvalues is None or len(self.eigenvalues) != self.n:
                raise ConfigError("custom experiments need n eigenvalues")

    @classmethod
    def preset(cls, example, **overrides):
        if example not in PRESETS:
            raise ConfigError(f"unknown example {example!r}")
        return cls(example=example, **{**PRESETS[example], **overrides})

    @property
    def capped(self):
        # the trivial bound i only holds with the lam_1 - lam_n denominator
        return self.cap and self.ritz_denominator == "lam1"

    def spectrum(self):
        if self.example == "custom":
            try:
                return Spectrum(np.asarray(self.eigenvalues, dtype=float), None, p=self.p)
            except ClusterBoundError as exc:
                raise ConfigError(str(exc)) from exc
        return build_example_spectrum(self.example)


@dataclass(frozen=True)
class ExperimentRow:
    """One aggregated row of a panel."""

    k: int
    measure_mean: float
    chebyshev_mean: float
    bound_new_mean: float
    bound_lz_mean: float
    violations: int

    def values(self):
        return (self.k, self.measure_mean, self.chebyshev_mean, self.bound_new_mean,
                self.bound_lz_mean, self.violations)


# per-sample quantities, one column per k
_ANGLE_KEYS = ("lanczos", "chebyshev", "new", "lz")
_RITZ_KEYS = ("ritz_lanczos", "ritz_chebyshev", "ritz_new", "ritz_lz")


@dataclass
class SampleResult:
    index: int
    values: dict
    violations: np.ndarray
    resamples: int = 0
    error: str = None
    failed_reports: list = field(default_factory=list)


@dataclass
class ExperimentResult:
    """Both panels plus the per-sample arrays they were aggregated from.

    ``raw`` maps a quantity name to a ``samples x k_max`` array; the Ritz
    bound arrays there are uncapped.
    """

    config: ExperimentConfig
    angle_rows: list
    ritz_rows: list
    raw: dict
    failed_samples: list
    failed_reports: list

    @property
    def total_violations(self):
        return int(sum(r.violations for r in self.angle_rows) + sum(r.violations for r in self.ritz_rows))


def run_sample(cfg, spec, index):
    """All measurements and bounds for one initial subspace."""
    stream = SampleStream(cfg.seed, index)
    y, resamples = sample_initial_subspace(cfg.n, cfg.p, stream)
    out = {key: np.full(cfg.k_max, np.nan) for key in _ANGLE_KEYS + _RITZ_KEYS}
    viol = np.zeros((2, cfg.k_max), dtype=int)
    failed = []
    lam = spec.lam
    span = lam[0] - lam[-1]
    try:
        ctx = bounds.BoundContext(spec, y)
        kr = BlockKrylov(spec, y)
        rhs = "bound" if cfg.rhs == "auxiliary" else "eliminated"
        for k in range(1, cfg.k_max + 1):
            col = k - 1
            la = bounds.bound_lanczos_angles(spec, ctx, k, cfg.tau, cfg.cheby_params, kr, cfg.tol)
            lz = bounds.bound_lz_angles(spec, ctx, k, cfg.tau, kr, cfg.tol)
            lr = bounds.bound_lanczos_ritz(spec, ctx, k, cfg.i, cfg.ritz_denominator,
                                           cfg.cheby_params, kr, cfg.tol)
            lzr = bounds.bound_lz_ritz(spec, ctx, k, cfg.i, kr, cfg.tol)
            out["lanczos"][col] = la.main.lhs.sum()
            out["chebyshev"][col] = la.metadata["chebyshev"].sum()
            out["new"][col] = la.check(rhs).rhs.sum()
            out["lz"][col] = lz.check(rhs).rhs.sum()
            out["ritz_lanczos"][col] = lr.main.lhs.sum()
            eta = lr.metadata["chebyshev_ritz"][: cfg.i]
            if cfg.ritz_denominator == "lam1":
                out["ritz_chebyshev"][col] = np.sum((lam[: cfg.i] - eta) / span)
            else:
                base = lr.metadata["interval"][0] if cfg.cheby_params == "ritz" else lam[-1]
                out["ritz_chebyshev"][col] = np.sum((lam[: cfg.i] - eta) / (eta - base))
            out["ritz_new"][col] = lr.check(rhs).rhs.sum()
            out["ritz_lz"][col] = lzr.check(rhs).rhs.sum()
            for panel, reports in ((0, (la, lz)), (1, (lr, lzr))):
                bad = [r for r in reports if r.violated]
                if bad:
                    viol[panel, col] = 1
                    failed.extend((index, k, r) for r in bad)
    except (ClusterBoundError, ArithmeticError) as exc:
        log.warning("sample %d aborted: %s", index, exc)
        return SampleResult(index, out, viol, resamples, error=str(exc), failed_reports=failed)
    return SampleResult(index, out, viol, resamples, failed_reports=failed)


def _aggregate(arr, how):
    ok = arr[~np.isnan(arr).any(axis=1)]
    if ok.shape[0] == 0:
        return np.full(arr.shape[1], np.nan)
    return ok.mean(axis=0) if how == "mean" else ok.max(axis=0)


def run_experiment(cfg, progress=None):
    """Run all samples (concurrently when ``cfg.workers > 1``) and aggregate in sample order."""
    spec = cfg.spectrum()
    spec.set_target(cfg.p)

    def task(index):
        res = run_sample(cfg, spec, index)
        if progress is not None:
            progress(index)
        return res

    if cfg.workers == 1:
        results = [task(s) for s in range(cfg.samples)]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(task, range(cfg.samples)))
    results.sort(key=lambda r: r.index)
    raw = {key: np.vstack([r.values[key] for r in results]) for key in _ANGLE_KEYS + _RITZ_KEYS}
    viol = np.sum([r.violations for r in results], axis=0)
    capped = {}
    for key in ("ritz_new", "ritz_lz"):
        capped[key] = np.minimum(raw[key], cfg.i) if cfg.capped else raw[key]
    agg = {key: _aggregate(raw[key], cfg.aggregation) for key in _ANGLE_KEYS + ("ritz_lanczos", "ritz_chebyshev")}
    agg.update({key: _aggregate(capped[key], cfg.aggregation) for key in capped})
    angle_rows, ritz_rows = [], []
    for col in range(cfg.k_max):
        angle_rows.append(ExperimentRow(col + 1, float(agg["lanczos"][col]), float(agg["chebyshev"][col]),
                                        float(agg["new"][col]), float(agg["lz"][col]), int(viol[0, col])))
        ritz_rows.append(ExperimentRow(col + 1, float(agg["ritz_lanczos"][col]),
                                       float(agg["ritz_chebyshev"][col]), float(agg["ritz_new"][col]),
                                       float(agg["ritz_lz"][col]), int(viol[1, col])))
    failed = [(r.index, r.error) for r in results if r.error is not None]
    reports = [rep for r in results for rep in r.failed_reports]
    return ExperimentResult(cfg, angle_rows, ritz_rows, raw, failed, reports)


# output ---------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % v


def format_rows(rows, panel="angle", fmt="csv"):
    """Text of a panel as CSV (17 significant digits) or JSON."""
    columns = ANGLE_COLUMNS if panel == "angle" else RITZ_COLUMNS
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(",".join(columns) + "\n")
        for r in rows:
            buf.write(",".join(_fmt(v) for v in r.values()) + "\n")
        return buf.getvalue()
    if fmt == "json":
        data = [dict(zip(columns, r.values())) for r in rows]
        for d in data:
            for key, val in d.items():
                if isinstance(val, float) and not math.isfinite(val):
                    d[key] = None
        return json.dumps({"panel": panel, "columns": list(columns), "rows": data}, indent=1) + "\n"
    raise ConfigError(f"unknown format {fmt!r}")


def ritz_path(path):
    """Where the Ritz panel goes next to ``path``: ``out.csv`` becomes ``out_ritz.csv``."""
    stem, dot, ext = path.rpartition(".")
    if not dot or "/" in ext:
        return path + "_ritz"
    return f"{stem}_ritz.{ext}"


def emit(rows, fmt, path, panel="angle"):
    """Write one panel to ``path``."""
    with open(path, "w", newline="") as fh:
        fh.write(format_rows(rows, panel, fmt))


def parse_csv(text):
    """Rows of an emitted CSV back as tuples of ``int``/``float``."""
    lines = text.strip().splitlines()
    header = tuple(lines[0].split(","))
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        rows.append((int(parts[0]),) + tuple(float(x) for x in parts[1:-1]) + (int(parts[-1]),))
    return header, rows


# custom configuration files -------------------------------------------------


def _parse_eigenvalues(text, n, top):
    text = text.strip()
    if text.startswith("formula:"):
        spec = text[len("formula:"):].split(",")
        if spec[0].strip() != "linear" or len(spec) != 3:
            raise ConfigError("formula must read 'formula:linear,a,b'")
        a, b = float(spec[1]), float(spec[2])
        lam = np.linspace(a, b, n) if n > 1 else np.array([a])
    else:
        lam = np.array([float(v) for v in text.replace(";", ",").split(",") if v.strip()])
    if top is not None:
        lam = np.concatenate([top, lam[: n - top.size]])
    if lam.size != n:
        raise ConfigError(f"got {lam.size} eigenvalues for n={n}")
    return tuple(lam.tolist())


def load_custom_config(path, **overrides):
    """Read a ``key = value`` file into an :class:`ExperimentConfig`.

    Keys: ``n``, ``p``, ``eigenvalues`` (comma list or
    ``formula:linear,a,b`` for ``n`` equally spaced values from ``a`` to
    ``b``), optional ``top`` (comma list replacing the leading values),
    ``tau``, ``i`` and ``k_max``. ``#`` starts a comment.
    """
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    kv = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        kv[key] = val
    known = {"n", "p", "eigenvalues", "top", "tau", "i", "k_max"}
    unknown = set(kv) - known
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}")
    for key in ("n", "p", "eigenvalues"):
        if key not in kv:
            raise ConfigError(f"missing key {key!r}")
    try:
        n, p = int(kv["n"]), int(kv["p"])
        top = np.array([float(v) for v in kv["top"].split(",")]) if "top" in kv else None
        lam = _parse_eigenvalues(kv["eigenvalues"], n, top)
        tau = IndexSet.parse(kv["tau"]) if "tau" in kv else IndexSet.first(p)
        fields = {"n": n, "p": p, "eigenvalues": lam, "tau": tau,
                  "i": int(kv.get("i", p))}
        if "k_max" in kv:
            fields["k_max"] = int(kv["k_max"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    fields.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(example="custom", **fields)


def with_overrides(cfg, **kw):
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})


__all__ = [
    "ANGLE_COLUMNS",
    "ExperimentConfig",
    "ExperimentResult",
    "ExperimentRow",
    "RITZ_COLUMNS",
    "build_example_spectrum",
    "emit",
    "format_rows",
    "load_custom_config",
    "parse_csv",
    "ritz_path",
    "run_experiment",
    "run_sample",
    "sample_initial_subspace",
]
