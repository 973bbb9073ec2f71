"""Command-line entry point.

Subcommands:

``experiment``  aggregated bound comparison over random initial subspaces
``angles``      principal angles between two stored bases, by both routes
``bounds``      every bound evaluator on one random initial subspace
``lanczos``     Ritz values and target angles of block Lanczos per step

Exit status is 0 on success, 2 on configuration errors and 3 when a bound
is violated beyond tolerance.
"""

import argparse
import logging
import sys

import numpy as np

from . import bounds
from .eigensolvers import BlockKrylov, rayleigh_ritz
from .errors import ClusterBoundError, ConfigError
from .experiments import (
    ExperimentConfig,
    emit,
    format_rows,
    load_custom_config,
    ritz_path,
    run_experiment,
    sample_initial_subspace,
)
from .filters import make_shifted_chebyshev
from .rng import SampleStream
from .subspaces import IndexSet, Subspace, principal_angles_cosine, principal_angles_tangent

EXIT_OK, EXIT_CONFIG, EXIT_VIOLATION = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_CONFIG)


def _index_set(text):
    try:
        return IndexSet.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _seed(text):
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _add_problem_args(p):
    p.add_argument("example", choices=["example1", "example2", "custom"])
    p.add_argument("--config", help="key=value file for custom problems")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--tau", type=_index_set, help="target index set, e.g. 1,2,3 or 3..8")
    p.add_argument("--i", type=int, dest="i", help="number of leading Ritz values")
    p.add_argument("--kmax", type=int, dest="k_max", help="largest number of Krylov blocks")


def build_parser():
    parser = _Parser(prog="clusterbound", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ex = sub.add_parser("experiment", help="aggregated comparison of Lanczos bounds")
    _add_problem_args(ex)
    ex.add_argument("--samples", type=int)
    ex.add_argument("--agg", choices=["mean", "max"], default="mean")
    ex.add_argument("--out", help="angle panel path; the Ritz panel gets a _ritz suffix")
    ex.add_argument("--format", choices=["csv", "json"], default="csv", dest="fmt")
    ex.add_argument("--tol", type=float, default=bounds.DEFAULT_TOL)
    ex.add_argument("--ritz-denominator", choices=["lam1", "psi"], default="lam1")
    ex.add_argument("--cheby-params", choices=["eigen", "ritz"], default="eigen")
    ex.add_argument("--rhs", choices=["auxiliary", "eliminated"], default="auxiliary",
                    help="right-hand side plotted for both bound curves")
    ex.add_argument("--no-cap", action="store_true", help="do not cap Ritz bounds at i")
    ex.add_argument("--workers", type=int, default=1)

    an = sub.add_parser("angles", help="principal angles between two bases (.npy or text)")
    an.add_argument("u")
    an.add_argument("v")

    bd = sub.add_parser("bounds", help="evaluate every bound on one random start")
    _add_problem_args(bd)
    bd.add_argument("--k", type=int, default=5, help="Chebyshev degree plus one / Krylov blocks")
    bd.add_argument("--tol", type=float, default=bounds.DEFAULT_TOL)
    bd.add_argument("--sample", type=int, default=0, help="sample index within the seed")

    lz = sub.add_parser("lanczos", help="block Lanczos Ritz values per step")
    _add_problem_args(lz)
    lz.add_argument("--sample", type=int, default=0)
    return parser


def _config(args, **extra):
    base = {"seed": args.seed}
    for key in ("tau", "i", "k_max"):
        if getattr(args, key, None) is not None:
            base[key] = getattr(args, key)
    base.update({k: v for k, v in extra.items() if v is not None})
    if args.example == "custom":
        if not args.config:
            raise ConfigError("custom problems need --config FILE")
        return load_custom_config(args.config, **base)
    if args.config:
        raise ConfigError("--config only applies to custom problems")
    return ExperimentConfig.preset(args.example, **base)


def _cmd_experiment(args, out):
    cfg = _config(args, samples=args.samples, aggregation=args.agg, fmt=args.fmt, tol=args.tol,
                  ritz_denominator=args.ritz_denominator, cheby_params=args.cheby_params,
                  rhs=args.rhs, cap=not args.no_cap, workers=args.workers, out=args.out)
    result = run_experiment(cfg)
    if cfg.out:
        emit(result.angle_rows, cfg.fmt, cfg.out, "angle")
        emit(result.ritz_rows, cfg.fmt, ritz_path(cfg.out), "ritz")
    else:
        out.write(format_rows(result.angle_rows, "angle", cfg.fmt))
        out.write("\n")
        out.write(format_rows(result.ritz_rows, "ritz", cfg.fmt))
    for index, err in result.failed_samples:
        sys.stderr.write(f"sample {index} aborted: {err}\n")
    if result.total_violations:
        for index, k, rep in result.failed_reports:
            sys.stderr.write(f"violation in sample {index} at k={k}\n{rep.summary()}\n")
        return EXIT_VIOLATION
    return EXIT_OK


def _load_matrix(path):
    try:
        m = np.load(path) if path.endswith(".npy") else np.loadtxt(path, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return np.asarray(m)


def _cmd_angles(args, out):
    u, v = _load_matrix(args.u), _load_matrix(args.v)
    if u.shape[0] != v.shape[0]:
        raise ConfigError("bases must have the same number of rows")
    su, sv = Subspace(u), Subspace(v)
    if su.dim > sv.dim:
        raise ConfigError("the first basis must not have more columns than the second")
    cos_route = principal_angles_cosine(su, sv)
    tan_route = principal_angles_tangent(su, sv, sv.complement()).values
    out.write("j,theta,tan_cosine_route,tan_tangent_route\n")
    for j, (a, t1, t2) in enumerate(zip(cos_route.angles.values, cos_route.tangents.values, tan_route), 1):
        out.write(f"{j},{a:.17g},{t1:.17g},{t2:.17g}\n")
    return EXIT_OK


def _problem(args):
    cfg = _config(args)
    spec = cfg.spectrum()
    spec.set_target(cfg.p)
    y, _ = sample_initial_subspace(cfg.n, cfg.p, SampleStream(cfg.seed, args.sample))
    return cfg, spec, y


def _cmd_bounds(args, out):
    cfg, spec, y = _problem(args)
    k = args.k
    if k < 1:
        raise ConfigError("--k must be at least 1")
    if not args.tol >= 0:
        raise ConfigError("--tol must be nonnegative")
    ctx = bounds.BoundContext(spec, y)
    lam = spec.lam
    f = make_shifted_chebyshev(lam[cfg.p], lam[-1], k)
    kr = BlockKrylov(spec, y)
    reports = [
        bounds.bound_filtered_tangent(spec, f, ctx, args.tol),
        bounds.bound_chebyshev_tangent(spec, k, ctx, args.tol),
        bounds.bound_chebyshev_ritz(spec, k, ctx, args.tol),
        bounds.bound_stationary_major(spec, k, ctx, args.tol),
        bounds.bound_multiangle_major(spec, f, cfg.tau, ctx, args.tol),
        bounds.bound_ritz_major(spec, f, cfg.i, ctx, args.tol),
        bounds.bound_lanczos_angles(spec, ctx, k, cfg.tau, krylov=kr, tol=args.tol),
        bounds.bound_lanczos_ritz(spec, ctx, k, cfg.i, krylov=kr, tol=args.tol),
        bounds.bound_lz_angles(spec, ctx, k, cfg.tau, krylov=kr, tol=args.tol),
        bounds.bound_lz_ritz(spec, ctx, k, cfg.i, krylov=kr, tol=args.tol),
    ]
    status = EXIT_OK
    for rep in reports:
        out.write(rep.summary() + "\n")
        if rep.violated:
            status = EXIT_VIOLATION
    return status


def _cmd_lanczos(args, out):
    cfg, spec, y = _problem(args)
    kr = BlockKrylov(spec, y)
    rows = cfg.tau.zero_based
    header = ["k", "dim"] + [f"psi_{j}" for j in range(1, cfg.p + 1)] + ["sum_tan_tau"]
    out.write(",".join(header) + "\n")
    for k in range(1, cfg.k_max + 1):
        kr.build(k)
        q = kr.basis(k)
        psi = rayleigh_ritz(spec, q, want=cfg.p).values.values
        tans = bounds.tan_to_span(spec.coords(q), rows).values
        vals = [str(k), str(q.shape[1])] + ["%.17g" % v for v in psi] + ["%.17g" % tans.sum()]
        out.write(",".join(vals) + "\n")
    return EXIT_OK


_COMMANDS = {
    "experiment": _cmd_experiment,
    "angles": _cmd_angles,
    "bounds": _cmd_bounds,
    "lanczos": _cmd_lanczos,
}


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args, out)
    except ConfigError as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG
    except ClusterBoundError as exc:
        # problem data violating a hypothesis (gap, rank) is a configuration issue
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
