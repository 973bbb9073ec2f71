"""Block spectral filters, block eigensolvers and majorization-type convergence bounds."""

from . import bounds, eigensolvers, experiments, filters, linalg, majorization, subspaces
from ._backend import DEFAULT as backend
from .bounds import BoundReport, verify_report
from .errors import (
    ClusterBoundError,
    ConfigError,
    ConvergenceError,
    DimensionError,
    FilterError,
    GapError,
    NotHermitianError,
    RankDeficiencyError,
    RightAngleError,
)
from .filters import FilterSpec, make_shifted_chebyshev
from .majorization import MajorizationVerdict, weakly_majorizes
from .spectrum import Spectrum
from .subspaces import IndexSet, Subspace
from .tuples import DescTuple

__version__ = "0.1.0"
