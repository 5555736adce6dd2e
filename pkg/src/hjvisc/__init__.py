"""Interval-valued function algebra and viscosity-solution tools for
first-order Hamilton-Jacobi equations in one space dimension."""

from .interval import Interval
from .pwfn import (
    DomainError,
    DomainMismatchError,
    InclusionError,
    NotHContinuousError,
    Piece,
    PiecewiseFn,
    lattice_inf,
    lattice_sup,
    pointwise_max,
    pointwise_min,
)
from .hamiltonian import EvalError, Hamiltonian, ParseError, parse
from .graphdist import GraphSet, graph_of, hausdorff_distance
from .viscosity import (
    SampleConfig,
    SlopeKind,
    SlopeSet,
    VerificationReport,
    subdifferential,
    superdifferential,
    verify_envelope_solution,
    verify_interval_solution,
    verify_subsolution,
    verify_supersolution,
)
from .perron import (
    BumpError,
    GridFn,
    NonConvergenceError,
    SolveConfig,
    SolveTrace,
    bump,
    discrete_envelopes,
    discrete_verify,
    perron_solve,
    sample_to_grid,
)

__all__ = [
    "Interval",
    "Piece",
    "PiecewiseFn",
    "DomainError",
    "DomainMismatchError",
    "InclusionError",
    "NotHContinuousError",
    "pointwise_max",
    "pointwise_min",
    "lattice_sup",
    "lattice_inf",
    "Hamiltonian",
    "ParseError",
    "EvalError",
    "parse",
    "GraphSet",
    "graph_of",
    "hausdorff_distance",
    "SlopeKind",
    "SlopeSet",
    "SampleConfig",
    "VerificationReport",
    "superdifferential",
    "subdifferential",
    "verify_subsolution",
    "verify_supersolution",
    "verify_interval_solution",
    "verify_envelope_solution",
    "GridFn",
    "SolveConfig",
    "SolveTrace",
    "BumpError",
    "NonConvergenceError",
    "sample_to_grid",
    "discrete_envelopes",
    "discrete_verify",
    "bump",
    "perron_solve",
]

__version__ = "0.1.0"
