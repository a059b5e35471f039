"""Inexact Riemannian gradient descent on the sphere, the Grassmannian and
the fixed-rank matrix manifold, with benchmark problems and tooling."""

from .diagnostics import AuditReport, RateReport, audit_report, fit_rate
from .errors import (
    ConfigError,
    ContractViolation,
    IdxParseError,
    RegimeWarning,
    RetractionSingularityError,
    TraceFormatError,
    TruncationTieWarning,
)
from .manifolds import FixedRank, Grassmann, Manifold, Point, Sphere, Tangent
from .oracles import (
    BoundKind,
    ErrorSchedule,
    OracleOutput,
    additive_noise_oracle,
    exact_oracle,
    extragrad_oracle,
    relative_noise_oracle,
    sam_oracle,
    zeroth_order_oracle,
)
from .plotting import emit_plot
from .problems import McProblem, PcaProblem, SphereRayleigh, gen_mc_instance, gen_pca_instance
from .schedules import ArmijoBacktracking, CappedConstant, Constant, Diminishing, StopRule
from .solvers import (
    IterTrace,
    Termination,
    minimize,
    run_irgd,
    run_irgdr,
    run_reg,
    run_rgd,
    run_rsam,
)
from .tracefile import read_trace, write_trace

__version__ = "0.1.0"

__all__ = [
    "ArmijoBacktracking",
    "AuditReport",
    "BoundKind",
    "CappedConstant",
    "ConfigError",
    "Constant",
    "ContractViolation",
    "Diminishing",
    "ErrorSchedule",
    "FixedRank",
    "Grassmann",
    "IdxParseError",
    "IterTrace",
    "Manifold",
    "McProblem",
    "OracleOutput",
    "PcaProblem",
    "Point",
    "RateReport",
    "RegimeWarning",
    "RetractionSingularityError",
    "Sphere",
    "SphereRayleigh",
    "StopRule",
    "Tangent",
    "Termination",
    "TraceFormatError",
    "TruncationTieWarning",
    "additive_noise_oracle",
    "audit_report",
    "emit_plot",
    "exact_oracle",
    "extragrad_oracle",
    "fit_rate",
    "gen_mc_instance",
    "gen_pca_instance",
    "minimize",
    "read_trace",
    "relative_noise_oracle",
    "run_irgd",
    "run_irgdr",
    "run_reg",
    "run_rgd",
    "run_rsam",
    "sam_oracle",
    "write_trace",
    "zeroth_order_oracle",
]
