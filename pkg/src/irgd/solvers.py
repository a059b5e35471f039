"""Inexact Riemannian gradient descent: one loop, several oracles.

Every method here iterates x_{k+1} = R_{x_k}(-t_k g_k) and differs only in the
oracle producing g_k:

    run_rgd     exact gradient
    run_irgd    absolute-error oracle (additive noise by default)
    run_irgdr   relative-error oracle (relative noise by default)
    run_rsam    gradient at the ascent point, eps_k = L rho_k
    run_reg     gradient at the look-ahead point, relative error L rho_k
"""

from __future__ import annotations

import enum
import logging
import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, RegimeWarning, RetractionSingularityError
from .oracles import (
    AdditiveNoiseOracle,
    BoundKind,
    ErrorSchedule,
    ExactOracle,
    ExtragradOracle,
    RelativeNoiseOracle,
    SamOracle,
)
from .schedules import (
    ArmijoBacktracking,
    CappedConstant,
    Constant,
    Diminishing,
    StopRule,
    make_stepper,
    step,
)

log = logging.getLogger(__name__)

__all__ = [
    "IterRecord",
    "IterTrace",
    "Termination",
    "minimize",
    "run_irgd",
    "run_irgdr",
    "run_reg",
    "run_rgd",
    "run_rsam",
    "step",
]


class Termination(enum.Enum):
    GRAD_TOL = "GradTol"
    MAX_ITERS = "MaxIters"
    WALL_CLOCK = "WallClock"
    SINGULARITY = "SingularityError"


@dataclass(frozen=True)
class IterRecord:
    k: int
    t: float  # stepsize used from x_k (0 on the terminal row)
    f: float
    gradnorm: float  # true ||grad f(x_k)|| when audited, else the surrogate
    errbound: float  # declared bound value (eps_k, or nu for relative bounds)
    evals: int  # cumulative cost/gradient evaluations
    wall_s: float
    kind: str = "absolute"
    gnorm: float = math.nan  # ||g_k||
    err: float = math.nan  # ||g_k - grad f(x_k)||, audit only
    inner: float = math.nan  # <g_k, grad f(x_k)>, audit only


@dataclass
class IterTrace:
    records: list = field(default_factory=list)
    reason: Termination | None = None
    warnings: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    x: object = None  # final iterate

    @property
    def iterations(self):
        return self.records[-1].k if self.records else 0

    @property
    def final(self):
        return self.records[-1]

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    @property
    def audited(self):
        return bool(self.records) and not math.isnan(self.records[0].err)


def _surrogate(kind, gnorm, bound):
    if kind is BoundKind.ABSOLUTE:
        return gnorm + bound
    if kind is BoundKind.RELATIVE:
        return gnorm / (1.0 - bound) if bound < 1.0 else math.inf
    return gnorm


def minimize(problem, x0, oracle, steps, stop=None, audit=True, meta=None,
             clock=time.perf_counter):
    """The generic inexact descent loop shared by all solvers."""
    stop = stop or StopRule()
    M = problem.manifold
    stepper = make_stepper(steps)
    trace = IterTrace(meta=dict(meta or {}))
    trace.meta.setdefault("steps", steps)
    trace.meta.setdefault("L", problem.lipschitz)
    start = clock()
    x = x0
    f = problem.cost(x)
    evals = 1
    k = 0
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        while True:
            try:
                out = oracle(x, k)
                evals += out.evals
                g = out.g
                grad = out.grad
                if audit and grad is None:
                    grad = problem.rgrad(x)
                    evals += 1
                gnorm = M.norm(x, g)
                if audit:
                    gradnorm = M.norm(x, grad)
                    err = M.norm(x, g - grad)
                    inner = M.inner(x, g, grad)
                else:
                    gradnorm = _surrogate(out.bound_kind, gnorm, out.bound_value)
                    err = inner = math.nan
                row = dict(k=k, f=f, gradnorm=gradnorm, errbound=out.bound_value,
                           kind=out.bound_kind.value, gnorm=gnorm, err=err, inner=inner)
                reason = None
                if gradnorm < stop.grad_tol:
                    reason = Termination.GRAD_TOL
                elif k >= stop.max_iters:
                    reason = Termination.MAX_ITERS
                elif stop.max_wall_seconds is not None and clock() - start > stop.max_wall_seconds:
                    reason = Termination.WALL_CLOCK
                if reason is not None:
                    trace.records.append(IterRecord(t=0.0, evals=evals, wall_s=clock() - start, **row))
                    trace.reason = reason
                    break
                t, x_new, f_new, step_evals, flag = stepper(problem, x, g, k, f)
                evals += step_evals
                if flag:
                    trace.flags.append(flag)
                if f_new is None:
                    f_new = problem.cost(x_new)
                    evals += 1
            except RetractionSingularityError as exc:
                trace.flags.append(f"k={k}: {exc}")
                trace.reason = Termination.SINGULARITY
                break
            trace.records.append(IterRecord(t=t, evals=evals, wall_s=clock() - start, **row))
            for w in caught:
                trace.flags.append(f"k={k}: {w.category.__name__}: {w.message}")
            caught.clear()
            x, f = x_new, f_new
            k += 1
    for w in caught:
        trace.flags.append(f"k={k}: {w.category.__name__}: {w.message}")
    trace.x = x
    return trace


# -- parameter regime checks ---------------------------------------------


def _power(schedule):
    """Decay exponent of a schedule (0 for constants)."""
    if isinstance(schedule, Diminishing):
        return schedule.alpha
    if isinstance(schedule, ErrorSchedule):
        return schedule.p if schedule.kind == "power" else 0.0
    return 0.0


def _step_warnings(steps):
    out = []
    if isinstance(steps, Diminishing):
        if steps.alpha <= 0.5:
            out.append(
                f"STEP_SQUARES_DIVERGE: alpha={steps.alpha:g} <= 1/2, so sum t_k^2 diverges; "
                "t_k still decreases to 0 with divergent sum"
            )
    elif isinstance(steps, ArmijoBacktracking):
        out.append("STEP_ADAPTIVE: Armijo stepsizes are not checked against the regime")
    else:
        out.append("STEP_NOT_DIMINISHING: t_k does not decrease to 0")
    return out


def check_irgd_regime(steps, errors):
    """Named warnings for violations of: sum t_k = inf, t_k -> 0,
    sum t_k eps_k < inf, limsup eps_k < 2."""
    out = _step_warnings(steps)
    if errors.scale > 0:
        if isinstance(steps, Diminishing) and steps.alpha + _power(errors) <= 1.0:
            out.append("ERROR_SUM_DIVERGES: sum t_k eps_k diverges")
        elif not isinstance(steps, (Diminishing, ArmijoBacktracking)) and errors.kind == "constant":
            out.append("ERROR_SUM_DIVERGES: sum t_k eps_k diverges")
        if errors.kind == "constant" and errors.scale >= 2.0:
            out.append(f"ERROR_LIMSUP: limsup eps_k = {errors.scale:g} >= 2")
    return out


def check_irgdr_regime(steps, nu, L):
    if not 0.0 <= nu < 1.0:
        raise ContractViolation(f"relative error must lie in [0, 1), got {nu}")
    out = []
    if isinstance(steps, CappedConstant):
        if not (math.isclose(steps.nu, nu) and math.isclose(steps.L, L)):
            raise ContractViolation(
                f"capped stepsize built for nu={steps.nu}, L={steps.L} "
                f"but the run uses nu={nu}, L={L}"
            )
    elif isinstance(steps, Constant):
        cap = 2.0 * (1.0 - nu) / (L * (1.0 + nu) ** 2)
        if steps.t >= cap:
            out.append(f"STEP_ABOVE_CAP: t={steps.t:g} >= (2-2nu)/(L(1+nu)^2)={cap:g}")
    elif isinstance(steps, ArmijoBacktracking):
        out.append("STEP_ADAPTIVE: Armijo stepsizes are not checked against the regime")
    return out


def check_rsam_regime(steps, rho, L):
    """sum t_k = inf, t_k -> 0, sum t_k rho_k < inf, limsup rho_k < 2/L."""
    out = _step_warnings(steps)
    if isinstance(steps, Diminishing) and steps.alpha + _power(rho) <= 1.0:
        out.append("RHO_SUM_DIVERGES: sum t_k rho_k diverges")
    elif not isinstance(steps, Diminishing) and rho.kind == "constant":
        out.append("RHO_SUM_DIVERGES: sum t_k rho_k diverges")
    if rho.kind == "constant" and rho.scale >= 2.0 / L:
        out.append(f"RHO_LIMSUP: rho={rho.scale:g} >= 2/L={2.0 / L:g}")
    return out


def check_reg_regime(rho, L, nu=None):
    """rho_k <= nu / L for some nu in [0, 1)."""
    rho_max = rho(0)
    out = []
    if nu is None:
        if L * rho_max >= 1.0:
            out.append(f"RHO_TOO_LARGE: L*rho={L * rho_max:g} >= 1, no admissible nu")
    elif not 0.0 <= nu < 1.0:
        out.append(f"NU_OUT_OF_RANGE: nu={nu:g} not in [0, 1)")
    elif rho_max > nu / L:
        out.append(f"RHO_ABOVE_NU_OVER_L: rho={rho_max:g} > nu/L={nu / L:g}")
    return out


def _warn_all(names, algorithm):
    for w in names:
        log.warning("%s: %s", algorithm, w)
        warnings.warn(f"{algorithm}: {w}", RegimeWarning, stacklevel=3)
    return names


# -- named solvers --------------------------------------------------------


def run_rgd(problem, x0, steps, stop=None, audit=True):
    meta = {"algorithm": "rgd"}
    return minimize(problem, x0, ExactOracle(problem), steps, stop, audit, meta)


def run_irgd(problem, x0, steps, errors, stop=None, rng=None, oracle=None, audit=True):
    """Absolute-error inexact descent; default oracle adds noise of norm errors(k)."""
    if oracle is None:
        oracle = AdditiveNoiseOracle(problem, errors, rng if rng is not None else np.random.default_rng())
    meta = {"algorithm": "irgd", "errors": errors}
    trace = minimize(problem, x0, oracle, steps, stop, audit, meta)
    trace.warnings = _warn_all(check_irgd_regime(steps, errors), "irgd")
    return trace


def run_irgdr(problem, x0, steps, nu, stop=None, rng=None, oracle=None, audit=True):
    """Relative-error inexact descent; default oracle adds noise of norm nu ||grad||."""
    warns = check_irgdr_regime(steps, nu, problem.lipschitz)
    if oracle is None:
        oracle = RelativeNoiseOracle(problem, nu, rng if rng is not None else np.random.default_rng())
    meta = {"algorithm": "irgdr", "nu": nu}
    trace = minimize(problem, x0, oracle, steps, stop, audit, meta)
    trace.warnings = _warn_all(warns, "irgdr")
    return trace


def run_rsam(problem, x0, rho, steps, stop=None, lipschitz=None, audit=True):
    rho = rho if isinstance(rho, ErrorSchedule) else ErrorSchedule.constant(rho)
    L = problem.lipschitz if lipschitz is None else lipschitz
    meta = {"algorithm": "rsam", "rho": rho, "L": L}
    trace = minimize(problem, x0, SamOracle(problem, rho, L), steps, stop, audit, meta)
    trace.warnings = _warn_all(check_rsam_regime(steps, rho, L), "rsam")
    return trace


def run_reg(problem, x0, rho, steps, stop=None, lipschitz=None, nu=None, audit=True):
    rho = rho if isinstance(rho, ErrorSchedule) else ErrorSchedule.constant(rho)
    L = problem.lipschitz if lipschitz is None else lipschitz
    meta = {"algorithm": "reg", "rho": rho, "L": L, "nu": nu}
    trace = minimize(problem, x0, ExtragradOracle(problem, rho, L, nu), steps, stop, audit, meta)
    trace.warnings = _warn_all(check_reg_regime(rho, L, nu), "reg")
    return trace
