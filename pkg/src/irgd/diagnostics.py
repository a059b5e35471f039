"""Post-hoc analysis of solver traces: empirical rate fits and audits of the
descent and error-bound inequalities."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .schedules import ArmijoBacktracking, CappedConstant

FP_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class RateReport:
    n_points: int
    q: float = math.nan  # linear model: r_k ~ C q^k
    linear_r2: float = math.nan
    exponent: float = math.nan  # power model: r_k ~ C k^exponent
    power_r2: float = math.nan
    preferred: str = "inconclusive"


def _linfit(x, y):
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + icpt)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2


def fit_rate(trace=None, ks=None, values=None, burn_in=0.1, min_points=50):
    """Fit log r_k against k (linear rate) and against log k (power law).

    ``r`` is the gradient-norm column of ``trace`` unless ``ks``/``values``
    are given. Points before r first drops below ``burn_in * r_0`` are
    discarded, as are non-positive values. Fewer than ``min_points``
    remaining points gives an inconclusive report.
    """
    if trace is not None:
        ks, values = trace.column("k"), trace.column("gradnorm")
    ks = np.asarray(ks, dtype=float)
    r = np.asarray(values, dtype=float)
    if len(r) == 0:
        return RateReport(0)
    below = np.nonzero(r <= burn_in * r[0])[0]
    if len(below) == 0:
        return RateReport(0)
    start = below[0]
    ks, r = ks[start:], r[start:]
    keep = np.isfinite(r) & (r > 0)
    ks, r = ks[keep], r[keep]
    if len(r) < min_points:
        return RateReport(len(r))
    logr = np.log(r)
    slope, lin_r2 = _linfit(ks, logr)
    pos = ks > 0
    expo, pow_r2 = _linfit(np.log(ks[pos]), logr[pos])
    preferred = "linear" if lin_r2 >= pow_r2 else "power"
    return RateReport(len(r), math.exp(slope), lin_r2, expo, pow_r2, preferred)


@dataclass
class AuditReport:
    available: bool
    descent_rule: str = "none"
    descent_checked: int = 0
    descent_violations: int = 0
    bound_checked: int = 0
    bound_violations: int = 0
    two_sided_checked: int = 0
    two_sided_violations: int = 0
    details: list = field(default_factory=list)

    @property
    def status(self):
        if not self.available:
            return "UNAVAILABLE"
        total = self.descent_violations + self.bound_violations + self.two_sided_violations
        return "PASS" if total == 0 else "FAIL"


def _fp_slack(scale):
    return 8.0 * FP_EPS * scale


def audit_report(trace, problem=None, config=None, max_details=20):
    """Count violations of the applicable descent inequality, the declared
    oracle bound, and (for relative bounds) the two-sided norm bound.

    ``config`` may carry overrides: ``L`` (Lipschitz constant), ``steps``.
    """
    config = dict(config or {})
    if not trace.audited:
        return AuditReport(False)
    L = config.get("L", trace.meta.get("L", getattr(problem, "lipschitz", None)))
    steps = config.get("steps", trace.meta.get("steps"))
    rep = AuditReport(True)
    recs = trace.records

    def note(msg):
        if len(rep.details) < max_details:
            rep.details.append(msg)

    for r in recs:
        if r.kind == "none":
            continue
        rep.bound_checked += 1
        limit = r.errbound if r.kind == "absolute" else r.errbound * r.gradnorm
        if r.err > limit * (1 + 1e-12) + _fp_slack(r.gradnorm + r.gnorm):
            rep.bound_violations += 1
            note(f"k={r.k}: oracle error {r.err:.6e} exceeds declared bound {limit:.6e}")
        if r.kind == "relative":
            rep.two_sided_checked += 1
            nu, gn = r.errbound, r.gradnorm
            slack = _fp_slack(gn)
            if not ((1 - nu) * gn - slack <= r.gnorm <= (1 + nu) * gn + slack):
                rep.two_sided_violations += 1
                note(f"k={r.k}: ||g||={r.gnorm:.6e} outside [(1-nu), (1+nu)] * {gn:.6e}")

    pairs = [(a, b) for a, b in zip(recs[:-1], recs[1:]) if a.t > 0]
    kinds = {r.kind for r in recs}
    if isinstance(steps, ArmijoBacktracking):
        rep.descent_rule = "armijo"
        c = steps.sufficient_decrease

        def bound(a):
            return a.f - c * a.t * a.gnorm ** 2
    elif kinds == {"relative"} and L is not None:
        if isinstance(steps, CappedConstant):
            rep.descent_rule = "capped-constant"

            def bound(a):
                return a.f - 0.5 * steps.delta * a.t * a.gradnorm ** 2
        else:
            rep.descent_rule = "relative"

            def bound(a):
                coeff = 2 - 2 * a.errbound - L * a.t * (1 + a.errbound) ** 2
                return a.f - 0.5 * a.t * coeff * a.gradnorm ** 2 if coeff > 0 else None
        pairs = [(a, b) for a, b in pairs if a.k >= 1]
    elif kinds == {"absolute"} and L is not None:
        rep.descent_rule = "descent-lemma"
        first = next((i for i, (a, _) in enumerate(pairs) if L * a.t < 1), len(pairs))
        pairs = pairs[first:]

        def bound(a):
            t, eps = a.t, a.errbound
            c1 = 0.5 * (2 - L * t - eps + L * t * eps)
            c2 = 0.5 * (1 - L * t) + 0.5 * L * t * eps
            return a.f - c1 * t * a.gradnorm ** 2 + c2 * t * eps
    else:
        return rep

    for a, b in pairs:
        rhs = bound(a)
        if rhs is None:
            continue
        rep.descent_checked += 1
        if b.f > rhs + 1e-10 * abs(a.f):
            rep.descent_violations += 1
            note(f"k={a.k}: f_next={b.f:.12e} > bound {rhs:.12e} ({rep.descent_rule})")
    return rep
