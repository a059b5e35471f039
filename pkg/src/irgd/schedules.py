"""Stepsize schedules, the Armijo backtracking search and stopping rules.

Iteration indices passed to steppers are 0-based; the diminishing schedule
uses the 1-based index, t_k = 1 / (k+1)^alpha for loop index k.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ContractViolation


@dataclass(frozen=True)
class Diminishing:
    alpha: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ContractViolation(f"diminishing exponent must lie in (0, 1), got {self.alpha}")

    def stepsize(self, k):
        return 1.0 / (k + 1.0) ** self.alpha

    def label(self):
        return f"diminishing(alpha={self.alpha:g})"


@dataclass(frozen=True)
class Constant:
    t: float

    def __post_init__(self):
        if self.t <= 0:
            raise ContractViolation(f"constant stepsize must be positive, got {self.t}")

    def stepsize(self, k):
        return self.t

    def label(self):
        return f"constant(t={self.t:g})"


@dataclass(frozen=True)
class CappedConstant:
    """The largest constant stepsize (2 - 2nu - delta) / (L (1+nu)^2)."""

    nu: float
    delta: float
    L: float

    def __post_init__(self):
        if not 0.0 <= self.nu < 1.0:
            raise ContractViolation(f"relative error must lie in [0, 1), got {self.nu}")
        if self.delta <= 0 or 2.0 - 2.0 * self.nu - self.delta <= 0:
            raise ContractViolation(
                f"need 0 < delta < 2 - 2 nu, got delta={self.delta}, nu={self.nu}"
            )
        if self.L <= 0:
            raise ContractViolation(f"Lipschitz constant must be positive, got {self.L}")

    @property
    def t(self):
        return (2.0 - 2.0 * self.nu - self.delta) / (self.L * (1.0 + self.nu) ** 2)

    def stepsize(self, k):
        return self.t

    def label(self):
        return f"capped(nu={self.nu:g},delta={self.delta:g})"


@dataclass(frozen=True)
class ArmijoBacktracking:
    t0: float = 1.0
    contraction: float = 0.5
    sufficient_decrease: float = 1e-4
    max_backtracks: int = 50

    def __post_init__(self):
        if self.t0 <= 0 or not 0 < self.contraction < 1 or not 0 < self.sufficient_decrease < 1:
            raise ContractViolation(f"invalid Armijo parameters {self}")

    def label(self):
        return "armijo"


@dataclass(frozen=True)
class StopRule:
    grad_tol: float = 1e-6
    max_iters: int = 10000
    max_wall_seconds: float | None = None

    def __post_init__(self):
        if self.grad_tol <= 0 or self.max_iters < 1:
            raise ContractViolation(f"invalid stop rule {self}")


@dataclass(frozen=True)
class LineSearchResult:
    t: float
    x: object
    f: float
    evals: int
    accepted: bool


def step(manifold, x, g, t):
    """x_{k+1} = R_x(-t g)."""
    if t < 0:
        raise ContractViolation(f"stepsize must be >= 0, got {t}")
    if t == 0:
        return x
    return manifold.retract(x, (-t) * g)


def armijo_search(problem, x, g, t0, contraction=0.5, sufficient_decrease=1e-4,
                  max_backtracks=50, fx=None):
    """Backtrack t = t0 * contraction^j until
    f(R_x(-t g)) <= f(x) - sufficient_decrease * t * ||g||^2.

    Returns the first (largest) accepted trial; if none is accepted the
    smallest trial is returned with ``accepted=False``.
    """
    if t0 <= 0:
        raise ContractViolation(f"initial stepsize must be positive, got {t0}")
    M = problem.manifold
    evals = 0
    if fx is None:
        fx = problem.cost(x)
        evals += 1
    gg = M.inner(x, g, g)
    t = t0
    for _ in range(max_backtracks + 1):
        x_new = step(M, x, g, t)
        f_new = problem.cost(x_new)
        evals += 1
        if f_new <= fx - sufficient_decrease * t * gg:
            return LineSearchResult(t, x_new, f_new, evals, True)
        t *= contraction
    t /= contraction
    return LineSearchResult(t, x_new, f_new, evals, False)


class _FixedStepper:
    def __init__(self, schedule):
        self.schedule = schedule

    def __call__(self, problem, x, g, k, fx):
        t = self.schedule.stepsize(k)
        return t, step(problem.manifold, x, g, t), None, 0, None


class _ArmijoStepper:
    """Warm start: each search begins at twice the previously accepted step."""

    def __init__(self, schedule):
        self.schedule = schedule
        self.t0 = schedule.t0

    def __call__(self, problem, x, g, k, fx):
        s = self.schedule
        res = armijo_search(problem, x, g, self.t0, s.contraction, s.sufficient_decrease,
                            s.max_backtracks, fx=fx)
        self.t0 = 2.0 * res.t
        flag = None if res.accepted else f"k={k}: Armijo search accepted no trial"
        return res.t, res.x, res.f, res.evals, flag


def make_stepper(schedule):
    if isinstance(schedule, ArmijoBacktracking):
        return _ArmijoStepper(schedule)
    return _FixedStepper(schedule)
