"""Inexact Riemannian gradient oracles.

Each ``*_oracle`` function evaluates one approximate gradient g at x and says
how far it may be from the true gradient:

* ``BoundKind.ABSOLUTE`` with value eps:  ||g - grad f(x)|| <= eps
* ``BoundKind.RELATIVE`` with value nu:   ||g - grad f(x)|| <= nu ||grad f(x)||
* ``BoundKind.NONE``: no certified bound (biased estimators)

The classes at the bottom bind the functions into ``oracle(x, k)`` callables
for the solver loop.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation
from .manifolds import Tangent

ZERO_GRAD = 1e-16


class BoundKind(enum.Enum):
    ABSOLUTE = "absolute"
    RELATIVE = "relative"
    NONE = "none"


@dataclass(frozen=True)
class OracleOutput:
    g: Tangent
    bound_kind: BoundKind
    bound_value: float
    evals: int
    grad: Tangent | None = None  # exact gradient at x, when it was computed anyway


@dataclass(frozen=True)
class ErrorSchedule:
    """Error (or perturbation radius) sequence indexed by the 0-based iteration k.

    ``power``: scale * (k+1)^(-p), p >= 1.  ``constant``: scale.
    """

    kind: str
    scale: float
    p: float = 0.0

    def __post_init__(self):
        if self.kind not in ("power", "constant"):
            raise ContractViolation(f"unknown error schedule kind {self.kind!r}")
        if self.scale < 0:
            raise ContractViolation(f"error scale must be >= 0, got {self.scale}")
        if self.kind == "power" and self.p < 1:
            raise ContractViolation(f"power decay needs p >= 1, got {self.p}")

    @classmethod
    def power_decay(cls, nu, p):
        return cls("power", float(nu), float(p))

    @classmethod
    def constant(cls, eps):
        return cls("constant", float(eps))

    def delta(self, k):
        return (k + 1.0) ** (-self.p) if self.kind == "power" else 1.0

    def __call__(self, k):
        return self.scale * self.delta(k)


def _as_schedule(rho):
    return rho if isinstance(rho, ErrorSchedule) else ErrorSchedule.constant(rho)


def exact_oracle(problem, x):
    grad = problem.rgrad(x)
    return OracleOutput(grad, BoundKind.ABSOLUTE, 0.0, 1, grad)


def additive_noise_oracle(problem, x, k, schedule, rng):
    """grad f(x) plus a uniformly random tangent direction of norm schedule(k)."""
    grad = problem.rgrad(x)
    eps = schedule(k)
    if eps == 0.0:
        return OracleOutput(grad, BoundKind.ABSOLUTE, 0.0, 1, grad)
    u = problem.manifold.random_unit_tangent(x, rng)
    return OracleOutput(grad + eps * u, BoundKind.ABSOLUTE, eps, 1, grad)


def relative_noise_oracle(problem, x, nu, rng):
    """grad f(x) plus a random tangent direction of norm nu * ||grad f(x)||."""
    if not 0.0 <= nu < 1.0:
        raise ContractViolation(f"relative error must lie in [0, 1), got {nu}")
    grad = problem.rgrad(x)
    gnorm = problem.manifold.norm(x, grad)
    if nu == 0.0 or gnorm == 0.0:
        return OracleOutput(grad, BoundKind.RELATIVE, nu, 1, grad)
    u = problem.manifold.random_unit_tangent(x, rng)
    return OracleOutput(grad + (nu * gnorm) * u, BoundKind.RELATIVE, nu, 1, grad)


def default_smoothing(problem, x):
    return 1e-5 * (1.0 + float(np.linalg.norm(problem.manifold.to_ambient(x))))


def zeroth_order_oracle(problem, x, mu, rng, audit=False):
    """Two-point Gaussian-smoothing estimate (f(R_x(mu u)) - f(x)) / mu * u.

    Biased, so no bound is declared.
    """
    if mu <= 0:
        raise ContractViolation(f"smoothing parameter must be positive, got {mu}")
    M = problem.manifold
    u = M.project(x, rng.standard_normal(M.ambient_shape))
    g = ((problem.cost(M.retract(x, mu * u)) - problem.cost(x)) / mu) * u
    return OracleOutput(g, BoundKind.NONE, 0.0, 2, problem.rgrad(x) if audit else None)


def sam_oracle(problem, x, rho_k, lipschitz=None):
    """Gradient at the ascent point R_x(rho grad/||grad||), projected back to T_x."""
    if rho_k <= 0:
        raise ContractViolation(f"perturbation radius must be positive, got {rho_k}")
    L = problem.lipschitz if lipschitz is None else lipschitz
    M = problem.manifold
    grad = problem.rgrad(x)
    gnorm = M.norm(x, grad)
    if gnorm < ZERO_GRAD:
        return OracleOutput(M.zero(x), BoundKind.ABSOLUTE, L * rho_k, 1, grad)
    x_adv = M.retract(x, (rho_k / gnorm) * grad)
    g = M.project_tangent(x, problem.rgrad(x_adv))
    return OracleOutput(g, BoundKind.ABSOLUTE, L * rho_k, 2, grad)


def extragrad_oracle(problem, x, rho_k, lipschitz=None, nu=None):
    """Gradient at the look-ahead point R_x(-rho grad), projected back to T_x.

    The declared relative bound is ``nu`` if given, else L * rho_k.
    """
    if rho_k < 0:
        raise ContractViolation(f"perturbation radius must be >= 0, got {rho_k}")
    L = problem.lipschitz if lipschitz is None else lipschitz
    nu = L * rho_k if nu is None else nu
    M = problem.manifold
    grad = problem.rgrad(x)
    if rho_k == 0.0 or M.norm(x, grad) == 0.0:
        return OracleOutput(grad, BoundKind.RELATIVE, nu, 1, grad)
    x_adv = M.retract(x, (-rho_k) * grad)
    g = M.project_tangent(x, problem.rgrad(x_adv))
    return OracleOutput(g, BoundKind.RELATIVE, nu, 2, grad)


# -- loop adapters --------------------------------------------------------


class ExactOracle:
    name = "exact"

    def __init__(self, problem):
        self.problem = problem

    def __call__(self, x, k):
        return exact_oracle(self.problem, x)


class AdditiveNoiseOracle:
    name = "additive"

    def __init__(self, problem, schedule, rng):
        self.problem, self.schedule, self.rng = problem, schedule, rng

    def __call__(self, x, k):
        return additive_noise_oracle(self.problem, x, k, self.schedule, self.rng)


class RelativeNoiseOracle:
    name = "relative"

    def __init__(self, problem, nu, rng):
        self.problem, self.nu, self.rng = problem, nu, rng

    def __call__(self, x, k):
        return relative_noise_oracle(self.problem, x, self.nu, self.rng)


class ZerothOrderOracle:
    name = "zeroth-order"

    def __init__(self, problem, rng, mu=None, audit=False):
        self.problem, self.rng, self.mu, self.audit = problem, rng, mu, audit

    def __call__(self, x, k):
        mu = default_smoothing(self.problem, x) if self.mu is None else self.mu
        return zeroth_order_oracle(self.problem, x, mu, self.rng, self.audit)


class SamOracle:
    name = "sam"

    def __init__(self, problem, rho, lipschitz=None):
        self.problem, self.rho, self.lipschitz = problem, _as_schedule(rho), lipschitz

    def __call__(self, x, k):
        return sam_oracle(self.problem, x, self.rho(k), self.lipschitz)


class ExtragradOracle:
    name = "extragrad"

    def __init__(self, problem, rho, lipschitz=None, nu=None):
        self.problem, self.rho = problem, _as_schedule(rho)
        self.lipschitz, self.nu = lipschitz, nu

    def __call__(self, x, k):
        return extragrad_oracle(self.problem, x, self.rho(k), self.lipschitz, self.nu)


def bound_as_absolute(out, gradnorm):
    """Declared bound on ||g - grad f(x)|| in absolute terms (inf when undeclared)."""
    if out.bound_kind is BoundKind.ABSOLUTE:
        return out.bound_value
    if out.bound_kind is BoundKind.RELATIVE:
        return out.bound_value * gradnorm
    return math.inf
