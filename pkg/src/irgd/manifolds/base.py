"""Points, tangent vectors and the manifold contract.

All three geometries are embedded submanifolds of a matrix space carrying the
induced (Frobenius) metric. Points and tangents store their data as tuples of
read-only arrays; the tuple layout is geometry specific:

    sphere      point (x,)         tangent (v,)
    grassmann   point (X,)         tangent (V,)
    fixed rank  point (U, s, V)    tangent (M, Up, Vp)

For the fixed-rank tangent the three blocks are mutually orthogonal in the
ambient space, so the metric is the sum of blockwise Frobenius products for
every geometry.
"""

from __future__ import annotations

import abc
import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractViolation

_tokens = itertools.count(1)


class ManifoldKind(enum.Enum):
    SPHERE = "sphere"
    GRASSMANN = "grassmann"
    FIXED_RANK = "fixedrank"


def _frozen(parts):
    out = []
    for p in parts:
        a = np.array(p, dtype=float)
        a.setflags(write=False)
        out.append(a)
    return tuple(out)


@dataclass(frozen=True, eq=False)
class Point:
    kind: ManifoldKind
    parts: tuple
    token: int = field(default_factory=lambda: next(_tokens))

    def __post_init__(self):
        object.__setattr__(self, "parts", _frozen(self.parts))


@dataclass(frozen=True, eq=False)
class Tangent:
    """Tangent vector at ``base``. Arithmetic requires a shared base token."""

    base: Point
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", _frozen(self.parts))

    @property
    def kind(self):
        return self.base.kind

    def _same_base(self, other):
        if not isinstance(other, Tangent):
            return NotImplemented
        if other.base.token != self.base.token:
            raise ContractViolation(
                f"tangent vectors live at different points "
                f"(tokens {self.base.token} and {other.base.token})"
            )
        return True

    def __add__(self, other):
        if self._same_base(other) is NotImplemented:
            return NotImplemented
        return Tangent(self.base, tuple(a + b for a, b in zip(self.parts, other.parts)))

    def __sub__(self, other):
        if self._same_base(other) is NotImplemented:
            return NotImplemented
        return Tangent(self.base, tuple(a - b for a, b in zip(self.parts, other.parts)))

    def __neg__(self):
        return Tangent(self.base, tuple(-a for a in self.parts))

    def __mul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        return Tangent(self.base, tuple(c * a for a in self.parts))

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1.0 / c)

    def is_zero(self):
        return not any(np.any(a) for a in self.parts)


class Manifold(abc.ABC):
    """Contract shared by the concrete geometries.

    Subclasses implement ``project``, ``project_tangent``, ``_retract`` and the
    dense conversions; metric, norm, transport and gradient conversion are
    derived here.
    """

    kind: ManifoldKind

    @property
    @abc.abstractmethod
    def ambient_shape(self) -> tuple:
        ...

    @property
    @abc.abstractmethod
    def dim(self) -> int:
        ...

    # -- checks ---------------------------------------------------------

    def _check_point(self, x):
        if not isinstance(x, Point) or x.kind is not self.kind:
            raise ContractViolation(f"expected a {self.kind.value} point, got {x!r}")

    def _check_tangent(self, x, *vs):
        self._check_point(x)
        for v in vs:
            if not isinstance(v, Tangent):
                raise ContractViolation(f"expected a tangent vector, got {type(v).__name__}")
            if v.base.token != x.token:
                raise ContractViolation(
                    f"tangent based at token {v.base.token} used at point token {x.token}"
                )

    def _check_ambient(self, a):
        a = np.asarray(a, dtype=float)
        if a.shape != self.ambient_shape:
            raise ContractViolation(
                f"ambient array has shape {a.shape}, expected {self.ambient_shape}"
            )
        return a

    # -- metric ---------------------------------------------------------

    def inner(self, x, u, v) -> float:
        self._check_tangent(x, u, v)
        return float(sum(np.vdot(a, b) for a, b in zip(u.parts, v.parts)))

    def norm(self, x, u) -> float:
        self._check_tangent(x, u)
        return math.sqrt(sum(float(np.vdot(a, a)) for a in u.parts))

    def zero(self, x):
        self._check_point(x)
        return Tangent(x, tuple(np.zeros_like(a) for a in self.tangent_template(x)))

    @abc.abstractmethod
    def tangent_template(self, x) -> tuple:
        """Arrays with the shapes of a tangent's parts at ``x``."""

    # -- geometry -------------------------------------------------------

    @abc.abstractmethod
    def project(self, x, a) -> Tangent:
        """Orthogonal projection of the ambient array ``a`` onto T_x."""

    @abc.abstractmethod
    def project_tangent(self, y, xi) -> Tangent:
        """Project a tangent vector based elsewhere onto T_y."""

    @abc.abstractmethod
    def _retract(self, x, eta) -> Point:
        ...

    def retract(self, x, eta):
        self._check_tangent(x, eta)
        if eta.is_zero():
            return x
        return self._retract(x, eta)

    def transport(self, x, eta, xi):
        """Projection transport of ``xi`` along ``eta`` to ``retract(x, eta)``."""
        self._check_tangent(x, eta, xi)
        if eta.is_zero():
            return xi
        return self.project_tangent(self._retract(x, eta), xi)

    def egrad_to_rgrad(self, x, egrad):
        return self.project(x, egrad)

    # -- sampling and dense views --------------------------------------

    @abc.abstractmethod
    def random_point(self, rng) -> Point:
        ...

    def random_tangent(self, x, rng):
        return self.project(x, rng.standard_normal(self.ambient_shape))

    def random_unit_tangent(self, x, rng, max_attempts=10):
        """Uniformly distributed unit tangent (projected Gaussian, normalized)."""
        for _ in range(max_attempts):
            a = rng.standard_normal(self.ambient_shape)
            u = self.project(x, a)
            nrm = self.norm(x, u)
            # A sample (almost) normal to T_x projects to round-off, which
            # would normalize to a non-tangent direction.
            if nrm > 1e-8 * np.linalg.norm(a):
                return u / nrm
        raise RuntimeError(f"degenerate projected sample {max_attempts} times in a row")

    @abc.abstractmethod
    def to_ambient(self, x) -> np.ndarray:
        ...

    @abc.abstractmethod
    def tangent_to_ambient(self, u) -> np.ndarray:
        ...

    @abc.abstractmethod
    def feasibility_residual(self, x) -> float:
        ...
