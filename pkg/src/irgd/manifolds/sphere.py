import numpy as np

from ..errors import ContractViolation
from .base import Manifold, ManifoldKind, Point, Tangent


class Sphere(Manifold):
    """Unit sphere S^{n-1} in R^n."""

    kind = ManifoldKind.SPHERE

    def __init__(self, n):
        if n < 2:
            raise ContractViolation(f"sphere needs n >= 2, got {n}")
        self.n = int(n)

    def __repr__(self):
        return f"Sphere({self.n})"

    @property
    def ambient_shape(self):
        return (self.n,)

    @property
    def dim(self):
        return self.n - 1

    def point(self, x):
        x = np.asarray(x, dtype=float)
        return Point(self.kind, (x / np.linalg.norm(x),))

    def tangent(self, x, v):
        return Tangent(x, (v,))

    def tangent_template(self, x):
        return x.parts

    def project(self, x, a):
        self._check_point(x)
        a = self._check_ambient(a)
        (p,) = x.parts
        return Tangent(x, (a - (p @ a) * p,))

    def project_tangent(self, y, xi):
        self._check_point(y)
        return self.project(y, xi.parts[0])

    def _retract(self, x, eta):
        v = x.parts[0] + eta.parts[0]
        return Point(self.kind, (v / np.linalg.norm(v),))

    def random_point(self, rng):
        return self.point(rng.standard_normal(self.n))

    def to_ambient(self, x):
        return np.array(x.parts[0])

    def tangent_to_ambient(self, u):
        return np.array(u.parts[0])

    def feasibility_residual(self, x):
        return abs(float(np.linalg.norm(x.parts[0])) - 1.0)
