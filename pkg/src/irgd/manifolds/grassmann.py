import numpy as np

from ..errors import ContractViolation, RetractionSingularityError
from .base import Manifold, ManifoldKind, Point, Tangent


def qr_positive(a):
    """Thin QR with the sign convention diag(R) > 0."""
    q, r = np.linalg.qr(a)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs, r * signs[:, None]


class Grassmann(Manifold):
    """Gr(n, p), represented by n x p matrices with orthonormal columns.

    Tangent vectors are horizontal: X^T V = 0.
    """

    kind = ManifoldKind.GRASSMANN

    def __init__(self, n, p):
        if not 1 <= p < n:
            raise ContractViolation(f"Grassmann needs 1 <= p < n, got n={n}, p={p}")
        self.n, self.p = int(n), int(p)

    def __repr__(self):
        return f"Grassmann({self.n}, {self.p})"

    @property
    def ambient_shape(self):
        return (self.n, self.p)

    @property
    def dim(self):
        return self.p * (self.n - self.p)

    def point(self, basis):
        return Point(self.kind, (basis,))

    def tangent(self, x, v):
        return Tangent(x, (v,))

    def tangent_template(self, x):
        return x.parts

    def project(self, x, a):
        self._check_point(x)
        a = self._check_ambient(a)
        (X,) = x.parts
        return Tangent(x, (a - X @ (X.T @ a),))

    def project_tangent(self, y, xi):
        self._check_point(y)
        return self.project(y, xi.parts[0])

    def _retract(self, x, eta):
        q, r = qr_positive(x.parts[0] + eta.parts[0])
        d = np.abs(np.diag(r))
        if d.min() <= 1e-14 * max(d.max(), 1.0):
            raise RetractionSingularityError("X + eta is rank deficient")
        return Point(self.kind, (q,))

    def random_point(self, rng):
        q, _ = qr_positive(rng.standard_normal((self.n, self.p)))
        return Point(self.kind, (q,))

    def to_ambient(self, x):
        return np.array(x.parts[0])

    def tangent_to_ambient(self, u):
        return np.array(u.parts[0])

    def feasibility_residual(self, x):
        (X,) = x.parts
        return float(np.linalg.norm(X.T @ X - np.eye(self.p)))
