import warnings

import numpy as np

from ..errors import ContractViolation, RetractionSingularityError, TruncationTieWarning
from .base import Manifold, ManifoldKind, Point, Tangent
from .grassmann import qr_positive

TIE_TOL = 1e-12
COLLAPSE_TOL = 1e-14


class FixedRank(Manifold):
    """Embedded manifold of m x n real matrices of rank k.

    A point is the thin SVD (U, s, V) with X = U diag(s) V^T. A tangent at X is
    stored as (M, Up, Vp) meaning U M V^T + Up V^T + U Vp^T with U^T Up = 0 and
    V^T Vp = 0.
    """

    kind = ManifoldKind.FIXED_RANK

    def __init__(self, m, n, k):
        if not 1 <= k <= min(m, n):
            raise ContractViolation(f"FixedRank needs 1 <= k <= min(m, n), got {m}, {n}, {k}")
        self.m, self.n, self.k = int(m), int(n), int(k)

    def __repr__(self):
        return f"FixedRank({self.m}, {self.n}, {self.k})"

    @property
    def ambient_shape(self):
        return (self.m, self.n)

    @property
    def dim(self):
        return (self.m + self.n - self.k) * self.k

    def point(self, U, s, V):
        return Point(self.kind, (U, s, V))

    def from_dense(self, A):
        """Rank-k truncated SVD of a dense matrix."""
        U, s, Vt = np.linalg.svd(np.asarray(A, dtype=float), full_matrices=False)
        return self._truncate(U, s, Vt.T)

    def tangent(self, x, M, Up, Vp):
        return Tangent(x, (M, Up, Vp))

    def tangent_template(self, x):
        U, _, V = x.parts
        return (np.zeros((self.k, self.k)), U, V)

    # -- projection -----------------------------------------------------

    def _from_products(self, x, AV, AtU):
        U, _, V = x.parts
        M = U.T @ AV
        return Tangent(x, (M, AV - U @ M, AtU - V @ M.T))

    def project(self, x, a):
        self._check_point(x)
        a = self._check_ambient(a)
        U, _, V = x.parts
        return self._from_products(x, a @ V, a.T @ U)

    def project_tangent(self, y, xi):
        self._check_point(y)
        Ux, _, Vx = xi.base.parts
        Uy, _, Vy = y.parts
        M, Up, Vp = xi.parts
        VxVy = Vx.T @ Vy
        UxUy = Ux.T @ Uy
        AV = Ux @ (M @ VxVy + Vp.T @ Vy) + Up @ VxVy
        AtU = Vx @ (M.T @ UxUy + Up.T @ Uy) + Vp @ UxUy
        return self._from_products(y, AV, AtU)

    # -- retraction -----------------------------------------------------

    def _truncate(self, U, s, V):
        k = self.k
        if s[k - 1] < COLLAPSE_TOL:
            raise RetractionSingularityError(
                f"rank collapse: singular value {k} is {s[k - 1]:.3e}"
            )
        if len(s) > k and s[k - 1] - s[k] <= TIE_TOL:
            warnings.warn(
                f"singular values {k} and {k + 1} tie within {TIE_TOL:g}; "
                "truncation follows the SVD routine's order",
                TruncationTieWarning,
                stacklevel=3,
            )
        return Point(self.kind, (U[:, :k], s[:k], V[:, :k]))

    def _retract(self, x, eta):
        # X + eta = [U Qu] [[S + M, Rv^T], [Ru, 0]] [V Qv]^T, with a 2k x 2k core.
        U, s, V = x.parts
        M, Up, Vp = eta.parts
        k = self.k
        Qu, Ru = np.linalg.qr(Up)
        Qv, Rv = np.linalg.qr(Vp)
        core = np.zeros((2 * k, 2 * k))
        core[:k, :k] = np.diag(s) + M
        core[:k, k:] = Rv.T
        core[k:, :k] = Ru
        Uc, sc, Vct = np.linalg.svd(core)
        return self._truncate(np.hstack([U, Qu]) @ Uc, sc, np.hstack([V, Qv]) @ Vct.T)

    # -- sampling and dense views --------------------------------------

    def random_point(self, rng):
        U, _ = qr_positive(rng.standard_normal((self.m, self.k)))
        V, _ = qr_positive(rng.standard_normal((self.n, self.k)))
        s = np.sort(rng.uniform(0.5, 1.5, size=self.k))[::-1]
        return Point(self.kind, (U, s, V))

    def to_ambient(self, x):
        U, s, V = x.parts
        return (U * s) @ V.T

    def tangent_to_ambient(self, u):
        U, _, V = u.base.parts
        M, Up, Vp = u.parts
        return U @ M @ V.T + Up @ V.T + U @ Vp.T

    def feasibility_residual(self, x):
        U, s, V = x.parts
        if s.min() <= 0.0:
            return float("inf")
        eye = np.eye(self.k)
        return max(float(np.linalg.norm(U.T @ U - eye)), float(np.linalg.norm(V.T @ V - eye)))
