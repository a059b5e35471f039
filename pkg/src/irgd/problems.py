"""Cost functions for the experiments plus seeded instance generation.

Every problem exposes ``cost(x)``, ``egrad(x)`` (Euclidean gradient of the
ambient representation) and ``rgrad(x)``, plus ``lipschitz``, the constant L
used for stepsize caps and error bounds.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation
from .manifolds import FixedRank, Grassmann, Sphere


@dataclass(frozen=True)
class DatasetManifest:
    source: str  # "synthetic-gaussian" or "mnist-idx"
    params: dict
    digest: str


def digest_arrays(*arrays):
    h = hashlib.sha256()
    for a in arrays:
        a = np.ascontiguousarray(a)
        h.update(str((a.dtype.str, a.shape)).encode())
        h.update(a.tobytes())
    return h.hexdigest()


def power_lambda_max(H, iters=100, seed=0):
    """Dominant eigenvalue of a symmetric matrix by power iteration
    (the largest eigenvalue when H is PSD)."""
    v = np.random.default_rng(seed).standard_normal(H.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        w = H @ v
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            return 0.0
        v = w / nrm
        lam = float(v @ (H @ v))
    return lam


# -- matrix completion ----------------------------------------------------


@dataclass(frozen=True, eq=False)
class McInstance:
    A: np.ndarray
    mask: np.ndarray
    k: int
    manifest: DatasetManifest | None = None
    rows: np.ndarray = field(init=False, repr=False)
    cols: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        mask = np.asarray(self.mask, dtype=bool)
        if A.shape != mask.shape:
            raise ContractViolation(f"A {A.shape} and mask {mask.shape} differ in shape")
        if not mask.any():
            raise ContractViolation("observation mask is empty")
        if not np.all(np.isfinite(A)):
            raise ContractViolation("data matrix has non-finite entries")
        rows, cols = np.nonzero(mask)
        for name, val in (("A", A), ("mask", mask), ("rows", rows), ("cols", cols)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def shape(self):
        return self.A.shape


def _observed_entries(inst, X):
    U, s, V = X.parts
    if U.shape[0] != inst.A.shape[0] or V.shape[0] != inst.A.shape[1]:
        raise ContractViolation("point and instance dimensions differ")
    return np.einsum("ij,j,ij->i", U[inst.rows], s, V[inst.cols])


def mc_cost(inst, X):
    """Sum of squared residuals over the observed entries."""
    r = _observed_entries(inst, X) - inst.A[inst.rows, inst.cols]
    return float(r @ r)


def mc_egrad(inst, X):
    G = np.zeros(inst.A.shape)
    G[inst.rows, inst.cols] = 2.0 * (_observed_entries(inst, X) - inst.A[inst.rows, inst.cols])
    return G


def gen_mc_instance(m, n, k, mask_prob=0.5, seed=0):
    """Rank-k Gaussian ground truth observed on a Bernoulli(mask_prob) mask."""
    if not 0.0 < mask_prob <= 1.0:
        raise ContractViolation(f"mask_prob must lie in (0, 1], got {mask_prob}")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, k)) @ rng.standard_normal((n, k)).T
    for attempt in range(1, 11):
        mask = np.random.default_rng([seed, attempt]).random((m, n)) < mask_prob
        if mask.any():
            break
    else:
        raise ContractViolation("could not draw a nonempty mask in 10 attempts")
    params = {"m": m, "n": n, "k": k, "mask_prob": mask_prob, "seed": seed}
    manifest = DatasetManifest("synthetic-gaussian", params, digest_arrays(A, mask))
    return McInstance(A, mask, k, manifest)


class McProblem:
    def __init__(self, inst, lipschitz=None):
        self.inst = inst
        m, n = inst.shape
        self.manifold = FixedRank(m, n, inst.k)
        # Euclidean Hessian is 2 P_Omega, a 0/1 mask scaled by 2.
        self.lipschitz = 2.0 if lipschitz is None else float(lipschitz)

    def __repr__(self):
        return f"McProblem({self.manifold!r})"

    def cost(self, x):
        return mc_cost(self.inst, x)

    def egrad(self, x):
        return mc_egrad(self.inst, x)

    def rgrad(self, x):
        return self.manifold.egrad_to_rgrad(x, self.egrad(x))


# -- PCA on the Grassmannian ---------------------------------------------


@dataclass(frozen=True, eq=False)
class PcaInstance:
    H: np.ndarray
    p: int
    manifest: DatasetManifest | None = None

    def __post_init__(self):
        H = np.asarray(self.H, dtype=float)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise ContractViolation(f"H must be square, got {H.shape}")
        if np.linalg.norm(H - H.T) > 1e-10:
            raise ContractViolation("H is not symmetric")
        if not 1 <= self.p < H.shape[0]:
            raise ContractViolation(f"need 1 <= p < n, got p={self.p}")
        H.setflags(write=False)
        object.__setattr__(self, "H", H)

    @property
    def n(self):
        return self.H.shape[0]

    def optimal_value(self):
        w = np.linalg.eigvalsh(self.H)
        return -0.5 * float(w[-self.p:].sum())


def pca_cost(inst, X):
    (B,) = X.parts
    return -0.5 * float(np.sum(B * (inst.H @ B)))


def pca_egrad(inst, X):
    return -(inst.H @ X.parts[0])


def gen_pca_instance(n, p, seed=0):
    """H = A A^T with A an n x p standard Gaussian matrix."""
    if not 1 <= p < n:
        raise ContractViolation(f"need 1 <= p < n, got n={n}, p={p}")
    A = np.random.default_rng(seed).standard_normal((n, p))
    H = A @ A.T
    H = 0.5 * (H + H.T)
    params = {"n": n, "p": p, "seed": seed}
    return PcaInstance(H, p, DatasetManifest("synthetic-gaussian", params, digest_arrays(H)))


class PcaProblem:
    def __init__(self, inst, lipschitz=None):
        self.inst = inst
        self.manifold = Grassmann(inst.n, inst.p)
        self.lipschitz = 2.0 * power_lambda_max(inst.H) if lipschitz is None else float(lipschitz)

    def __repr__(self):
        return f"PcaProblem({self.manifold!r})"

    def cost(self, x):
        return pca_cost(self.inst, x)

    def egrad(self, x):
        return pca_egrad(self.inst, x)

    def rgrad(self, x):
        return self.manifold.egrad_to_rgrad(x, self.egrad(x))


# -- sphere Rayleigh quotient (test geometry) -----------------------------


class SphereRayleigh:
    """f(x) = -x^T H x on the unit sphere; minimum -lambda_max(H)."""

    def __init__(self, H, lipschitz=None):
        H = np.asarray(H, dtype=float)
        if H.ndim == 1:
            H = np.diag(H)
        if np.linalg.norm(H - H.T) > 1e-10:
            raise ContractViolation("H is not symmetric")
        H.setflags(write=False)
        self.H = H
        self.manifold = Sphere(H.shape[0])
        if lipschitz is None:
            lipschitz = 2.0 * abs(power_lambda_max(H))
        self.lipschitz = float(lipschitz)

    def __repr__(self):
        return f"SphereRayleigh(n={self.H.shape[0]})"

    def optimal_value(self):
        return -float(np.linalg.eigvalsh(self.H)[-1])

    def cost(self, x):
        v = x.parts[0]
        return -float(v @ (self.H @ v))

    def egrad(self, x):
        return -2.0 * (self.H @ x.parts[0])

    def rgrad(self, x):
        return self.manifold.egrad_to_rgrad(x, self.egrad(x))


def sphere_rayleigh(H, lipschitz=None):
    return SphereRayleigh(H, lipschitz)


def verify_manifest(manifest):
    """Regenerate (synthetic) or reload (IDX) the data and compare digests."""
    if manifest.source == "mnist-idx":
        from .mnist import file_digest

        return file_digest(manifest.params["path"]) == manifest.digest
    params = dict(manifest.params)
    if "k" in params:
        inst = gen_mc_instance(**params)
    else:
        inst = gen_pca_instance(**params)
    return inst.manifest.digest == manifest.digest
