"""Recession cone of the feasible set and the associated homogeneous program.

With PSD constraint operators the recession cone of F(omega) is

    C = { v : T_i v = 0 and <c_i, v> <= 0 for all i },

i.e. the joint null space of the T_i cut by finitely many halfspaces.
The homogeneous program minimizes 1/2 <v, T v> over C; by degree-2
homogeneity its solution set is {0} exactly when <v, T v> > 0 for every
nonzero v in C.  Deciding that sign condition is a copositivity question
over a polyhedral cone: we answer it exactly on subspaces (eigenvalues),
by face enumeration for up to 20 halfspaces, and by quasi-random
sampling with projected-gradient refinement beyond that, flagging
near-boundary sampling-only answers as inconclusive.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg

from .model import ProblemInstance, ToleranceConfig, spectral_norm

FACE_ENUM_LIMIT = 20
SAMPLES_PER_KERNEL_DIM = 20_000


@dataclass(frozen=True)
class RecessionCone:
    """Orthonormal kernel basis Z plus halfspace rows A (in kernel coordinates).

    The cone is { Z y : A y <= 0 }; an empty basis means the cone is {0}.
    """

    ambient_dim: int
    kernel_basis: np.ndarray      # (n, k), orthonormal columns
    halfspace_matrix: np.ndarray  # (p, k)

    @property
    def kernel_dim(self) -> int:
        return self.kernel_basis.shape[1]

    @property
    def is_trivial(self) -> bool:
        return self.kernel_dim == 0


@dataclass(frozen=True)
class QprVerdict:
    trivial: bool                    # True <=> Sol of the homogeneous program is {0}
    witness: Optional[np.ndarray]    # unit cone vector with <v,Tv> <= value tol
    min_rayleigh: float              # best found <v,Tv> over unit cone vectors; +inf if cone {0}
    inconclusive: bool = False       # sampling-only path landed near the sign boundary


def recession_cone(inst: ProblemInstance,
                   cfg: ToleranceConfig = ToleranceConfig()) -> RecessionCone:
    """Joint null space of the constraint operators, cut to kernel coordinates.

    The kernel rank is decided by singular values below
    kernel_tol * sigma_max of the stacked operator matrix.
    """
    n = inst.dim
    if inst.m == 0:
        return RecessionCone(n, np.eye(n), np.zeros((0, n)))
    stacked = np.vstack([g.T for g in inst.constraints])
    sigma = np.linalg.svd(stacked, compute_uv=False)
    smax = sigma[0] if sigma.size else 0.0
    if smax <= 0.0:
        Z = np.eye(n)
    else:
        Z = linalg.null_space(stacked, rcond=cfg.kernel_tol)
    if Z.shape[1] == 0:
        return RecessionCone(n, np.zeros((n, 0)), np.zeros((0, 0)))
    rows = []
    for g in inst.constraints:
        a = g.c @ Z
        if np.linalg.norm(a) > cfg.kernel_tol * (1.0 + np.linalg.norm(g.c)):
            rows.append(a)
    A = np.stack(rows) if rows else np.zeros((0, Z.shape[1]))
    return RecessionCone(n, Z, A)


def contains(cone: RecessionCone, v: np.ndarray, tol: float = 1e-8) -> bool:
    """Membership test: v in span(Z) within tol, all halfspaces within tol."""
    v = np.asarray(v, dtype=float).ravel()
    if v.size != cone.ambient_dim:
        raise ValueError("vector length does not match ambient dimension")
    scale = 1.0 + np.linalg.norm(v)
    if cone.is_trivial:
        return bool(np.linalg.norm(v) <= tol * scale)
    y = cone.kernel_basis.T @ v
    if np.linalg.norm(v - cone.kernel_basis @ y) > tol * scale:
        return False
    if cone.halfspace_matrix.size and np.any(cone.halfspace_matrix @ y > tol * scale):
        return False
    return True


def _project_halfspaces(A: np.ndarray, y: np.ndarray, sweeps: int = 30) -> np.ndarray:
    """Cyclic projection onto {A y <= 0} (good enough as a refinement step)."""
    y = y.copy()
    for _ in range(sweeps):
        viol = A @ y
        worst = int(np.argmax(viol))
        if viol[worst] <= 0.0:
            break
        a = A[worst]
        y = y - (viol[worst] / (a @ a)) * a
    return y


def _face_candidates(R: np.ndarray, A: np.ndarray, tol: float):
    """Eigen-candidates from every face subspace of {A y <= 0}."""
    k = R.shape[0]
    p = A.shape[0]
    cands = []
    for r in range(p + 1):
        for S in itertools.combinations(range(p), r):
            if S:
                N = linalg.null_space(A[list(S)])
                if N.shape[1] == 0:
                    continue
            else:
                N = np.eye(k)
            red = N.T @ R @ N
            w, V = np.linalg.eigh(0.5 * (red + red.T))
            u = V[:, 0]
            y = N @ u
            ny = np.linalg.norm(y)
            if ny < 1e-12:
                continue
            y /= ny
            for cand in (y, -y):
                if A.size == 0 or np.all(A @ cand <= tol):
                    cands.append((float(cand @ R @ cand), cand))
    return cands


def _sampled_candidates(R: np.ndarray, A: np.ndarray, rng, n_samples: int, tol: float):
    """Rejection-sampled unit directions plus projected-gradient refinement."""
    k = R.shape[0]
    cands = []
    batch = max(256, n_samples // 32)
    drawn = 0
    best = None
    while drawn < n_samples:
        Y = rng.standard_normal((batch, k))
        drawn += batch
        Y /= np.maximum(np.linalg.norm(Y, axis=1, keepdims=True), 1e-12)
        if A.size:
            ok = np.all(Y @ A.T <= tol, axis=1)
            Y = Y[ok]
        if Y.shape[0] == 0:
            continue
        vals = np.einsum("ij,jk,ik->i", Y, R, Y)
        i = int(np.argmin(vals))
        if best is None or vals[i] < best[0]:
            best = (float(vals[i]), Y[i].copy())
    if best is None:
        return cands
    val, y = best
    # Projected-gradient refinement of the Rayleigh quotient on the cone.
    step = 0.5 / (1.0 + spectral_norm(R))
    for _ in range(200):
        grad = 2.0 * (R @ y - (y @ R @ y) * y)
        y_new = y - step * grad
        if A.size:
            y_new = _project_halfspaces(A, y_new)
        ny = np.linalg.norm(y_new)
        if ny < 1e-12:
            break
        y_new /= ny
        if y_new @ R @ y_new < y @ R @ y:
            y = y_new
        else:
            step *= 0.5
            if step < 1e-12:
                break
    if A.size == 0 or np.all(A @ y <= tol):
        cands.append((float(y @ R @ y), y))
    cands.append(best)
    return cands


def qpr_solve(inst: ProblemInstance, cone: RecessionCone,
              cfg: ToleranceConfig = ToleranceConfig()) -> QprVerdict:
    """Decide whether the homogeneous program has only the zero solution.

    Layered: trivial cone -> yes; pure subspace -> smallest eigenvalue of
    the reduced objective; general polyhedral cone -> face enumeration
    (for <= 20 halfspaces) combined with sampling refinement.
    """
    T = inst.objective.T
    tol = cfg.value_tol * (1.0 + spectral_norm(T))
    if cone.is_trivial:
        return QprVerdict(True, None, np.inf)

    Z = cone.kernel_basis
    A = cone.halfspace_matrix
    R = Z.T @ T @ Z
    R = 0.5 * (R + R.T)

    if A.shape[0] == 0:
        w, V = np.linalg.eigh(R)
        lam, u = float(w[0]), V[:, 0]
        if lam > tol:
            return QprVerdict(True, None, lam)
        return QprVerdict(False, Z @ u, lam)

    membership_tol = 1e-10 * (1.0 + float(np.linalg.norm(A, 2)))
    cands = []
    sampling_only = A.shape[0] > FACE_ENUM_LIMIT
    if not sampling_only:
        cands.extend(_face_candidates(R, A, membership_tol))
    rng = np.random.default_rng(cfg.seed)
    n_samples = SAMPLES_PER_KERNEL_DIM * cone.kernel_dim
    cands.extend(_sampled_candidates(R, A, rng, n_samples, membership_tol))

    if not cands:
        # The cone has empty interior relative to the kernel and no face
        # candidate survived; only the origin remains.
        return QprVerdict(True, None, np.inf)

    val, y = min(cands, key=lambda t: t[0])
    inconclusive = sampling_only and -tol < val < tol
    if val > tol:
        return QprVerdict(True, None, val, inconclusive)
    return QprVerdict(False, Z @ (y / np.linalg.norm(y)), val, inconclusive)


def unboundedness_direction(inst: ProblemInstance, verdict: QprVerdict,
                            cone: RecessionCone,
                            cfg: ToleranceConfig = ToleranceConfig()) -> Optional[np.ndarray]:
    """Unit cone direction along which the objective decreases without bound.

    A witness with <v,Tv> < 0 qualifies outright; with <v,Tv> ~ 0 the
    objective still escapes to -inf when <c, v> < 0 (linearly).
    """
    if verdict.trivial or verdict.witness is None:
        return None
    T, c = inst.objective.T, inst.objective.c
    tol = cfg.value_tol * (1.0 + spectral_norm(T))
    w = verdict.witness
    ray = float(w @ T @ w)
    if ray < -tol:
        return w
    if abs(ray) <= tol:
        if float(c @ w) < -tol:
            return w
        neg = -w
        if float(c @ neg) < -tol and contains(cone, neg, 1e-8):
            return neg
    return None
