"""Shared generators and independent oracles for the test suite."""

import numpy as np

import qcqp_stability as q


def random_instance(rng, dim, m):
    """Bounded, Slater-regular random instance with O(1) curvature scales.

    The objective is a random symmetric operator with eigenvalues of
    magnitude in [0.5, 2] and random signs (genuinely nonconvex most of
    the time).  The first constraint is a Euclidean ball of radius in
    [1, 2] around a small random center, which keeps the feasible set
    bounded; extra constraints are well-conditioned PSD ellipsoids
    arranged to hold strictly at the ball center.
    """
    Q = np.linalg.qr(rng.normal(size=(dim, dim)))[0]
    eigs = rng.uniform(0.5, 2.0, dim) * rng.choice([-1.0, 1.0], dim)
    T = Q @ np.diag(eigs) @ Q.T
    c = rng.normal(0.0, 1.0, dim)
    x0 = rng.normal(0.0, 0.3, dim)
    r = rng.uniform(1.0, 2.0)
    cons = [(np.eye(dim), -x0, 0.5 * (x0 @ x0 - r * r))]
    for _ in range(m - 1):
        A = rng.normal(size=(dim, dim))
        Ti = A @ A.T / dim + 0.4 * np.eye(dim)
        Ti *= 1.0 / max(np.linalg.norm(Ti, 2), 1.0)
        ci = rng.normal(0.0, 0.5, dim)
        margin = rng.uniform(0.3, 0.8)
        ai = -(0.5 * x0 @ Ti @ x0 + ci @ x0 + margin)
        cons.append((Ti, ci, ai))
    return q.make_instance(T, c, cons, label=f"random-{dim}d-{m}c")


def power_iteration_norm(M, iters=500, seed=0):
    """Independent spectral-norm oracle: power iteration on M @ M."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    v = rng.normal(size=M.shape[0])
    v /= np.linalg.norm(v)
    A = M @ M
    for _ in range(iters):
        w = A @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
    return float(np.sqrt(v @ (A @ v)))


def kkt_residual(inst, x, lam):
    """Stationarity residual of the Lagrangian at (x, lam)."""
    r = inst.objective.gradient(x)
    for g, l in zip(inst.constraints, lam):
        r = r + l * g.gradient(x)
    return float(np.linalg.norm(r))
