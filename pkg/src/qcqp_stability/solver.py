"""Desk-scale global solver for the nonconvex quadratic program.

Pipeline: feasibility screen (Slater search), unboundedness screen
(certified descent direction in the recession cone), multi-start
augmented-Lagrangian local descent, SLSQP polish, and clustering of
near-optimal points into solution-set representatives.  A brute-force
grid oracle certifies results at dimension <= 4.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize

from .model import (ProblemInstance, ToleranceConfig, constraint_values,
                    eval_objective, is_feasible, spectral_norm)
from .recession import qpr_solve, recession_cone, unboundedness_direction
from .regularity import slater_point


@dataclass(frozen=True)
class SolverConfig:
    restarts: int = 40
    max_iter: int = 300          # inner iterations per augmented-Lagrangian pass
    outer_iter: int = 15
    penalty_init: float = 10.0
    penalty_growth: float = 5.0
    cluster_radius: float = 1e-4
    flat_probe_directions: int = 16
    oracle_resolution: int = 201
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass
class SolveResult:
    status: str                       # Solved | Unbounded | Infeasible | Inconclusive
    value: float                      # -inf Unbounded, +inf Infeasible
    minimizers: list[np.ndarray] = field(default_factory=list)
    diameter: float = 0.0             # spread of the representative set
    multipliers: list[np.ndarray] = field(default_factory=list)
    unbounded_certificate: Optional[np.ndarray] = None
    diagnostics: dict = field(default_factory=dict)


def _augmented_lagrangian(inst, x0, cfg, tols):
    """One multi-start leg: classic AL for inequality constraints."""
    T, c = inst.objective.T, inst.objective.c
    m = inst.m
    lam = np.zeros(m)
    rho = cfg.penalty_init
    x = x0.copy()

    def al_val_grad(x, lam, rho):
        fx = 0.5 * x @ (T @ x) + c @ x
        gx = T @ x + c
        for i, g in enumerate(inst.constraints):
            gi = g(x)
            t = lam[i] + rho * gi
            if t > 0.0:
                fx += (t * t - lam[i] * lam[i]) / (2.0 * rho)
                gx += t * g.gradient(x)
            else:
                fx -= lam[i] * lam[i] / (2.0 * rho)
        return fx, gx

    prev_viol = np.inf
    for _ in range(cfg.outer_iter):
        res = optimize.minimize(
            lambda z: al_val_grad(z, lam, rho), x, jac=True,
            method="L-BFGS-B",
            options={"maxiter": cfg.max_iter, "gtol": 1e-12, "ftol": 1e-15})
        x = res.x
        if m == 0:
            break
        gvals = constraint_values(inst, x)
        viol = float(np.max(np.maximum(gvals, 0.0), initial=0.0))
        lam = np.maximum(0.0, lam + rho * gvals)
        if viol <= tols.feas_tol * 0.1:
            break
        if viol > 0.25 * prev_viol:
            rho *= cfg.penalty_growth
        prev_viol = viol
        if not np.all(np.isfinite(x)) or rho > 1e12:
            break
    return x, lam


def _slsqp_polish(inst, x0):
    cons = [{"type": "ineq",
             "fun": lambda z, g=g: -g(z),
             "jac": lambda z, g=g: -g.gradient(z)} for g in inst.constraints]
    res = optimize.minimize(
        lambda z: eval_objective(inst, z), x0,
        jac=lambda z: inst.objective.gradient(z),
        constraints=cons, method="SLSQP",
        options={"maxiter": 200, "ftol": 1e-16})
    return res.x if np.all(np.isfinite(res.x)) else x0


def _kkt_refine(inst, x0, feas_tol, max_newton: int = 30):
    """Newton iteration on the active-set KKT system for high precision.

    Active constraints are taken from the incumbent; the step solves the
    linearized stationarity + active-feasibility system.  Falls back to
    the input when the iteration stalls, leaves the feasible region, or
    drives a multiplier negative.
    """
    T, c = inst.objective.T, inst.objective.c
    n = inst.dim
    gvals = constraint_values(inst, x0) if inst.m else np.zeros(0)
    scale = 1.0 + float(np.max(np.abs(gvals), initial=0.0))
    active = [i for i in range(inst.m) if gvals[i] >= -1e-4 * scale]
    k = len(active)

    x = x0.copy()
    if k == 0:
        # Unconstrained stationary point: plain Newton on the gradient.
        try:
            for _ in range(3):
                x = x - np.linalg.solve(T, inst.objective.gradient(x))
        except np.linalg.LinAlgError:
            return x0
        if (np.all(np.isfinite(x)) and is_feasible(inst, x, feas_tol)
                and eval_objective(inst, x) <= eval_objective(inst, x0) + 1e-12):
            return x
        return x0

    lam = np.zeros(k)
    G0 = np.stack([inst.constraints[i].gradient(x) for i in active], axis=1)
    sol, _ = optimize.nnls(G0, -inst.objective.gradient(x))
    lam = sol
    for _ in range(max_newton):
        G = np.stack([inst.constraints[i].gradient(x) for i in active], axis=1)
        stat = inst.objective.gradient(x) + G @ lam
        ga = np.array([inst.constraints[i](x) for i in active])
        res = np.concatenate([stat, ga])
        if np.linalg.norm(res) < 1e-13 * scale:
            break
        H = T + sum(lam[j] * inst.constraints[i].T for j, i in enumerate(active))
        J = np.zeros((n + k, n + k))
        J[:n, :n] = H
        J[:n, n:] = G
        J[n:, :n] = G.T
        try:
            step = np.linalg.solve(J, -res)
        except np.linalg.LinAlgError:
            return x0
        x = x + step[:n]
        lam = lam + step[n:]
        if not np.all(np.isfinite(x)) or np.linalg.norm(step) > 1e3 * (1.0 + np.linalg.norm(x0)):
            return x0
    if (np.any(lam < -1e-9) or not is_feasible(inst, x, feas_tol)
            or np.linalg.norm(x - x0) > 1e-1 * (1.0 + np.linalg.norm(x0))):
        return x0
    return x


def _recover_multipliers(inst, x, feas_tol):
    """Nonnegative multipliers for near-active constraints via NNLS."""
    if inst.m == 0:
        return np.zeros(0), float(np.linalg.norm(inst.objective.gradient(x)))
    gvals = constraint_values(inst, x)
    scale = 1.0 + float(np.max(np.abs(gvals)))
    active = [i for i, v in enumerate(gvals) if v >= -1e-5 * scale]
    lam = np.zeros(inst.m)
    grad_f = inst.objective.gradient(x)
    if active:
        G = np.stack([inst.constraints[i].gradient(x) for i in active], axis=1)
        sol, _ = optimize.nnls(G, -grad_f)
        for j, i in enumerate(active):
            lam[i] = sol[j]
    resid = grad_f + sum(lam[i] * inst.constraints[i].gradient(x) for i in range(inst.m))
    return lam, float(np.linalg.norm(resid))


def _cluster(points, values, best, value_tol, cluster_radius):
    """Representatives of all points within value_tol of the best value."""
    reps, rep_vals = [], []
    order = np.argsort(values)
    for idx in order:
        if values[idx] > best + value_tol:
            break
        p = points[idx]
        r = cluster_radius * (1.0 + np.linalg.norm(p))
        if all(np.linalg.norm(p - q) > r for q in reps):
            reps.append(p)
            rep_vals.append(values[idx])
    return reps


def _flat_probe(inst, reps, best, value_tol, feas_tol, rng, n_dirs):
    """Extend representatives along directions where the optimum is flat.

    For each direction the largest step keeping the point feasible and
    the value within value_tol of the best is found by bisection; this
    captures continuum solution sets (and their diameter) that point
    clustering alone would miss.
    """
    if not reps:
        return reps
    n = inst.dim
    base = reps[0]
    dirs = [np.eye(n)[j] * s for j in range(min(n, 8)) for s in (1.0, -1.0)]
    for _ in range(n_dirs):
        u = rng.standard_normal(n)
        dirs.append(u / max(np.linalg.norm(u), 1e-12))
    out = list(reps)
    for d in dirs:
        def ok(t):
            x = base + t * d
            return (is_feasible(inst, x, feas_tol)
                    and eval_objective(inst, x) <= best + value_tol)
        if not ok(1e-7):
            continue
        lo, hi = 0.0, 1.0
        while ok(hi) and hi < 1e6:
            lo, hi = hi, 2.0 * hi
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if ok(mid):
                lo = mid
            else:
                hi = mid
        if lo > 0.0:
            p = base + lo * d
            r = 1e-3 * (1.0 + np.linalg.norm(p))
            if all(np.linalg.norm(p - q) > r for q in out):
                out.append(p)
    return out


def solve_global(inst: ProblemInstance, cfg: SolverConfig = SolverConfig(),
                 tols: ToleranceConfig = ToleranceConfig()) -> SolveResult:
    """Estimate the optimal value and solution set of the instance."""
    rng = np.random.default_rng(cfg.seed)
    value_tol = tols.value_tol * (1.0 + spectral_norm(inst.objective.T))
    feas_tol = tols.feas_tol

    reg = slater_point(inst, tols)
    if reg.status == "Irregular" and reg.margin > feas_tol:
        return SolveResult("Infeasible", np.inf,
                           diagnostics={"regularity": reg.status,
                                        "margin": reg.margin})
    feasible_seed = reg.witness if reg.is_regular else None

    cone = recession_cone(inst, tols)
    verdict = qpr_solve(inst, cone, tols)
    direction = unboundedness_direction(inst, verdict, cone, tols)
    if direction is not None:
        # A feasible point plus a certified descent ray => value is -inf.
        seed_pt = feasible_seed
        if seed_pt is None and is_feasible(inst, np.zeros(inst.dim), feas_tol):
            seed_pt = np.zeros(inst.dim)
        if seed_pt is not None or reg.status != "Irregular":
            return SolveResult("Unbounded", -np.inf,
                               unbounded_certificate=direction,
                               diagnostics={"min_rayleigh": verdict.min_rayleigh})

    # Multi-start local descent.
    data_scale = 1.0 + float(np.linalg.norm(inst.objective.c))
    for g in inst.constraints:
        data_scale = max(data_scale, 1.0 + float(np.linalg.norm(g.c)))
    starts = [np.zeros(inst.dim)]
    if feasible_seed is not None:
        starts.append(feasible_seed)
    while len(starts) < cfg.restarts:
        starts.append(data_scale * rng.standard_normal(inst.dim))

    points, values = [], []
    best_viol = np.inf
    for x0 in starts:
        x, _ = _augmented_lagrangian(inst, x0, cfg, tols)
        if not np.all(np.isfinite(x)):
            continue
        x = _slsqp_polish(inst, x)
        x = _kkt_refine(inst, x, feas_tol)
        gvals = constraint_values(inst, x) if inst.m else np.zeros(0)
        viol = float(np.max(np.maximum(gvals, 0.0), initial=0.0))
        best_viol = min(best_viol, viol)
        if viol <= feas_tol:
            points.append(x)
            values.append(eval_objective(inst, x))

    if not points:
        status = ("Infeasible" if reg.status == "Irregular" and reg.margin > feas_tol
                  else "Inconclusive")
        return SolveResult(status, np.inf,
                           diagnostics={"best_violation": best_viol,
                                        "regularity": reg.status})

    best = float(np.min(values))
    cluster_tol = max(value_tol, 1e-9 * (1.0 + abs(best)))
    reps = _cluster(points, values, best, cluster_tol, cfg.cluster_radius)
    reps = _flat_probe(inst, reps, best, cluster_tol, feas_tol, rng,
                       cfg.flat_probe_directions)
    diameter = 0.0
    for i in range(len(reps)):
        for j in range(i + 1, len(reps)):
            diameter = max(diameter, float(np.linalg.norm(reps[i] - reps[j])))

    mults, kkt = [], []
    for p in reps:
        lam, resid = _recover_multipliers(inst, p, feas_tol)
        mults.append(lam)
        kkt.append(resid)

    return SolveResult("Solved", best, reps, diameter, mults,
                       diagnostics={"restarts": len(starts),
                                    "best_violation": best_viol,
                                    "kkt_residuals": kkt,
                                    "regularity": reg.status,
                                    "qpr_trivial": verdict.trivial})


def optimal_value(inst: ProblemInstance, cfg: SolverConfig = SolverConfig(),
                  tols: ToleranceConfig = ToleranceConfig()) -> float:
    """phi(omega): +inf on empty feasible set, -inf when unbounded below."""
    return solve_global(inst, cfg, tols).value


def solution_set_estimate(inst: ProblemInstance, cfg: SolverConfig = SolverConfig(),
                          tols: ToleranceConfig = ToleranceConfig()) -> list[np.ndarray]:
    """Clustered minimizer representatives (empty unless status is Solved)."""
    res = solve_global(inst, cfg, tols)
    return res.minimizers if res.status == "Solved" else []


def brute_force_oracle(inst: ProblemInstance, box, resolution: int,
                       value_tol: float = 1e-9,
                       feas_tol: float = 1e-9) -> tuple[float, list[np.ndarray]]:
    """Exhaustive grid minimization; the independent certification path.

    ``box`` is a (lo, hi) pair of length-dim arrays.  Returns +inf and an
    empty argmin list when no grid point is feasible.
    """
    n = inst.dim
    if n > 4:
        raise ValueError("grid oracle limited to dimension <= 4")
    lo = np.asarray(box[0], dtype=float).ravel()
    hi = np.asarray(box[1], dtype=float).ravel()
    if lo.size != n or hi.size != n:
        raise ValueError("box bounds must match the instance dimension")
    axes = [np.linspace(lo[j], hi[j], resolution) for j in range(n)]
    grids = np.meshgrid(*axes, indexing="ij")
    X = np.stack([g.ravel() for g in grids], axis=1)   # (N, n)

    feas = np.ones(X.shape[0], dtype=bool)
    for g in inst.constraints:
        vals = 0.5 * np.einsum("ij,jk,ik->i", X, g.T, X) + X @ g.c + g.alpha
        feas &= vals <= feas_tol
    if not np.any(feas):
        return np.inf, []
    Xf = X[feas]
    obj = inst.objective
    fvals = 0.5 * np.einsum("ij,jk,ik->i", Xf, obj.T, Xf) + Xf @ obj.c
    best = float(np.min(fvals))
    tol = max(value_tol, 1e-12 * (1.0 + abs(best)))
    argmins = [Xf[i].copy() for i in np.flatnonzero(fvals <= best + tol)]
    return best, argmins
