"""Slater regularity of the constraint system.

The system g_i(x) <= 0, i = 1..m, is regular when some point makes every
constraint strictly negative.  Because each g_i is convex, the pointwise
maximum s(x) = max_i g_i(x) is convex, so its minimum can be certified
locally: we run multi-start subgradient descent with diminishing steps
and polish the best point with an epigraph reformulation (min t subject
to g_i(x) <= t).  A strictly negative best value certifies regularity;
a nonnegative minimum with a vanishing subgradient certifies the system
is irregular (either infeasible or feasible with empty interior).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize

from .model import ProblemInstance, ToleranceConfig, constraint_values

N_STARTS = 20


@dataclass(frozen=True)
class RegularityResult:
    status: str                    # "Regular" | "Irregular" | "Inconclusive"
    witness: Optional[np.ndarray]  # Slater point when Regular
    margin: float                  # best found value of inf_x max_i g_i
    note: str = ""

    @property
    def is_regular(self) -> bool:
        return self.status == "Regular"


def _max_constraint(inst: ProblemInstance, x: np.ndarray) -> float:
    return float(np.max(constraint_values(inst, x)))


def _subgradient_descent(inst, x0, steps, step_scale):
    x = x0.copy()
    best_x, best_s = x.copy(), _max_constraint(inst, x)
    for k in range(1, steps + 1):
        vals = constraint_values(inst, x)
        i = int(np.argmax(vals))
        g = inst.constraints[i].gradient(x)
        norm = np.linalg.norm(g)
        if norm < 1e-14:
            break
        x = x - (step_scale / np.sqrt(k)) * g / norm
        s = _max_constraint(inst, x)
        if s < best_s:
            best_s, best_x = s, x.copy()
    return best_x, best_s


def _epigraph_polish(inst, x0):
    """Minimize max_i g_i via min t s.t. g_i(x) <= t (smooth, convex)."""
    n = inst.dim
    z0 = np.concatenate([x0, [_max_constraint(inst, x0)]])

    def obj(z):
        return z[-1]

    def obj_grad(z):
        g = np.zeros(n + 1)
        g[-1] = 1.0
        return g

    cons = []
    for gfun in inst.constraints:
        cons.append({
            "type": "ineq",
            "fun": lambda z, gf=gfun: z[-1] - gf(z[:-1]),
            "jac": lambda z, gf=gfun: np.concatenate([-gf.gradient(z[:-1]), [1.0]]),
        })
    res = optimize.minimize(obj, z0, jac=obj_grad, constraints=cons,
                            method="SLSQP", options={"maxiter": 200, "ftol": 1e-14})
    x = res.x[:-1]
    return x, _max_constraint(inst, x)


def _min_subgradient_norm(inst, x, active_tol):
    """Distance from 0 to the convex hull of active-constraint gradients."""
    vals = constraint_values(inst, x)
    s = float(np.max(vals))
    active = [i for i, v in enumerate(vals) if v >= s - active_tol]
    G = np.stack([inst.constraints[i].gradient(x) for i in active])  # (k, n)
    k = G.shape[0]
    if k == 1:
        return float(np.linalg.norm(G[0]))
    lam0 = np.full(k, 1.0 / k)
    H = G @ G.T

    def f(lam):
        return float(lam @ H @ lam)

    def jac(lam):
        return 2.0 * H @ lam

    res = optimize.minimize(
        f, lam0, jac=jac, method="SLSQP",
        bounds=[(0.0, 1.0)] * k,
        constraints=[{"type": "eq", "fun": lambda lam: np.sum(lam) - 1.0,
                      "jac": lambda lam: np.ones(k)}],
        options={"maxiter": 100, "ftol": 1e-16},
    )
    return float(np.sqrt(max(res.fun, 0.0)))


def slater_point(inst: ProblemInstance, cfg: ToleranceConfig = ToleranceConfig(),
                 budget: int = 400) -> RegularityResult:
    """Search for a Slater point; tri-state outcome.

    Regular: found x with max_i g_i(x) < -feas_tol (witness attached).
    Irregular: the certified convex minimum is >= -feas_tol and the
    minimal subgradient norm at the best point is below 1e-6.
    Inconclusive: budget exhausted near the decision boundary.
    """
    if inst.m == 0:
        return RegularityResult("Regular", np.zeros(inst.dim), -np.inf,
                                "unconstrained by convention")
    rng = np.random.default_rng(cfg.seed)
    data_scale = 1.0 + max((float(np.linalg.norm(g.c)) for g in inst.constraints), default=0.0)

    best_x, best_s = None, np.inf
    starts = [np.zeros(inst.dim)]
    for _ in range(N_STARTS - 1):
        u = rng.standard_normal(inst.dim)
        u /= max(np.linalg.norm(u), 1e-12)
        starts.append(data_scale * rng.uniform(0.0, 1.0) * u)
    for x0 in starts:
        x, s = _subgradient_descent(inst, x0, budget // N_STARTS, data_scale)
        if s < best_s:
            best_x, best_s = x, s
        if best_s < -cfg.feas_tol:
            break

    # Polish the incumbent with the smooth epigraph program.
    x, s = _epigraph_polish(inst, best_x)
    if np.isfinite(s) and np.all(np.isfinite(x)) and s < best_s:
        best_x, best_s = x, s

    if best_s < -cfg.feas_tol:
        return RegularityResult("Regular", best_x, best_s)

    grad_dist = _min_subgradient_norm(inst, best_x, active_tol=1e-8 * (1.0 + abs(best_s)))
    if grad_dist <= 1e-6:
        case = "infeasible" if best_s > cfg.feas_tol else "feasible boundary, empty interior"
        return RegularityResult("Irregular", None, best_s,
                                f"stationary minimum of max_i g_i; evidence suggests {case}")
    return RegularityResult("Inconclusive", None, best_s,
                            f"budget exhausted; residual subgradient norm {grad_dist:.2e}")


def regularity_margin(inst: ProblemInstance, cfg: ToleranceConfig = ToleranceConfig()) -> float:
    """Best found value of inf_x max_i g_i; -inf when m = 0."""
    return slater_point(inst, cfg).margin
