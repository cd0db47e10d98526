"""Empirical stability harness.

Samples perturbed instances omega' within a shrinking radius schedule
around a base instance and measures, per radius:

  usc_excess             worst one-sided distance from perturbed
                         minimizers to the base solution set;
  lsc_deficiency         worst one-sided distance from base solution
                         representatives to perturbed solution sets;
  value_gap              worst |phi(omega') - phi(omega)|;
  lipschitz_quotient_max worst difference quotient of phi;
  infeasible/unbounded   fraction of samples whose value escaped to
                         +inf / -inf.

Semicontinuity at the base point is corroborated when a modulus keeps
decreasing along the schedule, and refuted when a directed perturbation
family keeps it bounded away from zero.  The harness also evaluates the
three structural conditions (trivial recession program, Slater
regularity, singleton solution set) that govern which properties are
predicted to hold, and computes elliptic-plus-finite-rank splittings of
the objective form with the admissible perturbation radius they imply.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import optimize

from .model import (ProblemInstance, QuadraticFunction, ToleranceConfig,
                    eval_objective, is_feasible, make_instance,
                    omega_distance, spectral_norm, validate)
from .recession import qpr_solve, recession_cone
from .regularity import slater_point
from .solver import SolveResult, SolverConfig, solve_global

ALL_COMPONENTS = frozenset({"T", "c", "T_i", "c_i", "alpha_i"})


@dataclass(frozen=True)
class PerturbationSpec:
    radius_schedule: tuple[float, ...] = (0.1, 0.03, 0.01)
    samples_per_radius: int = 8
    components: frozenset = ALL_COMPONENTS
    seed: int = 0
    psd_repair: bool = True

    def __post_init__(self):
        sched = tuple(float(d) for d in self.radius_schedule)
        if any(d < 0 for d in sched):
            raise ValueError("radii must be nonnegative")
        if any(a <= b for a, b in zip(sched, sched[1:])):
            raise ValueError("radius schedule must be strictly decreasing")
        object.__setattr__(self, "radius_schedule", sched)
        object.__setattr__(self, "components", frozenset(self.components))


@dataclass
class RadiusRow:
    delta: float
    usc_excess: float = 0.0
    lsc_deficiency: float = 0.0
    value_gap: float = 0.0
    lipschitz_quotient_max: float = 0.0
    infeasible_fraction: float = 0.0
    unbounded_fraction: float = 0.0


@dataclass
class ConditionReport:
    cond_i: Optional[bool]       # recession program solved only by 0
    cond_ii: Optional[bool]      # Slater regularity
    cond_iii: Optional[bool]     # singleton solution set
    predictions: dict = field(default_factory=dict)
    value: float = np.nan
    details: dict = field(default_factory=dict)


@dataclass
class StabilityReport:
    rows: list[RadiusRow]
    conditions: Optional[ConditionReport] = None
    base_value: float = np.nan
    applicable: bool = True
    note: str = ""


# ---------------------------------------------------------------------------
# Perturbation sampling


def _random_symmetric(rng, n, norm_bound):
    G = rng.standard_normal((n, n))
    S = 0.5 * (G + G.T)
    s = spectral_norm(S)
    if s == 0.0:
        return S
    return S * (norm_bound * rng.uniform(0.2, 1.0) / s)


def _psd_clip(M):
    w, V = np.linalg.eigh(M)
    return (V * np.maximum(w, 0.0)) @ V.T


def _perturb_once(inst, rng, delta, components, psd_repair):
    T = inst.objective.T.copy()
    c = inst.objective.c.copy()
    n = inst.dim
    if "T" in components:
        T = T + _random_symmetric(rng, n, delta)
    if "c" in components:
        u = rng.standard_normal(n)
        u /= max(np.linalg.norm(u), 1e-12)
        c = c + delta * rng.uniform(0.0, 1.0) * u
    cons = []
    for g in inst.constraints:
        Ti, ci, ai = g.T.copy(), g.c.copy(), g.alpha
        if "T_i" in components:
            Ti = Ti + _random_symmetric(rng, n, delta)
            if psd_repair:
                Ti = _psd_clip(Ti)
        if "c_i" in components:
            u = rng.standard_normal(n)
            u /= max(np.linalg.norm(u), 1e-12)
            ci = ci + delta * rng.uniform(0.0, 1.0) * u
        if "alpha_i" in components:
            ai = ai + rng.uniform(-delta, delta)
        cons.append((Ti, ci, ai))
    return make_instance(T, c, cons, label=inst.label + "+noise")


def sample_perturbations(inst: ProblemInstance, spec: PerturbationSpec,
                         delta: float) -> list[ProblemInstance]:
    """Draw samples within omega-distance delta of the base instance.

    PSD repair (eigenvalue clipping at zero) keeps sampled constraint
    operators inside the convex class; the clip is charged against the
    budget by rescaling the raw perturbation until the post-repair
    distance fits under delta.

    Sample j draws its direction from a radius-independent stream, so
    the j-th samples at two radii are the same perturbation at two
    scales; ratios of per-radius moduli then compare like with like.
    """
    out = []
    for j in range(spec.samples_per_radius):
        if delta == 0.0:
            out.append(inst)
            continue
        d = delta
        for _ in range(8):
            rng = np.random.default_rng([spec.seed, j])
            cand = _perturb_once(inst, rng, d, spec.components, spec.psd_repair)
            if omega_distance(inst, cand) <= delta:
                out.append(cand)
                break
            d *= 0.5
        else:
            out.append(inst)
    return out


# Directed (adversarial) families drawn from the necessity arguments:
# a downward shift of the objective form breaks the trivial-recession
# condition, a separating linear tilt splits a non-singleton solution
# set, and a constant shift of the constraints voids feasibility.

def directed_objective_shift(inst: ProblemInstance, eps: float) -> ProblemInstance:
    """T <- T - eps*I (attacks the trivial-recession condition)."""
    return make_instance(inst.objective.T - eps * np.eye(inst.dim), inst.objective.c,
                         [(g.T, g.c, g.alpha) for g in inst.constraints],
                         label=inst.label + f"-eps*I({eps})")


def directed_objective_lift(inst: ProblemInstance, eps: float) -> ProblemInstance:
    """T <- T + eps*I (restores ellipticity; collapses flat solution sets)."""
    return directed_objective_shift(inst, -eps)


def directed_solution_split(inst: ProblemInstance, eps: float,
                            cbar: np.ndarray) -> ProblemInstance:
    """c <- c + eps*cbar with a unit separation direction cbar."""
    cbar = np.asarray(cbar, dtype=float)
    cbar = cbar / max(np.linalg.norm(cbar), 1e-12)
    return make_instance(inst.objective.T, inst.objective.c + eps * cbar,
                         [(g.T, g.c, g.alpha) for g in inst.constraints],
                         label=inst.label + f"+eps*cbar({eps})")


def directed_infeasibility(inst: ProblemInstance, eps: float) -> ProblemInstance:
    """alpha_i <- alpha_i + eps (empties a boundary-regular feasible set)."""
    return make_instance(inst.objective.T, inst.objective.c,
                         [(g.T, g.c, g.alpha + eps) for g in inst.constraints],
                         label=inst.label + f"+alpha({eps})")


# ---------------------------------------------------------------------------
# Distances to (estimated) solution sets


def distance_to_solution_set(inst: ProblemInstance, result: SolveResult,
                             x: np.ndarray,
                             tols: ToleranceConfig = ToleranceConfig()) -> float:
    """Distance from x to the near-optimal feasible set of ``inst``.

    The representative list alone undersells continuum solution sets, so
    the distance is refined by projecting x onto
    { z feasible : f(z) <= value + eps } with SLSQP.
    """
    x = np.asarray(x, dtype=float)
    if result.status != "Solved" or not result.minimizers:
        return np.inf
    d_rep = min(float(np.linalg.norm(x - p)) for p in result.minimizers)
    eps_sol = max(tols.value_tol * (1.0 + abs(result.value)), 1e-9)
    feas_pad = tols.feas_tol

    cons = [{"type": "ineq",
             "fun": lambda z, g=g: -g(z),
             "jac": lambda z, g=g: -g.gradient(z)} for g in inst.constraints]
    cons.append({"type": "ineq",
                 "fun": lambda z: result.value + eps_sol - eval_objective(inst, z),
                 "jac": lambda z: -inst.objective.gradient(z)})

    best = d_rep
    nearest = min(result.minimizers, key=lambda p: np.linalg.norm(x - p))
    for z0 in (nearest, x):
        res = optimize.minimize(
            lambda z: float(np.sum((z - x) ** 2)), z0,
            jac=lambda z: 2.0 * (z - x),
            constraints=cons, method="SLSQP",
            options={"maxiter": 120, "ftol": 1e-14})
        z = res.x
        if not np.all(np.isfinite(z)):
            continue
        if (is_feasible(inst, z, 10.0 * feas_pad)
                and eval_objective(inst, z) <= result.value + 2.0 * eps_sol):
            best = min(best, float(np.linalg.norm(z - x)))
    return best


# ---------------------------------------------------------------------------
# Per-radius estimates


def _solve_samples(inst, spec, delta, cfg, tols):
    samples = sample_perturbations(inst, spec, delta)
    solved = []
    n_inf = n_unb = 0
    for s in samples:
        r = solve_global(s, cfg, tols)
        if r.status == "Infeasible":
            n_inf += 1
        elif r.status == "Unbounded":
            n_unb += 1
        elif r.status == "Solved":
            solved.append((s, r))
    k = max(len(samples), 1)
    return samples, solved, n_inf / k, n_unb / k


def usc_estimate(inst: ProblemInstance, spec: PerturbationSpec,
                 cfg: SolverConfig = SolverConfig(),
                 tols: ToleranceConfig = ToleranceConfig(),
                 base: Optional[SolveResult] = None) -> StabilityReport:
    """Per-radius worst excess of perturbed solution sets over the base one."""
    base = base or solve_global(inst, cfg, tols)
    if base.status != "Solved":
        return StabilityReport([], base_value=base.value, applicable=False,
                               note=f"base problem status {base.status}")
    rows = []
    for delta in spec.radius_schedule:
        _, solved, f_inf, f_unb = _solve_samples(inst, spec, delta, cfg, tols)
        excess = 0.0
        for _, r in solved:
            for xp in r.minimizers:
                excess = max(excess, distance_to_solution_set(inst, base, xp, tols))
        rows.append(RadiusRow(delta, usc_excess=excess,
                              infeasible_fraction=f_inf, unbounded_fraction=f_unb))
    return StabilityReport(rows, base_value=base.value)


def lsc_estimate(inst: ProblemInstance, spec: PerturbationSpec,
                 cfg: SolverConfig = SolverConfig(),
                 tols: ToleranceConfig = ToleranceConfig(),
                 base: Optional[SolveResult] = None) -> StabilityReport:
    """Per-radius worst distance from base representatives to perturbed sets."""
    base = base or solve_global(inst, cfg, tols)
    if base.status != "Solved":
        return StabilityReport([], base_value=base.value, applicable=False,
                               note=f"base problem status {base.status}")
    rows = []
    for delta in spec.radius_schedule:
        _, solved, f_inf, f_unb = _solve_samples(inst, spec, delta, cfg, tols)
        deficiency = 0.0
        for s, r in solved:
            for xstar in base.minimizers:
                deficiency = max(deficiency,
                                 distance_to_solution_set(s, r, xstar, tols))
        rows.append(RadiusRow(delta, lsc_deficiency=deficiency,
                              infeasible_fraction=f_inf, unbounded_fraction=f_unb))
    return StabilityReport(rows, base_value=base.value)


def value_continuity_estimate(inst: ProblemInstance, spec: PerturbationSpec,
                              cfg: SolverConfig = SolverConfig(),
                              tols: ToleranceConfig = ToleranceConfig(),
                              base: Optional[SolveResult] = None) -> StabilityReport:
    """Per-radius worst value gap and difference quotient of phi."""
    base = base or solve_global(inst, cfg, tols)
    if not np.isfinite(base.value):
        return StabilityReport([], base_value=base.value, applicable=False,
                               note="base optimal value is not finite")
    rows = []
    for delta in spec.radius_schedule:
        _, solved, f_inf, f_unb = _solve_samples(inst, spec, delta, cfg, tols)
        gap = 0.0
        quot = 0.0
        for s, r in solved:
            g = abs(r.value - base.value)
            gap = max(gap, g)
            d = omega_distance(inst, s)
            if d > 0.0 and d >= delta / 10.0:
                quot = max(quot, g / d)
        rows.append(RadiusRow(delta, value_gap=gap, lipschitz_quotient_max=quot,
                              infeasible_fraction=f_inf, unbounded_fraction=f_unb))
    return StabilityReport(rows, base_value=base.value)


def stability_sweep(inst: ProblemInstance, spec: PerturbationSpec,
                    cfg: SolverConfig = SolverConfig(),
                    tols: ToleranceConfig = ToleranceConfig()) -> StabilityReport:
    """All moduli in one pass (shared samples per radius)."""
    base = solve_global(inst, cfg, tols)
    cond = check_theorem_conditions(inst, cfg, tols, base=base)
    if base.status != "Solved":
        return StabilityReport([], conditions=cond, base_value=base.value,
                               applicable=False,
                               note=f"base problem status {base.status}")
    rows = []
    for delta in spec.radius_schedule:
        _, solved, f_inf, f_unb = _solve_samples(inst, spec, delta, cfg, tols)
        row = RadiusRow(delta, infeasible_fraction=f_inf, unbounded_fraction=f_unb)
        for s, r in solved:
            for xp in r.minimizers:
                row.usc_excess = max(row.usc_excess,
                                     distance_to_solution_set(inst, base, xp, tols))
            for xstar in base.minimizers:
                row.lsc_deficiency = max(row.lsc_deficiency,
                                         distance_to_solution_set(s, r, xstar, tols))
            g = abs(r.value - base.value)
            row.value_gap = max(row.value_gap, g)
            d = omega_distance(inst, s)
            if d > 0.0 and d >= delta / 10.0:
                row.lipschitz_quotient_max = max(row.lipschitz_quotient_max, g / d)
        rows.append(row)
    return StabilityReport(rows, conditions=cond, base_value=base.value)


# ---------------------------------------------------------------------------
# Theorem conditions


def check_theorem_conditions(inst: ProblemInstance,
                             cfg: SolverConfig = SolverConfig(),
                             tols: ToleranceConfig = ToleranceConfig(),
                             base: Optional[SolveResult] = None) -> ConditionReport:
    """Evaluate the three structural conditions and the properties they imply.

    (i) the recession program is solved only by 0; (ii) Slater
    regularity; (iii) the solution set is a singleton.  Upper
    semicontinuity and value continuity are predicted from (i) and (ii);
    lower semicontinuity, solution-map continuity and Lipschitz value
    behavior additionally need (iii).
    """
    cone = recession_cone(inst, tols)
    verdict = qpr_solve(inst, cone, tols)
    cond_i: Optional[bool] = None if verdict.inconclusive else verdict.trivial

    reg = slater_point(inst, tols)
    cond_ii: Optional[bool] = (True if reg.status == "Regular"
                               else False if reg.status == "Irregular" else None)

    base = base or solve_global(inst, cfg, tols)
    if base.status == "Solved":
        cond_iii: Optional[bool] = (len(base.minimizers) == 1
                                    and base.diameter <= cfg.cluster_radius)
    elif base.status == "Inconclusive":
        cond_iii = None
    else:
        cond_iii = False

    def _and(*vals):
        if any(v is False for v in vals):
            return False
        if any(v is None for v in vals):
            return None
        return True

    preds = {
        "usc": _and(cond_i, cond_ii),
        "lsc": _and(cond_i, cond_ii, cond_iii),
        "sol_continuity": _and(cond_i, cond_ii, cond_iii),
        "phi_continuity": _and(cond_i, cond_ii) if np.isfinite(base.value) else None,
        "phi_lipschitz": _and(cond_i, cond_ii, cond_iii),
    }
    return ConditionReport(cond_i, cond_ii, cond_iii, preds, base.value,
                           details={"min_rayleigh": verdict.min_rayleigh,
                                    "regularity_margin": reg.margin,
                                    "solution_diameter": base.diameter,
                                    "status": base.status})


# ---------------------------------------------------------------------------
# Elliptic-plus-finite-rank splitting of the objective form


@dataclass(frozen=True)
class LegendreDecomposition:
    """T = (elliptic part with constant alpha) - (rank-r lifted form)."""

    alpha: float                  # ellipticity constant of the lifted operator
    finite_rank: int
    lifted_directions: np.ndarray  # (n, r), orthonormal
    lifted_eigenvalues: np.ndarray  # (r,), original eigenvalues on those directions
    radius: float                 # admissible perturbation size, < alpha


def legendre_decomposition(T: np.ndarray, rank_budget: int) -> LegendreDecomposition:
    """Split a symmetric operator into elliptic plus finite rank.

    Lifts the r = min(rank_budget, #nonpositive) lowest eigenvalues up
    to the next eigenvalue alpha; fails when alpha is not positive
    (more nonpositive directions than the budget allows).
    """
    T = np.asarray(T, dtype=float)
    n = T.shape[0]
    if rank_budget >= n:
        raise ValueError("rank budget must be smaller than the dimension")
    w, V = np.linalg.eigh(0.5 * (T + T.T))
    n_nonpos = int(np.sum(w <= 0.0))
    r = min(rank_budget, n_nonpos)
    alpha = float(w[r])
    if alpha <= 0.0:
        raise ValueError(
            f"no elliptic-plus-rank-{rank_budget} splitting: eigenvalue "
            f"{r} is {alpha:.3e} (increase the rank budget)")
    U = V[:, :r]
    return LegendreDecomposition(alpha, r, U, w[:r].copy(),
                                 radius=alpha * (1.0 - 1e-6))


def elliptic_part(decomp: LegendreDecomposition, T: np.ndarray) -> np.ndarray:
    """T with the lifted directions raised to alpha; smallest eigenvalue alpha."""
    U, w = decomp.lifted_directions, decomp.lifted_eigenvalues
    return np.asarray(T, dtype=float) + (U * (decomp.alpha - w)) @ U.T


def legendre_perturbation_radius(decomp: LegendreDecomposition) -> float:
    """Spectral-distance budget under which the splitting survives.

    Any symmetric T' with ||T' - T|| < radius again splits as elliptic
    plus the same finite-rank lift, with constant >= alpha - radius.
    """
    return decomp.radius
