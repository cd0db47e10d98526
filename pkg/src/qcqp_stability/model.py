"""Data model for quadratically constrained quadratic programs on R^n.

A problem instance bundles a (possibly indefinite) quadratic objective
    f(x) = 1/2 <x, T x> + <c, x>
with m convex quadratic constraints
    g_i(x) = 1/2 <x, T_i x> + <c_i, x> + alpha_i <= 0,
where every constraint operator T_i is positive semidefinite.  The
parameter vector omega = (T, c, T_1..T_m, c_1..c_m, alpha_1..alpha_m)
lives in a product space whose norm is the max over component norms:
operators in the spectral norm, vectors in the Euclidean norm, scalars
in absolute value.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

SYMMETRY_TOL = 1e-12


def spectral_norm(M: np.ndarray) -> float:
    """Largest absolute eigenvalue of a symmetric matrix."""
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvalsh(M))))


def symmetrize(M: np.ndarray) -> tuple[np.ndarray, float]:
    """Return (M + M^T)/2 and the spectral-norm size of the correction."""
    M = np.asarray(M, dtype=float)
    S = 0.5 * (M + M.T)
    defect = float(np.linalg.norm(0.5 * (M - M.T), 2)) if M.size else 0.0
    return S, defect


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical tolerances shared across the analyses."""

    feas_tol: float = 1e-8
    kernel_tol: float = 1e-8
    value_tol: float = 1e-9
    psd_tol: float = 1e-9
    seed: int = 0

    def __post_init__(self):
        for name in ("feas_tol", "kernel_tol", "value_tol", "psd_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class QuadraticFunction:
    """1/2 <x, T x> + <c, x> + alpha with T symmetric."""

    T: np.ndarray
    c: np.ndarray
    alpha: float = 0.0
    sym_defect: float = 0.0

    def __post_init__(self):
        T, defect = symmetrize(self.T)
        c = np.asarray(self.c, dtype=float).ravel()
        if T.shape != (c.size, c.size):
            raise ValueError(f"operator shape {T.shape} does not match vector length {c.size}")
        T.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "sym_defect", defect)

    @property
    def dim(self) -> int:
        return self.c.size

    def __call__(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float).ravel()
        if x.size != self.dim:
            raise ValueError(f"point length {x.size} does not match dimension {self.dim}")
        return float(0.5 * x @ (self.T @ x) + self.c @ x + self.alpha)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float).ravel()
        return self.T @ x + self.c


@dataclass(frozen=True)
class ProblemInstance:
    """One point omega of the parameter space, at ambient dimension dim."""

    objective: QuadraticFunction
    constraints: tuple[QuadraticFunction, ...] = ()
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if self.objective.alpha != 0.0:
            raise ValueError("objective must have alpha = 0")
        for i, g in enumerate(self.constraints):
            if g.dim != self.dim:
                raise ValueError(f"constraint {i} has dimension {g.dim}, expected {self.dim}")

    @property
    def dim(self) -> int:
        return self.objective.dim

    @property
    def m(self) -> int:
        return len(self.constraints)


def make_instance(T, c, constraints=(), label: str = "") -> ProblemInstance:
    """Convenience constructor from raw arrays.

    ``constraints`` is an iterable of (T_i, c_i, alpha_i) triples.
    """
    obj = QuadraticFunction(np.asarray(T, dtype=float), np.asarray(c, dtype=float), 0.0)
    cons = tuple(QuadraticFunction(np.asarray(Ti, dtype=float),
                                   np.asarray(ci, dtype=float), float(ai))
                 for Ti, ci, ai in constraints)
    return ProblemInstance(obj, cons, label)


def eval_objective(inst: ProblemInstance, x: np.ndarray) -> float:
    """f(x) = 1/2 <x, T x> + <c, x>."""
    return inst.objective(x)


def eval_constraint(inst: ProblemInstance, i: int, x: np.ndarray) -> float:
    """g_i(x) = 1/2 <x, T_i x> + <c_i, x> + alpha_i."""
    if not 0 <= i < inst.m:
        raise IndexError(f"constraint index {i} out of range (m = {inst.m})")
    return inst.constraints[i](x)


def constraint_values(inst: ProblemInstance, x: np.ndarray) -> np.ndarray:
    return np.array([g(x) for g in inst.constraints], dtype=float)


def is_feasible(inst: ProblemInstance, x: np.ndarray, tol: float = 0.0) -> bool:
    """True iff every g_i(x) <= tol; vacuously true when m = 0."""
    return all(g(x) <= tol for g in inst.constraints)


def omega_distance(a: ProblemInstance, b: ProblemInstance) -> float:
    """Max over component norms: spectral for operators, Euclidean for
    vectors, absolute value for the constraint constants."""
    if a.dim != b.dim or a.m != b.m:
        raise ValueError("instances must share dimension and constraint count")
    parts = [spectral_norm(a.objective.T - b.objective.T),
             float(np.linalg.norm(a.objective.c - b.objective.c))]
    for ga, gb in zip(a.constraints, b.constraints):
        parts.append(spectral_norm(ga.T - gb.T))
        parts.append(float(np.linalg.norm(ga.c - gb.c)))
        parts.append(abs(ga.alpha - gb.alpha))
    return max(parts)


@dataclass(frozen=True)
class Diagnostic:
    kind: str          # "asymmetry" | "not_psd" | "shape"
    where: str         # "objective" or "constraint <i>"
    detail: str

    def __str__(self):
        return f"{self.where}: {self.kind} ({self.detail})"


def validate(inst: ProblemInstance, cfg: ToleranceConfig = ToleranceConfig()) -> list[Diagnostic]:
    """Collect invariant violations; an empty list means the instance is valid.

    Constraint operators must be PSD up to psd_tol relative to their
    spectral norm; symmetrization corrections above 1e-12 are reported
    but were already applied at construction.
    """
    out: list[Diagnostic] = []
    scale = 1.0 + max(spectral_norm(inst.objective.T), 1.0)
    if inst.objective.sym_defect > SYMMETRY_TOL * scale:
        out.append(Diagnostic("asymmetry", "objective",
                              f"symmetrization correction {inst.objective.sym_defect:.3e}"))
    for i, g in enumerate(inst.constraints):
        s = spectral_norm(g.T)
        if g.sym_defect > SYMMETRY_TOL * (1.0 + s):
            out.append(Diagnostic("asymmetry", f"constraint {i}",
                                  f"symmetrization correction {g.sym_defect:.3e}"))
        if g.dim:
            lam_min = float(np.linalg.eigvalsh(g.T)[0])
            if lam_min < -cfg.psd_tol * max(s, 1.0):
                out.append(Diagnostic("not_psd", f"constraint {i}",
                                      f"smallest eigenvalue {lam_min:.3e}"))
    return out


# ---------------------------------------------------------------------------
# JSON problem files


def to_dict(inst: ProblemInstance) -> dict:
    return {
        "dim": inst.dim,
        "objective": {"T": inst.objective.T.tolist(), "c": inst.objective.c.tolist()},
        "constraints": [
            {"T": g.T.tolist(), "c": g.c.tolist(), "alpha": g.alpha}
            for g in inst.constraints
        ],
        "label": inst.label,
    }


def from_dict(data: dict) -> ProblemInstance:
    dim = int(data["dim"])
    obj = data["objective"]
    inst = make_instance(
        obj["T"], obj["c"],
        [(g["T"], g["c"], g.get("alpha", 0.0)) for g in data.get("constraints", [])],
        label=data.get("label", ""),
    )
    if inst.dim != dim:
        raise ValueError(f"declared dim {dim} does not match objective dimension {inst.dim}")
    return inst


def save_instance(inst: ProblemInstance, path) -> None:
    with open(path, "w") as fh:
        json.dump(to_dict(inst), fh, indent=2)
        fh.write("\n")


def load_instance(path) -> ProblemInstance:
    with open(path) as fh:
        return from_dict(json.load(fh))
