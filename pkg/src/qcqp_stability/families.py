"""Built-in problem families: finite truncations of the classic
infinite-dimensional stability counterexamples, plus the well-behaved
reference instance whose solution map is continuous and whose value
function is Lipschitz.

L2[0,1] data is discretized on the midpoint grid t_j = (j - 1/2)/n with
the 1/n quadrature weight folded into the operators, so the discrete
inner product is the plain Euclidean one.  Sequence-space data keeps
coordinates 1..n and drops the tail.
"""

from __future__ import annotations

import numpy as np

from .model import ProblemInstance, make_instance

FAMILY_IDS = ("unbounded_L2", "k_not_open", "not_usc", "not_lsc", "lipschitz")

# n^-n underflows double precision range usefully past this point.
MAX_POWER_TRUNCATION = 12


def _check_n(n: int, capped: bool = False) -> None:
    if n < 2:
        raise ValueError("truncation dimension must be >= 2")
    if capped and n > MAX_POWER_TRUNCATION:
        raise ValueError(f"truncation capped at {MAX_POWER_TRUNCATION}: "
                         "n^-n degenerates below double precision")


def _power_diag(n: int) -> np.ndarray:
    """diag(1, 2^-2, 3^-3, ..., n^-n)."""
    return np.diag([float(k) ** (-k) for k in range(1, n + 1)])


def make_unbounded(n: int) -> ProblemInstance:
    """Flat objective over a midpoint-discretized weighted ball.

    Objective is identically zero on the feasible set, whose diameter
    grows with n, so the solution set is the whole (large) feasible set.
    """
    _check_n(n)
    t = (np.arange(1, n + 1) - 0.5) / n
    T1 = np.diag(t / n)          # 1/2 <x, T1 x> = (1/2n) sum t_j x_j^2
    return make_instance(
        np.zeros((n, n)), np.zeros(n),
        [(T1, np.zeros(n), -0.25)],
        label=f"unbounded_L2(n={n})",
    )


def make_k_not_open(n: int, perturbed: bool = False) -> ProblemInstance:
    """Zero objective with a rapidly-decaying diagonal ball constraint.

    The base instance has a trivial recession cone; shifting the
    constraint operator by n^-n I (a perturbation of size exactly n^-n)
    opens a kernel ray along the last coordinate.
    """
    _check_n(n, capped=True)
    T1 = _power_diag(n)
    if perturbed:
        T1 = T1 - float(n) ** (-n) * np.eye(n)
    return make_instance(
        np.zeros((n, n)), np.zeros(n),
        [(T1, np.zeros(n), -1.0)],
        label=f"k_not_open(n={n}, perturbed={perturbed})",
    )


def make_not_usc(n: int, eps: float = 0.0) -> ProblemInstance:
    """Rapidly-degenerating diagonal objective over a halfspace.

    With eps = 0 the closed-form optimal value is
    1 / (2 * sum_{k<=n} k^(k-2)) and the minimizer norm grows with n,
    the finite-dimensional shadow of the solution set emptying out in
    the limit.  eps > 0 adds eps*I, restoring ellipticity.
    """
    _check_n(n, capped=True)
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    T = _power_diag(n) + eps * np.eye(n)
    c1 = -1.0 / np.arange(1, n + 1)
    return make_instance(
        T, np.zeros(n),
        [(np.zeros((n, n)), c1, 1.0)],
        label=f"not_usc(n={n}, eps={eps})",
    )


def make_not_lsc(n: int, eps: float = 0.0) -> ProblemInstance:
    """The flat-objective family with the objective lifted to eps*I.

    At eps = 0 this is exactly the unbounded family; any eps > 0
    collapses the solution set to the origin, so points far out in the
    base solution set have no nearby counterpart under perturbation.
    """
    _check_n(n)
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    base = make_unbounded(n)
    g1 = base.constraints[0]
    return make_instance(
        eps * np.eye(n), np.zeros(n),
        [(g1.T, g1.c, g1.alpha)],
        label=f"not_lsc(n={n}, eps={eps})",
    )


def make_lipschitz(n: int) -> ProblemInstance:
    """Indefinite objective over the unit ball with a unique solution.

    T = diag(0, -1, 1, ..., 1), c = e_1, constraint 1/2 ||x||^2 <= 1/2.
    The optimal value is -1, attained only at (-1, 0, ..., 0); all three
    stability conditions hold.
    """
    _check_n(n)
    d = np.ones(n)
    d[0] = 0.0
    d[1] = -1.0
    c = np.zeros(n)
    c[0] = 1.0
    return make_instance(
        np.diag(d), c,
        [(np.eye(n), np.zeros(n), -0.5)],
        label=f"lipschitz(n={n})",
    )


def make_family(family_id: str, n: int, eps: float = 0.0,
                perturbed: bool = False) -> ProblemInstance:
    """Dispatch by family id (see FAMILY_IDS)."""
    if family_id == "unbounded_L2":
        return make_unbounded(n)
    if family_id == "k_not_open":
        return make_k_not_open(n, perturbed)
    if family_id == "not_usc":
        return make_not_usc(n, eps)
    if family_id == "not_lsc":
        return make_not_lsc(n, eps)
    if family_id == "lipschitz":
        return make_lipschitz(n)
    raise ValueError(f"unknown family {family_id!r}; expected one of {FAMILY_IDS}")


def not_usc_closed_form_value(n: int) -> float:
    """Optimal value of make_not_usc(n, 0): 1 / (2 sum_{k<=n} k^(k-2))."""
    return 1.0 / (2.0 * sum(float(k) ** (k - 2) for k in range(1, n + 1)))


def not_usc_closed_form_minimizer(n: int) -> np.ndarray:
    """KKT solution of make_not_usc(n, 0): x_k = lam * k^(k-1)."""
    lam = 1.0 / sum(float(k) ** (k - 2) for k in range(1, n + 1))
    return lam * np.array([float(k) ** (k - 1) for k in range(1, n + 1)])
