"""Global solver, value function conventions, and the grid oracle."""

import numpy as np
import pytest

import qcqp_stability as q
from conftest import kkt_residual, random_instance

CFG = q.SolverConfig(restarts=12)


def one_dim_double_well():
    """min -x^2/2 over |x| <= 1: two global minimizers at +-1."""
    return q.make_instance(np.diag([-1.0]), np.zeros(1),
                           [(np.eye(1), np.zeros(1), -0.5)])


def infeasible_instance():
    return q.make_instance(np.zeros((2, 2)), np.zeros(2),
                           [(np.eye(2), np.zeros(2), 1.0)])


class TestSolveGlobal:
    def test_reference_instance(self):
        for n in (2, 5):
            res = q.solve_global(q.make_lipschitz(n), CFG)
            assert res.status == "Solved"
            assert res.value == pytest.approx(-1.0, abs=1e-9)
            assert len(res.minimizers) == 1
            target = np.zeros(n)
            target[0] = -1.0
            assert np.linalg.norm(res.minimizers[0] - target) <= 1e-5

    def test_interior_convex_minimum(self):
        inst = q.make_instance(np.eye(3), np.zeros(3),
                               [(np.eye(3), np.zeros(3), -0.5)])
        res = q.solve_global(inst, CFG)
        assert res.status == "Solved"
        assert res.value == pytest.approx(0.0, abs=1e-9)
        assert np.linalg.norm(res.minimizers[0]) <= 1e-5

    def test_two_symmetric_minimizers(self):
        res = q.solve_global(one_dim_double_well(), CFG)
        assert res.status == "Solved"
        assert res.value == pytest.approx(-0.5, abs=1e-9)
        pts = sorted(float(p[0]) for p in res.minimizers)
        assert pts == pytest.approx([-1.0, 1.0], abs=1e-6)
        # independent grid certification
        oval, oarg = q.brute_force_oracle(one_dim_double_well(),
                                          ([-2.0], [2.0]), 100001)
        assert oval == pytest.approx(-0.5, abs=1e-8)
        assert sorted(abs(float(p[0])) for p in oarg) == pytest.approx([1.0, 1.0],
                                                                       abs=1e-4)

    def test_unbounded_with_certificate(self):
        inst = q.make_instance(np.diag([0.0, -1.0]), np.zeros(2))
        res = q.solve_global(inst, CFG)
        assert res.status == "Unbounded"
        assert res.value == -np.inf
        v = res.unbounded_certificate
        assert v is not None
        assert v @ (inst.objective.T @ v) < 1e-9

    def test_infeasible(self):
        res = q.solve_global(infeasible_instance(), CFG)
        assert res.status == "Infeasible"
        assert res.value == np.inf
        assert res.minimizers == []

    def test_minimizers_feasible_and_equal_valued(self):
        rng = np.random.default_rng(47)
        for _ in range(10):
            inst = random_instance(rng, int(rng.integers(1, 4)), int(rng.integers(1, 4)))
            res = q.solve_global(inst, CFG)
            assert res.status == "Solved"
            for p in res.minimizers:
                assert q.is_feasible(inst, p, 1e-7)
                assert q.eval_objective(inst, p) <= res.value + 1e-7


class TestOptimalValue:
    def test_reference_instance(self):
        assert q.optimal_value(q.make_lipschitz(3), CFG) == pytest.approx(-1.0,
                                                                          abs=1e-9)

    def test_infeasible_plus_infinity(self):
        assert q.optimal_value(infeasible_instance(), CFG) == np.inf

    def test_unbounded_minus_infinity(self):
        inst = q.make_instance(np.diag([0.0, -1.0]), np.zeros(2))
        assert q.optimal_value(inst, CFG) == -np.inf


class TestSolutionSetEstimate:
    def test_singleton(self):
        pts = q.solution_set_estimate(q.make_lipschitz(4), CFG)
        assert len(pts) == 1
        assert pts[0][0] == pytest.approx(-1.0, abs=1e-5)

    def test_two_representatives(self):
        pts = q.solution_set_estimate(one_dim_double_well(), CFG)
        assert sorted(float(p[0]) for p in pts) == pytest.approx([-1.0, 1.0],
                                                                 abs=1e-6)

    def test_unconstrained_strictly_convex(self):
        pts = q.solution_set_estimate(q.make_instance(np.eye(2), np.zeros(2)), CFG)
        assert len(pts) == 1
        assert np.linalg.norm(pts[0]) <= 1e-6

    def test_non_solved_empty(self):
        assert q.solution_set_estimate(infeasible_instance(), CFG) == []

    def test_deterministic_under_fixed_seed(self):
        a = q.solve_global(q.make_unbounded(3), CFG)
        b = q.solve_global(q.make_unbounded(3), CFG)
        assert a.value == b.value
        assert len(a.minimizers) == len(b.minimizers)
        for p, r in zip(a.minimizers, b.minimizers):
            assert np.array_equal(p, r)


class TestBruteForceOracle:
    def test_reference_instance_dim2(self):
        inst = q.make_lipschitz(2)
        val, arg = q.brute_force_oracle(inst, ([-1.5, -1.5], [1.5, 1.5]), 601)
        assert val == pytest.approx(-1.0, abs=3e-3)
        assert np.linalg.norm(arg[0] - np.array([-1.0, 0.0])) <= 2e-2

    def test_infeasible_instance(self):
        val, arg = q.brute_force_oracle(infeasible_instance(),
                                        ([-1.0, -1.0], [1.0, 1.0]), 51)
        assert val == np.inf
        assert arg == []

    def test_dimension_guard(self):
        with pytest.raises(ValueError):
            q.brute_force_oracle(q.make_lipschitz(5),
                                 (-np.ones(5), np.ones(5)), 11)


class TestStationarity:
    def test_kkt_residual_small(self):
        rng = np.random.default_rng(53)
        checked = 0
        for _ in range(10):
            inst = random_instance(rng, int(rng.integers(1, 4)), int(rng.integers(1, 4)))
            res = q.solve_global(inst, CFG)
            if res.status != "Solved" or not res.multipliers:
                continue
            for p, lam in zip(res.minimizers, res.multipliers):
                assert np.all(lam >= -1e-9)
                assert kkt_residual(inst, p, lam) <= 1e-5
                for g, l in zip(inst.constraints, lam):
                    assert abs(l * g(p)) <= 1e-6 * (1.0 + abs(l))
                checked += 1
        assert checked >= 5
