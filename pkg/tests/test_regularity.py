"""Slater regularity via convex minimization of the max-constraint."""

import numpy as np
import pytest

import qcqp_stability as q
from conftest import random_instance


class TestSlaterPoint:
    def test_reference_instance_regular(self):
        res = q.slater_point(q.make_lipschitz(4))
        assert res.status == "Regular"
        # g_1(x) = ||x||^2/2 - 1/2 >= -1/2, so -0.5 is the true infimum
        assert res.margin == pytest.approx(-0.5, abs=1e-6)
        assert q.is_feasible(q.make_lipschitz(4), res.witness, 0.0)

    def test_everywhere_positive_constraint_irregular(self):
        inst = q.make_instance(np.zeros((2, 2)), np.zeros(2),
                               [(np.eye(2), np.zeros(2), 1.0)])
        res = q.slater_point(inst)
        assert res.status == "Irregular"
        assert res.margin == pytest.approx(1.0, abs=1e-6)

    def test_linear_constraint_regular(self):
        inst = q.make_instance(np.zeros((3, 3)), np.zeros(3),
                               [(np.zeros((3, 3)), np.eye(3)[0], 0.0)])
        res = q.slater_point(inst)
        assert res.status == "Regular"
        assert res.margin <= -1.0 + 1e-9
        assert res.witness[0] < 0

    def test_unconstrained_convention(self):
        res = q.slater_point(q.make_instance(np.eye(2), np.zeros(2)))
        assert res.status == "Regular"
        assert np.allclose(res.witness, 0.0)
        assert res.margin == -np.inf


class TestRegularityMargin:
    def test_reference_instance(self):
        assert q.regularity_margin(q.make_lipschitz(4)) == pytest.approx(-0.5, abs=1e-6)

    def test_unconstrained_sentinel(self):
        assert q.regularity_margin(q.make_instance(np.eye(2), np.zeros(2))) == -np.inf

    def test_boundary_system_margin_zero(self):
        # {x1 <= 0, -x1 <= 0}: feasible (the hyperplane) but no interior
        e1 = np.eye(2)[0]
        inst = q.make_instance(np.zeros((2, 2)), np.zeros(2),
                               [(np.zeros((2, 2)), e1, 0.0),
                                (np.zeros((2, 2)), -e1, 0.0)])
        assert abs(q.regularity_margin(inst)) <= 1e-6
        assert q.slater_point(inst).status != "Regular"


class TestProperties:
    def test_max_constraint_is_convex(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            dim = int(rng.integers(1, 5))
            inst = random_instance(rng, dim, int(rng.integers(1, 4)))

            def s(x):
                return max(g(x) for g in inst.constraints)

            x, y = rng.normal(size=dim), rng.normal(size=dim)
            lam = rng.uniform()
            assert s(lam * x + (1 - lam) * y) <= lam * s(x) + (1 - lam) * s(y) + 1e-9

    def test_regular_witness_is_feasible(self):
        rng = np.random.default_rng(19)
        for _ in range(20):
            inst = random_instance(rng, int(rng.integers(1, 5)), int(rng.integers(1, 4)))
            res = q.slater_point(inst)
            if res.status == "Regular":
                assert q.is_feasible(inst, res.witness, 0.0)

    def test_margin_monotone_under_extra_constraint(self):
        rng = np.random.default_rng(23)
        for _ in range(15):
            dim = int(rng.integers(1, 4))
            inst = random_instance(rng, dim, 2)
            extra = random_instance(rng, dim, 2).constraints[1]
            bigger = q.make_instance(
                inst.objective.T, inst.objective.c,
                [(g.T, g.c, g.alpha) for g in inst.constraints]
                + [(extra.T, extra.c, extra.alpha)])
            assert (q.regularity_margin(bigger)
                    >= q.regularity_margin(inst) - 1e-6)
