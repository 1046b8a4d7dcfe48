import math

import numpy as np
import pytest

from conftest import make_instance
from minibus.allocation import (
    Objective,
    marginal_value,
    objective_value,
    objective_weights,
    optimize_allocation,
)
from minibus.analysis import random_instances, tight_profit_instance
from minibus.model import minibus_demand


def grid_search_best(instance, obj, budget, divisions):
    """Oracle: exhaustive simplex-lattice search (vectorized over the last axis)."""
    n = instance.n
    w = objective_weights(instance, obj)
    unit = budget / divisions

    def demand_curve(dr, xs):
        xs = np.asarray(xs, dtype=float)
        if not dr.active:
            return np.zeros_like(xs)
        quad = dr.demand_slope * xs - dr.demand_curvature * xs * xs
        return np.where(xs >= dr.full_service_supply, dr.demand, quad)

    best = -math.inf
    if n == 1:
        return float(w[0] * minibus_demand(instance.derived[0], budget))
    counts = np.arange(divisions + 1)
    if n == 2:
        vals = w[0] * demand_curve(instance.derived[0], counts * unit)
        vals = vals + w[1] * demand_curve(instance.derived[1], (divisions - counts) * unit)
        return float(vals.max())
    if n == 3:
        for c0 in range(divisions + 1):
            rem = divisions - c0
            ks = np.arange(rem + 1)
            vals = (
                w[0] * minibus_demand(instance.derived[0], c0 * unit)
                + w[1] * demand_curve(instance.derived[1], ks * unit)
                + w[2] * demand_curve(instance.derived[2], (rem - ks) * unit)
            )
            best = max(best, float(vals.max()))
        return best
    assert n == 4
    for c0 in range(divisions + 1):
        v0 = w[0] * minibus_demand(instance.derived[0], c0 * unit)
        for c1 in range(divisions + 1 - c0):
            rem = divisions - c0 - c1
            ks = np.arange(rem + 1)
            vals = (
                v0
                + w[1] * minibus_demand(instance.derived[1], c1 * unit)
                + w[2] * demand_curve(instance.derived[2], ks * unit)
                + w[3] * demand_curve(instance.derived[3], (rem - ks) * unit)
            )
            best = max(best, float(vals.max()))
    return best


class TestObjectiveValue:
    def test_single_linear_route(self, cfg):
        inst = make_instance(cfg, [("lin", 50.0, 10.0, 4200.0, 0.0)])
        assert objective_value(inst, [25.0], Objective.PROFIT) == pytest.approx(21000.0)
        assert objective_value(inst, [25.0], Objective.WELFARE) == pytest.approx(2100.0)

    def test_saturating_split_captures_everything(self):
        inst = tight_profit_instance(0.3)
        k = [dr.full_service_supply for dr in inst.derived]
        p = [dr.profit_per_rider for dr in inst.derived]
        lam = [dr.demand for dr in inst.derived]
        expected = p[0] * lam[0] + p[1] * lam[1]
        assert objective_value(inst, k, Objective.PROFIT) == pytest.approx(expected)

    def test_zero_allocation(self, cfg):
        inst = make_instance(cfg, [("a", 50.0, 10.0, 4200.0, 30.0)])
        assert objective_value(inst, [0.0], Objective.PROFIT) == 0.0


class TestMarginalValue:
    def test_constant_on_linear_route(self, lin_route):
        for x in (0.0, 20.0, 49.9):
            assert marginal_value(lin_route, 10.0, x) == pytest.approx(840.0)

    def test_initial_slope_queuing(self, vic_route):
        assert marginal_value(vic_route, 1.0, 0.0) == pytest.approx(96.336, abs=1e-3)

    def test_saturated(self, vic_route):
        assert marginal_value(vic_route, 1.0, 2.0 * vic_route.full_service_supply) == 0.0

    def test_left_derivative_at_kink(self, vic_route):
        k = vic_route.full_service_supply
        expected = vic_route.demand_slope - 2.0 * vic_route.demand_curvature * k
        assert marginal_value(vic_route, 1.0, k) == pytest.approx(expected)


class TestOptimizeAllocation:
    def test_saturating_optimum(self):
        inst = tight_profit_instance(0.3)
        alloc = optimize_allocation(inst, Objective.PROFIT, budget=1.0)
        ks = [dr.full_service_supply for dr in inst.derived]
        assert alloc.x[0] == pytest.approx(ks[0], rel=1e-12)
        assert alloc.x[1] == pytest.approx(ks[1], rel=1e-12)

    def test_identical_routes_split_evenly(self, cfg):
        inst = make_instance(
            cfg, [("a", 50.0, 10.0, 4200.0, 30.0), ("b", 50.0, 10.0, 4200.0, 30.0)]
        )
        alloc = optimize_allocation(inst, Objective.PROFIT, budget=40.0)
        assert alloc.x[0] == pytest.approx(20.0, rel=1e-9)
        assert alloc.x[1] == pytest.approx(20.0, rel=1e-9)

    @pytest.mark.parametrize("obj", [Objective.PROFIT, Objective.WELFARE])
    def test_matches_dense_grid_search(self, obj):
        insts = random_instances(71, 3, n=4)
        for inst in insts:
            alloc = optimize_allocation(inst, obj)
            got = objective_value(inst, alloc, obj)
            oracle = grid_search_best(inst, obj, inst.total_drivers, 180)
            assert got >= oracle - 1e-4 * abs(oracle)

    def test_dual_certificate(self):
        for inst in random_instances(73, 8):
            alloc = optimize_allocation(inst, Objective.PROFIT)
            w = objective_weights(inst, Objective.PROFIT)
            scale = max(w[i] * dr.demand_slope for i, dr in enumerate(inst.derived))
            interior = [
                i
                for i, dr in enumerate(inst.derived)
                if 1e-9 < alloc.x[i] < dr.full_service_supply * (1 - 1e-12)
            ]
            if interior:
                mu = marginal_value(
                    inst.derived[interior[0]], w[interior[0]], alloc.x[interior[0]]
                )
                for i in interior:
                    m = marginal_value(inst.derived[i], w[i], alloc.x[i])
                    assert abs(m - mu) <= 1e-7 * scale
            else:
                mu = 0.0
            for i, dr in enumerate(inst.derived):
                if alloc.x[i] <= 1e-9:
                    assert marginal_value(dr, w[i], 0.0) <= mu + 1e-7 * scale
                elif alloc.x[i] >= dr.full_service_supply * (1 - 1e-12):
                    # kink or beyond: any dual below the left derivative works
                    assert marginal_value(dr, w[i], alloc.x[i]) >= mu - 1e-7 * scale

    def test_monotone_in_budget(self):
        for inst in random_instances(79, 5):
            budgets = np.linspace(0.2, 2.0, 8) * inst.total_drivers
            vals = [
                objective_value(
                    inst, optimize_allocation(inst, Objective.WELFARE, budget=b),
                    Objective.WELFARE,
                )
                for b in budgets
            ]
            assert all(b >= a - 1e-9 * abs(a) for a, b in zip(vals, vals[1:]))

    def test_beats_equilibrium(self):
        from minibus.equilibrium import wardrop_equilibrium

        for inst in random_instances(83, 8):
            eq = wardrop_equilibrium(inst)
            for obj in (Objective.PROFIT, Objective.WELFARE):
                opt = objective_value(inst, optimize_allocation(inst, obj), obj)
                base = objective_value(inst, eq.allocation, obj)
                assert opt >= base * (1 - 1e-9)

    def test_box_constraints_respected(self, cfg):
        inst = make_instance(
            cfg, [("a", 50.0, 10.0, 4200.0, 30.0), ("b", 30.0, 20.0, 3000.0, 10.0)]
        )
        alloc = optimize_allocation(
            inst, Objective.PROFIT, budget=30.0, floor=[5.0, 2.0], ceiling=[20.0, 40.0]
        )
        assert 5.0 <= alloc.x[0] <= 20.0 + 1e-12
        assert 2.0 <= alloc.x[1] <= 40.0 + 1e-12
        assert sum(alloc.x) == pytest.approx(30.0, rel=1e-12)

    def test_infeasible_bounds_rejected(self, cfg):
        inst = make_instance(cfg, [("a", 50.0, 10.0, 4200.0, 30.0)])
        with pytest.raises(ValueError):
            optimize_allocation(inst, Objective.PROFIT, budget=10.0, ceiling=[5.0])
        with pytest.raises(ValueError):
            optimize_allocation(inst, Objective.PROFIT, budget=1.0, floor=[5.0])

    def test_surplus_spread_when_budget_exceeds_saturation(self, cfg):
        inst = make_instance(
            cfg, [("a", 50.0, 10.0, 4200.0, 30.0), ("b", 30.0, 20.0, 3000.0, 10.0)]
        )
        ks = sum(dr.full_service_supply for dr in inst.derived)
        alloc = optimize_allocation(inst, Objective.PROFIT, budget=2.0 * ks)
        assert sum(alloc.x) == pytest.approx(2.0 * ks, rel=1e-12)
        for dr, xi in zip(inst.derived, alloc.x):
            assert xi >= dr.full_service_supply * (1 - 1e-12)
