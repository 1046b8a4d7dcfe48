import numpy as np
import pytest

from conftest import make_instance
from minibus.analysis import random_instances, tight_profit_instance
from minibus.equilibrium import (
    is_equilibrium,
    rank_order,
    solve_equilibrium,
    supply_at_profit,
    wardrop_equilibrium,
)
from minibus.model import per_driver_profit


def bisect_profit_inverse(dr, pi):
    """Oracle: invert the profit curve on [0, full_service_supply] by bisection."""
    lo, hi = 0.0, dr.full_service_supply
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if per_driver_profit(dr, mid) >= pi:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestSupplyAtProfit:
    def test_flat_segment(self, lin_route):
        # p * slope = 840 on the whole linear range.
        assert supply_at_profit(lin_route, 840.0) == (0.0, 50.0)

    def test_hyperbolic_point(self, lin_route):
        lo, hi = supply_at_profit(lin_route, 420.0)
        assert lo == hi == pytest.approx(100.0)

    def test_declining_segment_matches_bisection(self, vic_route):
        pi = per_driver_profit(vic_route, 25.0)
        lo, hi = supply_at_profit(vic_route, pi)
        assert lo == hi
        assert lo == pytest.approx(25.0, rel=1e-9)
        assert lo == pytest.approx(bisect_profit_inverse(vic_route, pi), rel=1e-6)

    def test_above_empty_route_profit(self, vic_route):
        top = per_driver_profit(vic_route, 0.0)
        assert supply_at_profit(vic_route, top * 1.01) == (0.0, 0.0)

    def test_transfer_shift(self, vic_route):
        pi = per_driver_profit(vic_route, 25.0)
        shifted = supply_at_profit(vic_route, pi + 7.0, transfer=7.0)
        assert shifted[0] == pytest.approx(25.0, rel=1e-9)

    def test_aggregate_supply_non_increasing(self):
        rng = np.random.default_rng(31)
        for inst in random_instances(41, 10):
            top = max(per_driver_profit(dr, 0.0) for dr in inst.derived)
            levels = np.sort(rng.uniform(1e-6, top * 1.2, size=30))
            sums = [
                sum(supply_at_profit(dr, float(pi))[1] for dr in inst.derived)
                for pi in levels
            ]
            assert all(a >= b - 1e-9 for a, b in zip(sums, sums[1:]))


class TestWardropEquilibrium:
    def test_symmetric_split(self, cfg):
        inst = make_instance(
            cfg, [("a", 50.0, 10.0, 4200.0, 30.0), ("b", 50.0, 10.0, 4200.0, 30.0)]
        )
        res = wardrop_equilibrium(inst, free_mass=40.0)
        assert res.allocation.x[0] == pytest.approx(20.0, rel=1e-9)
        assert res.allocation.x[1] == pytest.approx(20.0, rel=1e-9)

    def test_corner_equilibrium_on_tight_instance(self):
        inst = tight_profit_instance(0.1)
        res = wardrop_equilibrium(inst)
        assert res.allocation.x[0] == pytest.approx(1.0, abs=1e-9)
        assert res.allocation.x[1] == pytest.approx(0.0, abs=1e-9)

    def test_single_route_level(self, cfg):
        inst = make_instance(cfg, [("v", 50.0, 10.0, 4200.0, 30.0)])
        res = wardrop_equilibrium(inst, free_mass=25.0)
        assert res.allocation.x[0] == pytest.approx(25.0, rel=1e-12)
        assert res.pi_eq == pytest.approx(901.6803278688525, rel=1e-9)

    def test_supported_routes_share_level(self):
        for inst in random_instances(43, 8):
            res = wardrop_equilibrium(inst)
            for i in res.supported:
                pi = per_driver_profit(inst.derived[i], res.allocation.x[i])
                assert pi == pytest.approx(res.pi_eq, rel=1e-7)
            for j, dr in enumerate(inst.derived):
                assert per_driver_profit(dr, res.allocation.x[j]) <= res.pi_eq * (1 + 1e-7)

    def test_private_mass_is_exact(self):
        for inst in random_instances(47, 10):
            free = 0.7 * inst.total_drivers
            res = wardrop_equilibrium(inst, free_mass=free)
            assert sum(res.x_private) == pytest.approx(free, rel=1e-9)

    def test_profit_level_unique_across_rank_orders(self):
        for inst in random_instances(53, 10):
            base = rank_order(inst.derived)
            flipped = tuple(len(base) + 1 - r for r in base)
            a = wardrop_equilibrium(inst)
            b = wardrop_equilibrium(inst, rank=flipped)
            assert b.pi_eq == pytest.approx(a.pi_eq, rel=1e-7)
            pa = sum(
                per_driver_profit(dr, xi) * xi
                for dr, xi in zip(inst.derived, a.allocation.x)
            )
            pb = sum(
                per_driver_profit(dr, xi) * xi
                for dr, xi in zip(inst.derived, b.allocation.x)
            )
            assert pb == pytest.approx(pa, rel=1e-7)

    def test_allocation_unique_when_curves_strictly_decline(self):
        for inst in random_instances(59, 10, s_mode="positive"):
            base = rank_order(inst.derived)
            flipped = tuple(len(base) + 1 - r for r in base)
            a = wardrop_equilibrium(inst)
            b = wardrop_equilibrium(inst, rank=flipped)
            for xa, xb in zip(a.allocation.x, b.allocation.x):
                assert abs(xa - xb) <= 1e-7 * inst.total_drivers

    def test_offsets_shift_response(self, cfg):
        inst = make_instance(
            cfg, [("a", 50.0, 10.0, 4200.0, 30.0), ("b", 50.0, 10.0, 4200.0, 30.0)]
        )
        res = wardrop_equilibrium(inst, free_mass=30.0, offsets=[10.0, 0.0])
        # symmetric routes: combined allocation equalizes
        assert res.allocation.x[0] == pytest.approx(res.allocation.x[1], rel=1e-7)
        assert sum(res.x_private) == pytest.approx(30.0, rel=1e-12)

    def test_zero_free_mass(self, cfg):
        inst = make_instance(cfg, [("a", 50.0, 10.0, 4200.0, 30.0)])
        res = wardrop_equilibrium(inst, free_mass=0.0, offsets=[7.0])
        assert res.x_private == (0.0,)
        assert res.supported == ()

    def test_iteration_budget(self):
        for inst in random_instances(61, 5):
            res = wardrop_equilibrium(inst)
            assert res.iterations <= 200


class TestIsEquilibrium:
    def test_solver_output_verifies(self):
        for inst in random_instances(67, 10):
            res = wardrop_equilibrium(inst)
            assert is_equilibrium(inst, res.allocation).ok

    def test_rejects_lopsided_symmetric_split(self, cfg):
        inst = make_instance(
            cfg, [("a", 50.0, 10.0, 4200.0, 30.0), ("b", 50.0, 10.0, 4200.0, 30.0)]
        )
        check = is_equilibrium(inst, [1.0, 0.0])
        assert not check.ok
        assert check.violations and check.violations[0][:2] == (0, 1)

    def test_accepts_constructed_corner(self):
        inst = tight_profit_instance(0.1)
        assert is_equilibrium(inst, [1.0, 0.0]).ok


class TestRankOrder:
    def test_lower_yield_ranks_higher(self, cfg):
        inst = make_instance(
            cfg, [("a", 50.0, 10.0, 4200.0, 0.0), ("b", 50.0, 20.0, 4200.0, 0.0)]
        )
        rk = rank_order(inst.derived)
        # route b moves fewer riders per driver -> higher rank
        assert rk[1] > rk[0]

    def test_ties_break_by_id(self, cfg):
        inst = make_instance(
            cfg, [("z", 50.0, 10.0, 4200.0, 0.0), ("a", 50.0, 10.0, 4200.0, 0.0)]
        )
        rk = rank_order(inst.derived)
        assert rk[1] > rk[0]  # equal yield: id "a" fills first

    def test_flat_tie_mass_follows_rank(self, cfg):
        # Identical zero-advantage routes: all mass should land on the
        # higher-ranked one while capacity allows.
        inst = make_instance(
            cfg, [("a", 50.0, 10.0, 4200.0, 0.0), ("b", 50.0, 10.0, 4200.0, 0.0)]
        )
        res = solve_equilibrium(inst.derived, free_mass=30.0)
        assert res.allocation.x == (30.0, 0.0)
