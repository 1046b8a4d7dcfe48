"""Optimal driver allocations for separable concave objectives.

Both planner objectives (cumulative driver profit and riders served) are
weighted sums of the per-route served-demand curves, which are concave
piecewise-quadratic.  The budgeted maximum over the simplex (optionally
box-constrained) is found by bisecting the dual variable of the budget
constraint: each route's mass is the clamp of the point where its
weighted marginal demand equals the dual level.  Flat-marginal routes
(zero curvature) are split by the shared rank order so results are
deterministic.
"""
from __future__ import annotations

import enum
import math
from typing import Sequence

from .equilibrium import rank_order
from .model import Allocation, DerivedRoute, Instance, minibus_demand

_MAX_ITER = 200


class Objective(enum.Enum):
    PROFIT = "profit"
    WELFARE = "welfare"


def objective_weights(instance: Instance, obj: Objective) -> tuple[float, ...]:
    if obj is Objective.PROFIT:
        return tuple(dr.profit_per_rider for dr in instance.derived)
    return tuple(1.0 for _ in instance.derived)


def objective_value(instance: Instance, x: Allocation | Sequence[float], obj: Objective) -> float:
    xs = x.x if isinstance(x, Allocation) else x
    w = objective_weights(instance, obj)
    return sum(
        wi * minibus_demand(dr, xi) for wi, dr, xi in zip(w, instance.derived, xs)
    )


def marginal_value(dr: DerivedRoute, weight: float, x: float) -> float:
    """Weighted marginal served demand at supply ``x``.

    Returns the left derivative at the full-service kink and zero beyond
    it; inactive routes have no marginal value anywhere.
    """
    if x < 0:
        raise ValueError("driver mass must be non-negative")
    if not dr.active:
        return 0.0
    if x > dr.full_service_supply:
        return 0.0
    return weight * (dr.demand_slope - 2.0 * dr.demand_curvature * x)


def _distribute_surplus(
    x: list[float], surplus: float, weights: list[float], ceilings: list[float]
) -> None:
    # Surplus has zero marginal effect; spread it proportionally to the
    # given weights, respecting ceilings, so output stays deterministic.
    remaining = surplus
    for _ in range(len(x) + 2):
        if remaining <= 0.0:
            return
        idx = [
            i
            for i in range(len(x))
            if x[i] < ceilings[i] and math.isfinite(weights[i]) and weights[i] > 0.0
        ]
        if not idx:
            break
        wsum = sum(weights[i] for i in idx)
        leftover = 0.0
        for i in idx:
            share = remaining * weights[i] / wsum
            room = ceilings[i] - x[i]
            if share > room:
                leftover += share - room
                x[i] = ceilings[i]
            else:
                x[i] += share
        remaining = leftover
    if remaining > 0.0:
        idx = [i for i in range(len(x)) if x[i] < ceilings[i]]
        if not idx:
            raise ValueError("surplus exceeds the total ceiling")
        for i in idx:
            x[i] += remaining / len(idx)


def optimize_routes(
    routes: Sequence[DerivedRoute],
    weights: Sequence[float],
    budget: float,
    floor: Sequence[float] | None = None,
    ceiling: Sequence[float] | None = None,
    rank: Sequence[int] | None = None,
) -> Allocation:
    """Maximize sum of weighted served demand subject to a mass budget and box bounds."""
    n = len(routes)
    lo_b = list(floor) if floor is not None else [0.0] * n
    hi_b = list(ceiling) if ceiling is not None else [math.inf] * n
    if len(lo_b) != n or len(hi_b) != n or len(weights) != n:
        raise ValueError("weights/floor/ceiling length must match the route count")
    if any(l < 0 for l in lo_b):
        raise ValueError("floors must be non-negative")
    if any(l > h for l, h in zip(lo_b, hi_b)):
        raise ValueError("floor exceeds ceiling on some route")
    total_floor = sum(lo_b)
    total_ceiling = sum(hi_b)
    if budget < total_floor - 1e-9 * max(1.0, total_floor) or budget > total_ceiling:
        raise ValueError(
            f"budget {budget!r} outside the feasible range [{total_floor!r}, {total_ceiling!r}]"
        )
    rk = tuple(rank) if rank is not None else rank_order(routes)

    # Saturation point of each route's useful range under the box bounds.
    sat = [
        max(lo_b[i], min(hi_b[i], routes[i].full_service_supply))
        if routes[i].active
        else lo_b[i]
        for i in range(n)
    ]

    if sum(sat) <= budget:
        x = list(sat)
        surplus_weights = [
            routes[i].full_service_supply
            if routes[i].active and math.isfinite(routes[i].full_service_supply)
            else 0.0
            for i in range(n)
        ]
        _distribute_surplus(x, budget - sum(x), surplus_weights, hi_b)
        return Allocation(x=tuple(x), total=budget)

    tops = [
        weights[i] * routes[i].demand_slope if routes[i].active else 0.0 for i in range(n)
    ]

    def point_mass(i: int, mu: float) -> float:
        dr = routes[i]
        if not dr.active or tops[i] <= 0.0:
            return lo_b[i]
        if dr.demand_curvature > 0.0:
            v = (tops[i] - mu) / (2.0 * weights[i] * dr.demand_curvature)
            return max(lo_b[i], min(v, sat[i]))
        # Flat marginal: all-or-nothing around the tie level.
        if mu < tops[i]:
            return sat[i]
        return lo_b[i]

    def mass_at(mu: float) -> float:
        return sum(point_mass(i, mu) for i in range(n))

    mu_hi = max(tops) if tops else 0.0
    if mu_hi <= 0.0:
        # Nothing productive to allocate; budget <= sum(sat) = sum(floors) here.
        x = list(lo_b)
        _distribute_surplus(x, budget - sum(x), [1.0] * n, hi_b)
        return Allocation(x=tuple(x), total=budget)

    lo, hi = 0.0, mu_hi
    iterations = 0
    # mass_at is non-increasing: mass_at(0) = sum(sat) > budget >= mass_at(mu_hi).
    while iterations < _MAX_ITER:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        iterations += 1
        if mass_at(mid) >= budget:
            lo = mid
        else:
            hi = mid
    mu_star = lo

    slack = 1e-12
    x = []
    flats: list[int] = []
    for i in range(n):
        dr = routes[i]
        if dr.active and dr.demand_curvature == 0.0 and tops[i] > 0.0 and abs(
            tops[i] - mu_star
        ) <= slack * max(tops[i], 1.0):
            flats.append(i)
            x.append(lo_b[i])
        else:
            x.append(point_mass(i, mu_star))

    residual = budget - sum(x)
    if residual < 0.0:
        # Shave the overshoot off interior routes (those above their floor).
        over = -residual
        idx = [i for i in range(n) if x[i] > lo_b[i]]
        room = sum(x[i] - lo_b[i] for i in idx)
        scale = over / room if room > 0.0 else 0.0
        for i in idx:
            x[i] -= (x[i] - lo_b[i]) * scale
    else:
        for i in sorted(flats, key=lambda i: -rk[i]):
            if residual <= 0.0:
                break
            take = min(residual, sat[i] - x[i])
            x[i] += take
            residual -= take
        if residual > 0.0:
            _distribute_surplus(x, residual, [max(v, 1e-300) for v in x], hi_b)

    return Allocation(x=tuple(x), total=budget)


def optimize_allocation(
    instance: Instance,
    obj: Objective,
    budget: float | None = None,
    floor: Sequence[float] | None = None,
    ceiling: Sequence[float] | None = None,
) -> Allocation:
    """Budget-constrained optimal allocation for the given objective.

    The budget defaults to the instance's full driver mass.
    """
    if budget is None:
        budget = instance.total_drivers
    return optimize_routes(
        instance.derived, objective_weights(instance, obj), budget, floor=floor, ceiling=ceiling
    )
