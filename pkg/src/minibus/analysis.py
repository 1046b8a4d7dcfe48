"""Efficiency-loss analysis: optimum-to-equilibrium ratios, worst-case
instance constructors that attain the proven bounds, and batch
certification of those bounds on sampled instances."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .allocation import Objective, objective_value, optimize_allocation
from .equilibrium import wardrop_equilibrium
from .model import Instance, InstanceConfig, RouteParams

PROFIT_RATIO_BOUND = 2.0


@dataclass(frozen=True)
class RatioReport:
    """Optimum/equilibrium ratios for one instance and the bounds they obey."""

    profit_ratio: float
    welfare_ratio: float
    p_max_over_p_min: float
    bound_profit: float
    bound_welfare: float
    eq_per_driver_profit: float


def ratio_report(instance: Instance) -> RatioReport:
    eq = wardrop_equilibrium(instance)
    eq_profit = objective_value(instance, eq.allocation, Objective.PROFIT)
    eq_welfare = objective_value(instance, eq.allocation, Objective.WELFARE)
    if eq_profit <= 0.0 or eq_welfare <= 0.0:
        raise ValueError("equilibrium objective is zero; ratios are undefined")
    best_profit = objective_value(
        instance, optimize_allocation(instance, Objective.PROFIT), Objective.PROFIT
    )
    best_welfare = objective_value(
        instance, optimize_allocation(instance, Objective.WELFARE), Objective.WELFARE
    )
    p = [dr.profit_per_rider for dr in instance.derived]
    p_ratio = max(p) / min(p) if min(p) > 0.0 else math.inf
    return RatioReport(
        profit_ratio=best_profit / eq_profit,
        welfare_ratio=best_welfare / eq_welfare,
        p_max_over_p_min=p_ratio,
        bound_profit=PROFIT_RATIO_BOUND,
        bound_welfare=1.0 + p_ratio,
        eq_per_driver_profit=eq.pi_eq,
    )


def _two_route_config(total_drivers: float = 1.0) -> InstanceConfig:
    return InstanceConfig(capacity=4.0, t1=0.0, t2=420.0, total_drivers=total_drivers)


def _route(rid: str, profit_per_rider: float, travel_time: float, demand: float) -> RouteParams:
    # c = 0.8 * F * fare keeps per-rider profit at 0.2 * fare.
    fare = 5.0 * profit_per_rider
    return RouteParams(
        id=rid,
        fare=fare,
        travel_time=travel_time,
        trip_cost=0.8 * 4.0 * fare,
        total_demand=demand,
        cost_advantage=0.0,
    )


def tight_profit_instance(eps: float) -> Instance:
    """Two-route instance whose profit ratio equals ``2 - eps``.

    Both routes have zero cost advantage, the full-service supplies are
    ``eps`` and ``1 - eps`` against a unit driver mass, and the per-rider
    profits are chosen so the lone equilibrium parks every driver on the
    short route.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    cfg = _two_route_config()
    slope = cfg.capacity * cfg.peak_span / (2.0 * 10.0)  # riders per driver at l = 10
    demand_1 = slope * eps
    demand_2 = slope * (1.0 - eps)
    # Equal equilibrium appeal: p1 * demand_1 == p2 * demand_2 / k2.
    p2 = 1.0
    p1 = p2 * demand_2 / ((1.0 - eps) * demand_1)
    routes = [
        _route("r1", p1, 10.0, demand_1),
        _route("r2", p2, 10.0, demand_2),
    ]
    return Instance.build(cfg, routes)


def tight_welfare_instance(eps: float, pmax_over_pmin: float) -> Instance:
    """Two-route instance whose welfare ratio equals ``1 + (1-eps) * pmax_over_pmin``."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    if pmax_over_pmin < 1.0:
        raise ValueError("pmax_over_pmin must be at least 1")
    cfg = _two_route_config()
    p2 = 1.0
    p1 = pmax_over_pmin * p2
    l2 = 10.0
    # The equal-appeal condition p1 * demand_1 == p2 * slope_2 pins the
    # travel-time ratio once the full-service supplies are (eps, 1-eps).
    l1 = l2 * pmax_over_pmin * eps
    slope_1 = cfg.capacity * cfg.peak_span / (2.0 * l1)
    slope_2 = cfg.capacity * cfg.peak_span / (2.0 * l2)
    routes = [
        _route("r1", p1, l1, slope_1 * eps),
        _route("r2", p2, l2, slope_2 * (1.0 - eps)),
    ]
    return Instance.build(cfg, routes)


def lpf_lower_bound_instance(alpha: float, eps: float) -> Instance:
    """Two-route instance stressing lowest-profit-first at control share ``alpha``.

    Its profit ratio under that strategy is
    ``(2 - eps) / (min(alpha, 1 - eps) + 1)``; alpha only selects which
    regime the bound is evaluated in, the construction itself matches the
    tight-profit family.
    """
    if not 0.0 <= alpha < 1.0:
        raise ValueError("alpha must lie in [0, 1)")
    return tight_profit_instance(eps)


def lpf_lower_bound_ratio(alpha: float, eps: float) -> float:
    k2 = 1.0 - eps
    return (k2 + 1.0) / (min(alpha, k2) + 1.0)


@dataclass(frozen=True)
class BoundViolation:
    index: int
    instance: Instance
    report: RatioReport
    reason: str


def certify_bounds(
    instances: Iterable[Instance], tol: float = 1e-7
) -> list[BoundViolation]:
    """Check every instance's ratios against the proven bounds.

    Returns the violating instances (empty list = certified).  Ratios
    below one beyond fp slack are reported too, as they indicate a broken
    optimizer rather than a broken bound.
    """
    violations: list[BoundViolation] = []
    for idx, inst in enumerate(instances):
        rep = ratio_report(inst)
        reasons = []
        if rep.profit_ratio > rep.bound_profit + tol:
            reasons.append(f"profit_ratio {rep.profit_ratio:.12g} > {rep.bound_profit:.12g}")
        if rep.welfare_ratio > rep.bound_welfare + tol:
            reasons.append(
                f"welfare_ratio {rep.welfare_ratio:.12g} > {rep.bound_welfare:.12g}"
            )
        if rep.profit_ratio < 1.0 - 1e-9:
            reasons.append(f"profit_ratio {rep.profit_ratio:.12g} < 1")
        if rep.welfare_ratio < 1.0 - 1e-9:
            reasons.append(f"welfare_ratio {rep.welfare_ratio:.12g} < 1")
        if reasons:
            violations.append(
                BoundViolation(index=idx, instance=inst, report=rep, reason="; ".join(reasons))
            )
    return violations


def random_instance(
    rng: np.random.Generator,
    n: int | None = None,
    n_max: int = 6,
    drivers: float | None = None,
    s_mode: str = "mixed",
) -> Instance:
    """Sample an instance spanning both demand regimes.

    ``s_mode``: ``"mixed"`` draws each route's cost advantage from an
    atom at zero plus a uniform; ``"positive"`` keeps every advantage
    strictly positive; ``"zero"`` zeroes them all.  Total latent demand
    is rescaled so the summed full-service supplies land between half and
    twice the driver mass, which keeps both scarcity regimes reachable.
    """
    if n is None:
        n = int(rng.integers(2, n_max + 1))
    if drivers is None:
        drivers = float(rng.uniform(50.0, 500.0))
    cfg = InstanceConfig(capacity=4.0, t1=0.0, t2=420.0, total_drivers=drivers)

    travel = rng.uniform(5.0, 40.0, size=n)
    fares = rng.uniform(10.0, 60.0, size=n)
    if s_mode == "mixed":
        s = np.where(rng.random(n) < 0.3, 0.0, rng.uniform(0.0, 60.0, size=n))
    elif s_mode == "positive":
        s = rng.uniform(0.5, 60.0, size=n)
    elif s_mode == "zero":
        s = np.zeros(n)
    else:
        raise ValueError(f"unknown s_mode {s_mode!r}")

    raw_demand = rng.uniform(0.2, 1.0, size=n)
    h = cfg.delay_factor
    full_service = np.empty(n)
    for i in range(n):
        cap_rate = cfg.capacity / (2.0 * travel[i])
        k_sat = raw_demand[i] / (cfg.peak_span * cap_rate)
        if s[i] > 0.0:
            k_sat = min(k_sat, raw_demand[i] / (cap_rate * s[i] * h))
        full_service[i] = k_sat
    target = float(rng.uniform(0.5, 2.0)) * drivers
    scale = target / float(full_service.sum())

    routes = [
        RouteParams(
            id=f"r{i + 1:02d}",
            fare=float(fares[i]),
            travel_time=float(travel[i]),
            trip_cost=0.8 * cfg.capacity * float(fares[i]),
            total_demand=float(raw_demand[i] * scale),
            cost_advantage=float(s[i]),
        )
        for i in range(n)
    ]
    return Instance.build(cfg, routes)


def random_instances(
    seed: int,
    count: int,
    n_max: int = 6,
    s_mode: str = "mixed",
    n: int | None = None,
    drivers: float | None = None,
) -> list[Instance]:
    rng = np.random.default_rng(seed)
    return [
        random_instance(rng, n=n, n_max=n_max, drivers=drivers, s_mode=s_mode)
        for _ in range(count)
    ]


def equilibrium_profit_curve(
    instance: Instance, driver_grid: Sequence[float]
) -> list[float]:
    """Equilibrium per-driver profit at each driver-mass level."""
    return [wardrop_equilibrium(instance.with_drivers(d)).pi_eq for d in driver_grid]
