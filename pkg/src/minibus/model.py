"""Closed-form rider demand, driver profit, and schedule curves for a
single minibus route during a peak period.

A route is served by a continuum of drivers, each running full round
trips with a fixed vehicle capacity.  Riders weigh the minibus against a
fixed-cost outside option; when service capacity is scarce they queue
and shift their arrival times, which is what shapes the demand curve:

* served demand is concave quadratic in driver supply up to the
  full-service threshold, and flat (all demand served) beyond it;
* when the route's queuing tolerance is zero the curve degenerates to
  the familiar capacity-constrained piecewise-linear form.

All rider-side costs are expressed in waiting-minutes.  Monetary
quantities (fares, operating costs, value of in-vehicle time) are
converted with ``money_per_minute``, which defaults to the value of
in-vehicle time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence


class RegimeError(ValueError):
    """An operation was evaluated outside the supply regime where it is defined."""


@dataclass(frozen=True)
class InstanceConfig:
    """Market-wide primitives shared by every route.

    ``t1``/``t2`` bound the peak window (minutes); desired arrival times
    are uniform on it.  ``eta_early``/``eta_late`` are schedule-delay
    penalties per minute of early/late arrival, measured relative to a
    unit waiting-time penalty (hence ``0 < eta_early < 1``).
    ``eta_travel`` is the riders' value of in-vehicle time in money per
    minute.
    """

    capacity: float
    t1: float
    t2: float
    total_drivers: float
    eta_early: float = 0.61
    eta_late: float = 2.4
    eta_travel: float = 2.5
    money_per_minute: float | None = None

    def __post_init__(self) -> None:
        if self.capacity <= 0:
            raise ValueError("capacity must be positive")
        if self.t2 <= self.t1:
            raise ValueError("peak window must have t2 > t1")
        if self.total_drivers <= 0:
            raise ValueError("total_drivers must be positive")
        if not 0 < self.eta_early < 1:
            raise ValueError("eta_early must lie in (0, 1)")
        if self.eta_late <= 0:
            raise ValueError("eta_late must be positive")
        if self.eta_travel <= 0:
            raise ValueError("eta_travel must be positive")
        if self.money_per_minute is None:
            object.__setattr__(self, "money_per_minute", self.eta_travel)
        elif self.money_per_minute <= 0:
            raise ValueError("money_per_minute must be positive")

    @property
    def peak_span(self) -> float:
        return self.t2 - self.t1

    @property
    def delay_factor(self) -> float:
        """(eta_early + eta_late) / (eta_early * eta_late), used throughout."""
        return (self.eta_early + self.eta_late) / (self.eta_early * self.eta_late)


@dataclass(frozen=True)
class RouteParams:
    """Raw per-route primitives.

    Exactly one of ``outside_cost`` (outside-option cost in
    waiting-minutes, from which the cost advantage is derived) or
    ``cost_advantage`` (the advantage given directly) must be supplied.
    """

    id: str
    fare: float
    travel_time: float
    trip_cost: float
    total_demand: float
    outside_cost: float | None = None
    cost_advantage: float | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("route id must be non-empty")
        if self.fare <= 0:
            raise ValueError(f"route {self.id}: fare must be positive")
        if self.travel_time <= 0:
            raise ValueError(f"route {self.id}: travel_time must be positive")
        if self.trip_cost < 0:
            raise ValueError(f"route {self.id}: trip_cost must be non-negative")
        if self.total_demand <= 0:
            raise ValueError(f"route {self.id}: total_demand must be positive")
        if (self.outside_cost is None) == (self.cost_advantage is None):
            raise ValueError(
                f"route {self.id}: exactly one of outside_cost or cost_advantage is required"
            )


@dataclass(frozen=True)
class DerivedRoute:
    """Coefficient bundle driving all per-route curve evaluations.

    ``demand_slope``/``demand_curvature`` are the linear and quadratic
    coefficients of the served-demand curve below ``full_service_supply``.
    ``linear_slope`` is the riders-per-driver slope of the piecewise-linear
    under-approximation anchored at ``saturation_supply``.
    ``nonlinearity`` measures how far the true curve can sit above that
    approximation.  Routes whose cost advantage is negative are inactive:
    they serve no riders at any supply level.
    """

    id: str
    profit_per_rider: float
    cost_advantage: float
    demand: float
    arrival_rate: float
    peak_span: float
    capacity_rate: float
    saturation_supply: float
    full_service_supply: float
    demand_slope: float
    demand_curvature: float
    linear_slope: float
    nonlinearity: float
    eta_early: float
    eta_late: float
    active: bool


def derive_route(route: RouteParams, cfg: InstanceConfig) -> DerivedRoute:
    """Populate the coefficient bundle for one route.

    Raises ValueError when the per-rider profit (fare minus per-rider
    operating cost) is negative: such a route would never be served.
    """
    profit = route.fare - route.trip_cost / cfg.capacity
    if profit < 0:
        raise ValueError(
            f"route {route.id}: per-rider profit {profit:.6g} is negative "
            "(trip_cost exceeds fare * capacity)"
        )
    mpm = cfg.money_per_minute
    assert mpm is not None
    if route.cost_advantage is not None:
        advantage = route.cost_advantage
    else:
        assert route.outside_cost is not None
        minibus_fixed_cost = (route.fare + cfg.eta_travel * route.travel_time) / mpm
        advantage = route.outside_cost - minibus_fixed_cost

    span = cfg.peak_span
    rate = route.total_demand / span
    cap_rate = cfg.capacity / (2.0 * route.travel_time)
    k_sat = rate / cap_rate
    lin_slope = route.total_demand / k_sat  # == cap_rate * span
    h = cfg.delay_factor

    active = advantage >= 0.0
    if not active:
        slope = 0.0
        curvature = 0.0
        k_full = math.inf
        gamma = 0.0
    else:
        slope = cap_rate * (span + advantage * h)
        curvature = cap_rate * cap_rate * advantage * h * span / route.total_demand
        if advantage > 0.0:
            k_full = min(k_sat, route.total_demand / (cap_rate * advantage * h))
        else:
            k_full = k_sat
        gamma = (advantage / span) * h

    return DerivedRoute(
        id=route.id,
        profit_per_rider=profit,
        cost_advantage=advantage,
        demand=route.total_demand,
        arrival_rate=rate,
        peak_span=span,
        capacity_rate=cap_rate,
        saturation_supply=k_sat,
        full_service_supply=k_full,
        demand_slope=slope,
        demand_curvature=curvature,
        linear_slope=lin_slope,
        nonlinearity=gamma,
        eta_early=cfg.eta_early,
        eta_late=cfg.eta_late,
        active=active,
    )


def minibus_demand(dr: DerivedRoute, x: float) -> float:
    """Riders served on the route when a driver mass ``x`` operates on it.

    Total in ``x >= 0``: quadratic below the full-service threshold
    (half-open on the left of the threshold), all demand at or beyond it,
    identically zero for inactive routes.
    """
    if x < 0:
        raise ValueError("driver mass must be non-negative")
    if not dr.active:
        return 0.0
    if x >= dr.full_service_supply:
        return dr.demand
    return dr.demand_slope * x - dr.demand_curvature * x * x


def per_driver_profit(dr: DerivedRoute, x: float) -> float:
    """Profit accruing to each driver on the route at supply ``x``.

    The route profit is split evenly, so this is demand times per-rider
    profit over ``x``; at ``x == 0`` the (finite) right limit is returned.
    Linear-decreasing below the full-service threshold, hyperbolic beyond.
    """
    if x < 0:
        raise ValueError("driver mass must be non-negative")
    if not dr.active:
        return 0.0
    if x >= dr.full_service_supply:
        return dr.profit_per_rider * dr.demand / x
    return dr.profit_per_rider * (dr.demand_slope - dr.demand_curvature * x)


def service_time(dr: DerivedRoute, x: float) -> float:
    """Length in minutes of the interval over which riders are served.

    Equals the peak span when capacity meets the arrival rate; in the
    under-supplied regime the span stretches by the queuing riders'
    early/late arrivals.
    """
    if x <= 0:
        raise ValueError("driver mass must be positive")
    if not dr.active:
        raise RegimeError(f"route {dr.id} is inactive; no riders are served")
    mu = dr.capacity_rate * x
    if mu >= dr.arrival_rate:
        return dr.peak_span
    h = (dr.eta_early + dr.eta_late) / (dr.eta_early * dr.eta_late)
    worst_wait = dr.demand / (mu * h)
    return dr.peak_span + min(dr.cost_advantage, worst_wait) * h * (
        1.0 - mu * dr.peak_span / dr.demand
    )


@dataclass(frozen=True)
class ScheduleReport:
    """Equilibrium split of served riders by arrival timing.

    ``n_early``/``n_late`` are the rider masses arriving before/after
    their desired times; the ``len_*`` fields are the lengths of the
    early, on-time, and late stretches of the service interval, which sum
    to the total service time.
    """

    n_early: float
    n_late: float
    len_early: float
    len_late: float
    len_ontime: float


def rider_schedule(dr: DerivedRoute, x: float) -> ScheduleReport:
    """Early/late arrival masses and interval lengths in the queuing regime.

    Defined only when the route is under-supplied and the cost advantage
    sits below the worst equilibrium wait (otherwise every rider is served
    and the split is degenerate); raises RegimeError outside that regime.
    """
    if x <= 0:
        raise ValueError("driver mass must be positive")
    if not dr.active:
        raise RegimeError(f"route {dr.id} is inactive; no riders are served")
    mu = dr.capacity_rate * x
    if mu >= dr.arrival_rate:
        raise RegimeError("schedule split is undefined when capacity meets the arrival rate")
    h = (dr.eta_early + dr.eta_late) / (dr.eta_early * dr.eta_late)
    worst_wait = dr.demand / (mu * h)
    s = dr.cost_advantage
    if s >= worst_wait:
        raise RegimeError(
            "schedule split is undefined when the cost advantage exceeds the worst wait"
        )
    return ScheduleReport(
        n_early=mu * s / dr.eta_early,
        n_late=mu * s / dr.eta_late,
        len_early=s / dr.eta_early,
        len_late=s / dr.eta_late,
        len_ontime=(1.0 - s / worst_wait) * dr.peak_span,
    )


def linearized_demand(dr: DerivedRoute, x: float) -> float:
    """Piecewise-linear under-approximation anchored at the saturation supply."""
    if x < 0:
        raise ValueError("driver mass must be non-negative")
    if not dr.active:
        return 0.0
    return dr.demand * min(x / dr.saturation_supply, 1.0)


def linearized_view(dr: DerivedRoute) -> DerivedRoute:
    """The route as seen through its linearized demand curve.

    The result behaves exactly like a zero-cost-advantage route: linear
    served demand up to the saturation supply, flat per-driver profit on
    that range, hyperbolic beyond.  Inactive routes are unchanged.
    """
    if not dr.active:
        return dr
    return replace(
        dr,
        cost_advantage=0.0,
        full_service_supply=dr.saturation_supply,
        demand_slope=dr.linear_slope,
        demand_curvature=0.0,
        nonlinearity=0.0,
    )


def instance_gamma(routes: Sequence[DerivedRoute]) -> float:
    """Worst-case nonlinearity of the demand curves across active routes."""
    gammas = [dr.nonlinearity for dr in routes if dr.active]
    if not gammas:
        raise ValueError("no active routes")
    return max(gammas)


@dataclass(frozen=True)
class Allocation:
    """Non-negative per-route driver masses with a declared total."""

    x: tuple[float, ...]
    total: float

    def __post_init__(self) -> None:
        if any(v < 0 for v in self.x):
            raise ValueError("allocation entries must be non-negative")
        if abs(sum(self.x) - self.total) > 1e-9 * abs(self.total) + 1e-15:
            raise ValueError(
                f"allocation entries sum to {sum(self.x)!r}, declared total {self.total!r}"
            )

    def __len__(self) -> int:
        return len(self.x)

    def __getitem__(self, i: int) -> float:
        return self.x[i]


def allocation_from(values: Iterable[float]) -> Allocation:
    xs = tuple(float(v) for v in values)
    return Allocation(x=xs, total=sum(xs))


@dataclass(frozen=True)
class Instance:
    """A full market instance: shared config plus routes with their derived curves."""

    config: InstanceConfig
    routes: tuple[RouteParams, ...]
    derived: tuple[DerivedRoute, ...]

    @classmethod
    def build(cls, config: InstanceConfig, routes: Sequence[RouteParams]) -> "Instance":
        if not routes:
            raise ValueError("an instance needs at least one route")
        seen: set[str] = set()
        for r in routes:
            if r.id in seen:
                raise ValueError(f"duplicate route id {r.id!r}")
            seen.add(r.id)
        derived = tuple(derive_route(r, config) for r in routes)
        return cls(config=config, routes=tuple(routes), derived=derived)

    @property
    def n(self) -> int:
        return len(self.routes)

    @property
    def total_drivers(self) -> float:
        return self.config.total_drivers

    def with_drivers(self, total_drivers: float) -> "Instance":
        cfg = replace(self.config, total_drivers=total_drivers)
        return Instance(config=cfg, routes=self.routes, derived=self.derived)

    def demands(self, x: Sequence[float]) -> list[float]:
        return [minibus_demand(dr, xi) for dr, xi in zip(self.derived, x)]

    def profits(self, x: Sequence[float]) -> list[float]:
        return [per_driver_profit(dr, xi) for dr, xi in zip(self.derived, x)]

    def gamma(self) -> float:
        return instance_gamma(self.derived)
