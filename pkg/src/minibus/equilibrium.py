"""Wardrop-style driver equilibria.

An allocation is an equilibrium when every route carrying drivers earns
the common maximal per-driver profit.  Because per-driver profit is
continuous and non-increasing in supply on every route, the aggregate
driver mass willing to operate at a given profit level is non-increasing
in that level, so the equilibrium profit is found by bisection.  Where
profit curves are flat (zero cost advantage) the equilibrium mass split
is not unique; a fixed rank order over routes makes the selection
deterministic everywhere.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .model import Allocation, DerivedRoute, Instance, per_driver_profit

_MAX_ITER = 200


class ConvergenceError(RuntimeError):
    """Profit-level search failed to bracket or converge (should not happen)."""


@dataclass(frozen=True)
class EquilibriumResult:
    """Solved equilibrium: combined allocation, its profit level, and metadata.

    ``allocation`` includes any fixed offsets; ``x_private`` is the freely
    equilibrating mass alone.  ``supported`` lists routes carrying private
    mass.
    """

    allocation: Allocation
    x_private: tuple[float, ...]
    pi_eq: float
    supported: tuple[int, ...]
    iterations: int


@dataclass(frozen=True)
class EquilibriumCheck:
    ok: bool
    violations: tuple[tuple[int, int, float], ...]


def rank_order(routes: Sequence[DerivedRoute]) -> tuple[int, ...]:
    """Deterministic rank per route; higher rank receives flat-segment mass first.

    Routes with smaller linear yield (riders per driver on the linearized
    curve) rank higher; ties fall back to ascending route id.
    """
    order = sorted(range(len(routes)), key=lambda i: (routes[i].linear_slope, routes[i].id))
    rank = [0] * len(routes)
    for position, i in enumerate(order):
        rank[i] = len(routes) - position
    return tuple(rank)


def supply_at_profit(
    dr: DerivedRoute, pi: float, transfer: float = 0.0
) -> tuple[float, float]:
    """Closed interval of driver masses consistent with profit level ``pi``.

    This inverts the monotone per-driver profit curve (shifted by an
    optional per-driver ``transfer``): a point interval wherever the curve
    is strictly decreasing, the whole flat segment where it is constant,
    ``[0, 0]`` when the level exceeds what an empty route offers, and an
    unbounded interval when the level is at or below the curve's tail.
    """
    level = pi - transfer
    p = dr.profit_per_rider
    if not dr.active or p <= 0.0:
        # Profit is identically zero on such routes.
        if level <= 0.0:
            return (0.0, math.inf)
        return (0.0, 0.0)
    if level <= 0.0:
        return (0.0, math.inf)
    top = p * dr.demand_slope
    if level > top:
        return (0.0, 0.0)
    if dr.demand_curvature > 0.0:
        tail_top = p * dr.demand / dr.full_service_supply
        if level <= tail_top:
            x = p * dr.demand / level
        else:
            x = (top - level) / (p * dr.demand_curvature)
        return (x, x)
    # Flat profit on [0, saturation]: the whole segment sits at `top`.
    if level == top:
        return (0.0, dr.saturation_supply)
    x = p * dr.demand / level
    return (x, x)


def _interval_at(
    dr: DerivedRoute, level: float, transfer: float, flat_slack: float
) -> tuple[float, float]:
    """supply_at_profit with a tolerance band for flat-segment detection."""
    eff = level - transfer
    p = dr.profit_per_rider
    if not dr.active or p <= 0.0:
        return (0.0, math.inf) if eff <= 0.0 else (0.0, 0.0)
    if eff <= 0.0:
        return (0.0, math.inf)
    top = p * dr.demand_slope
    if dr.demand_curvature == 0.0 and abs(eff - top) <= flat_slack * max(top, 1.0):
        return (0.0, dr.saturation_supply)
    if eff > top:
        return (0.0, 0.0)
    if dr.demand_curvature > 0.0:
        tail_top = p * dr.demand / dr.full_service_supply
        if eff <= tail_top:
            x = p * dr.demand / eff
        else:
            x = (top - eff) / (p * dr.demand_curvature)
    else:
        x = p * dr.demand / eff
    return (x, x)


def solve_equilibrium(
    routes: Sequence[DerivedRoute],
    free_mass: float,
    offsets: Sequence[float] | None = None,
    transfers: Sequence[float] | None = None,
    rank: Sequence[int] | None = None,
    tol: float = 1e-8,
) -> EquilibriumResult:
    """Equilibrate ``free_mass`` drivers over routes with fixed ``offsets``.

    Each route's effective profit is evaluated at offset-plus-private mass
    and shifted by an optional per-route transfer.  The returned private
    masses sum to ``free_mass`` exactly (up to 1e-9 relative); flat-segment
    ties are resolved by ``rank`` (highest rank filled first).
    """
    n = len(routes)
    if free_mass < 0:
        raise ValueError("free_mass must be non-negative")
    offs = list(offsets) if offsets is not None else [0.0] * n
    taus = list(transfers) if transfers is not None else [0.0] * n
    if len(offs) != n or len(taus) != n:
        raise ValueError("offsets/transfers length must match the route count")
    if any(o < 0 for o in offs):
        raise ValueError("offsets must be non-negative")
    rk = tuple(rank) if rank is not None else rank_order(routes)

    base = [per_driver_profit(dr, offs[i]) + taus[i] for i, dr in enumerate(routes)]
    combined_total = free_mass + sum(offs)

    if free_mass == 0.0:
        alloc = Allocation(x=tuple(offs), total=combined_total)
        return EquilibriumResult(
            allocation=alloc,
            x_private=(0.0,) * n,
            pi_eq=max(base) if base else 0.0,
            supported=(),
            iterations=0,
        )

    pi_hi = max(base)
    # Profit levels can never fall to (or below) any route's transfer floor:
    # beyond it a route absorbs unbounded mass.
    floor = max(0.0, max(taus))
    # Flat-segment detection: well below any meaningful profit difference,
    # well above fp noise in algebraically equal levels.
    flat_slack = 1e-12

    # Hot path: per-route constants unpacked once, supply summed inline.
    live: list[tuple[float, float, float, float, float, float, float, float]] = []
    for i, dr in enumerate(routes):
        p = dr.profit_per_rider
        if not dr.active or p <= 0.0:
            continue
        top = p * dr.demand_slope
        if dr.demand_curvature > 0.0:
            tail_top = p * dr.demand / dr.full_service_supply
            inv_curv = 1.0 / (p * dr.demand_curvature)
        else:
            tail_top = top
            inv_curv = 0.0
        live.append(
            (taus[i], top, dr.demand_curvature, tail_top, inv_curv, p * dr.demand,
             dr.saturation_supply, offs[i])
        )

    def total_free_supply(level: float) -> float:
        g = 0.0
        for tau, top, curv, tail_top, inv_curv, p_demand, k_sat, off in live:
            eff = level - tau
            if eff <= 0.0:
                return math.inf
            if curv == 0.0 and abs(eff - top) <= flat_slack * (top if top > 1.0 else 1.0):
                x = k_sat
            elif eff > top:
                continue
            elif eff <= tail_top:
                x = p_demand / eff
            elif curv > 0.0:
                x = (top - eff) * inv_curv
            else:
                x = p_demand / eff
            if x > off:
                g += x - off
        return g

    def free_supply(level: float) -> list[float]:
        out = []
        for i, dr in enumerate(routes):
            _, hi = _interval_at(dr, level, taus[i], flat_slack)
            out.append(max(0.0, hi - offs[i]))
        return out

    iterations = 0
    if pi_hi <= floor + 1e-300:
        # No route offers profit above the floor: all mass is rank-placed.
        pi_star = floor
    else:
        if total_free_supply(pi_hi) >= free_mass:
            pi_star = pi_hi
        else:
            lo = floor
            span = pi_hi - floor
            for _ in range(_MAX_ITER):
                span *= 0.5
                iterations += 1
                if total_free_supply(floor + span) >= free_mass:
                    lo = floor + span
                    break
            # lo == floor when bracketing exhausts: constant-profit routes
            # absorb the remainder exactly at the floor level.
            if lo > floor:
                hi = pi_hi
                stop = 1e-14 * pi_hi
                while iterations < _MAX_ITER:
                    mid = 0.5 * (lo + hi)
                    if mid <= lo or mid >= hi or hi - lo <= stop:
                        break
                    iterations += 1
                    if total_free_supply(mid) >= free_mass:
                        lo = mid
                    else:
                        hi = mid
                if hi - lo > tol * max(pi_hi, 1.0) and iterations >= _MAX_ITER:
                    raise ConvergenceError(
                        f"profit-level bisection did not converge in {_MAX_ITER} steps"
                    )
            pi_star = lo

    x = free_supply(pi_star)
    # Unbounded intervals only arise at the floor level, where the loop
    # below reassigns the affected routes; clamp defensively.
    x = [v if math.isfinite(v) else 0.0 for v in x]
    flats: list[int] = []
    for i, dr in enumerate(routes):
        eff = pi_star - taus[i]
        p = dr.profit_per_rider
        if not dr.active or p <= 0.0:
            if eff <= 0.0:
                flats.append(i)
                x[i] = 0.0
            continue
        if dr.demand_curvature == 0.0 and abs(eff - p * dr.demand_slope) <= flat_slack * max(
            p * dr.demand_slope, 1.0
        ):
            flats.append(i)
            x[i] = 0.0  # flats start empty; rank order fills them below

    assigned = sum(x)
    residual = free_mass - assigned
    if residual < 0.0:
        scale = free_mass / assigned
        x = [v * scale for v in x]
    else:
        for i in sorted(flats, key=lambda i: -rk[i]):
            if residual <= 0.0:
                break
            dr = routes[i]
            cap = math.inf if not dr.active or dr.profit_per_rider <= 0.0 else max(
                0.0, dr.saturation_supply - offs[i]
            )
            take = min(residual, cap)
            x[i] += take
            residual -= take
        if residual > 0.0:
            total_pos = sum(x)
            if total_pos > 0.0:
                x = [v * (1.0 + residual / total_pos) for v in x]
            else:
                best = max(range(n), key=lambda i: rk[i])
                x[best] += residual

    x = [v if v > 0.0 else 0.0 for v in x]
    combined = [offs[i] + x[i] for i in range(n)]
    alloc = Allocation(x=tuple(combined), total=combined_total)
    supported = tuple(i for i in range(n) if x[i] > 0.0)
    return EquilibriumResult(
        allocation=alloc,
        x_private=tuple(x),
        pi_eq=pi_star,
        supported=supported,
        iterations=iterations,
    )


def wardrop_equilibrium(
    instance: Instance,
    free_mass: float | None = None,
    offsets: Sequence[float] | None = None,
    transfers: Sequence[float] | None = None,
    rank: Sequence[int] | None = None,
    tol: float = 1e-8,
) -> EquilibriumResult:
    """Equilibrium of the instance's drivers (all of them by default)."""
    if free_mass is None:
        free_mass = instance.total_drivers
    return solve_equilibrium(
        instance.derived, free_mass, offsets=offsets, transfers=transfers, rank=rank, tol=tol
    )


def is_equilibrium(
    instance: Instance,
    allocation: Allocation | Sequence[float],
    offsets: Sequence[float] | None = None,
    transfers: Sequence[float] | None = None,
    tol: float = 1e-8,
) -> EquilibriumCheck:
    """Check the no-profitable-deviation condition for a full allocation.

    A route is `used` when its mass exceeds its offset; the check fails if
    any other route offers more than ``tol`` (relative) above a used
    route's profit.  Violations are reported as (used, better, gap).
    """
    full = list(allocation.x) if isinstance(allocation, Allocation) else list(allocation)
    n = len(instance.derived)
    if len(full) != n:
        raise ValueError("allocation length must match the route count")
    offs = list(offsets) if offsets is not None else [0.0] * n
    taus = list(transfers) if transfers is not None else [0.0] * n
    profits = [
        per_driver_profit(dr, full[i]) + taus[i] for i, dr in enumerate(instance.derived)
    ]
    total = sum(full)
    eps_mass = 1e-12 * max(1.0, total)
    used = [i for i in range(n) if full[i] > offs[i] + eps_mass]
    violations: list[tuple[int, int, float]] = []
    for i in used:
        for j in range(n):
            gap = profits[j] - profits[i]
            denom = max(abs(profits[i]), abs(profits[j]))
            if gap > tol * denom + 1e-300:
                violations.append((i, j, gap))
    return EquilibriumCheck(ok=not violations, violations=tuple(violations))
