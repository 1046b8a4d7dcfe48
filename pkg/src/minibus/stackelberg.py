"""Central-allocation strategies for a mixed public/private driver fleet.

A public authority controls an ``alpha`` fraction of the drivers and
commits their routes first; the remaining drivers equilibrate in
response.  Strategies:

* ``lpf``: fill the least profitable routes of the full-control optimum
  first (optimal for two routes);
* ``lncf``: plan against the linearized demand curves: simulate the
  private equilibrium there, top up routes to their saturation supplies,
  then let the private drivers re-equilibrate under the true curves;
* ``greedy``: optimize the controlled drivers alone, ignoring the
  private response (the status-quo baseline);
* ``brute_force_stackelberg``: grid search over the controlled simplex
  (oracle for small route counts).

All strategies report the objective of one canonical induced
equilibrium; the shared rank tie-break makes that choice deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .allocation import Objective, objective_value, objective_weights, optimize_routes
from .equilibrium import rank_order, solve_equilibrium
from .model import Allocation, Instance, linearized_view, per_driver_profit


@dataclass(frozen=True)
class StackelbergOutcome:
    y: Allocation
    x_response: Allocation
    combined: Allocation
    objective_value: float
    alpha: float


def _check_alpha(alpha: float) -> None:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")


def _finish(
    instance: Instance, alpha: float, obj: Objective, y: list[float]
) -> StackelbergOutcome:
    d = instance.total_drivers
    response = solve_equilibrium(instance.derived, (1.0 - alpha) * d, offsets=y)
    combined = response.allocation
    x_private = response.x_private
    return StackelbergOutcome(
        y=Allocation(x=tuple(y), total=alpha * d),
        x_response=Allocation(x=x_private, total=(1.0 - alpha) * d),
        combined=combined,
        objective_value=objective_value(instance, combined, obj),
        alpha=alpha,
    )


def lpf(instance: Instance, alpha: float, obj: Objective) -> StackelbergOutcome:
    """Lowest-profit-first: saturate the optimum's weakest routes with
    controlled drivers, leaving lucrative routes to the private fleet."""
    _check_alpha(alpha)
    d = instance.total_drivers
    target = optimize_routes(
        instance.derived, objective_weights(instance, obj), d
    )
    profits = [per_driver_profit(dr, xi) for dr, xi in zip(instance.derived, target.x)]

    if obj is Objective.WELFARE:
        # On profit ties prefer the route serving more riders per driver.
        def key(i: int) -> tuple:
            return (profits[i], -instance.derived[i].linear_slope, instance.derived[i].id)

    else:

        def key(i: int) -> tuple:
            return (profits[i], instance.derived[i].id)

    order = sorted(range(instance.n), key=key)
    y = [0.0] * instance.n
    if alpha == 1.0:
        y = list(target.x)
    else:
        remaining = alpha * d
        for i in order:
            take = min(target.x[i], remaining)
            y[i] = take
            remaining -= take
            if remaining <= 0.0:
                break
        if remaining > 0.0:  # fp leftover once every route is saturated
            y[order[-1]] += remaining
    return _finish(instance, alpha, obj, y)


def greedy(instance: Instance, alpha: float, obj: Objective) -> StackelbergOutcome:
    """Optimize the controlled drivers as if the private fleet did not exist."""
    _check_alpha(alpha)
    d = instance.total_drivers
    if alpha == 0.0:
        y = [0.0] * instance.n
    else:
        y = list(
            optimize_routes(
                instance.derived, objective_weights(instance, obj), alpha * d
            ).x
        )
    return _finish(instance, alpha, obj, y)


def lncf(instance: Instance, alpha: float, obj: Objective) -> StackelbergOutcome:
    """Linearized non-compliant-first strategy."""
    _check_alpha(alpha)
    d = instance.total_drivers
    routes = instance.derived
    n = instance.n
    if alpha == 1.0:
        # No non-compliant drivers to anticipate: plan on the true curves.
        y = list(
            optimize_routes(routes, objective_weights(instance, obj), d).x
        )
        return _finish(instance, alpha, obj, y)
    rk = rank_order(routes)
    lin = [linearized_view(dr) for dr in routes]

    # Step 1: where would the private fleet settle under the linearized
    # profit curves, with no public drivers present?
    x0 = solve_equilibrium(lin, (1.0 - alpha) * d, rank=rk).x_private

    # Step 2: top up with public drivers, maximizing the linearized
    # objective.  Ceilings stop at the full-service supply: mass past it
    # buys nothing on the true curves (and the two coincide whenever the
    # cost advantage is zero).
    caps = [
        max(0.0, min(dr.saturation_supply, dr.full_service_supply) - x0[i])
        if dr.active
        else 0.0
        for i, dr in enumerate(routes)
    ]
    budget = alpha * d
    y: list[float]
    if budget <= 0.0:
        y = [0.0] * n
    elif sum(caps) <= budget:
        y = list(caps)
        surplus = budget - sum(caps)
        weights = [dr.saturation_supply if dr.active else 0.0 for dr in routes]
        wsum = sum(weights)
        if wsum > 0.0:
            y = [yi + surplus * wi / wsum for yi, wi in zip(y, weights)]
        else:
            y = [yi + surplus / n for yi in y]
    else:
        lin_weights = objective_weights(instance, obj)
        # Shift each linearized route by x0: the remaining linear segment
        # has the same slope, so optimizing over caps is exact.
        y = list(
            optimize_routes(lin, lin_weights, budget, ceiling=caps, rank=rk).x
        )

    # Step 3: the private fleet re-equilibrates under the true curves.
    return _finish(instance, alpha, obj, y)


def _simplex_grid(n: int, total: float, steps: int) -> Iterator[tuple[float, ...]]:
    """Lattice points of the scaled simplex, lexicographic, deterministic."""
    if total <= 0.0 or steps <= 0:
        yield (0.0,) * n
        return
    unit = total / steps

    def rec(prefix: list[int], left: int, slots: int) -> Iterator[tuple[float, ...]]:
        if slots == 1:
            yield tuple((c * unit) for c in prefix + [left])
            return
        for c in range(left + 1):
            yield from rec(prefix + [c], left - c, slots - 1)

    yield from rec([], steps, n)


def brute_force_stackelberg(
    instance: Instance,
    alpha: float,
    obj: Objective,
    grid_step: float | None = None,
) -> StackelbergOutcome:
    """Grid-search oracle over controlled allocations (route count <= 4)."""
    _check_alpha(alpha)
    if instance.n > 4:
        raise ValueError("brute force is limited to 4 routes")
    d = instance.total_drivers
    budget = alpha * d
    if grid_step is None:
        grid_step = budget / 200.0 if budget > 0.0 else 1.0
    if grid_step <= 0.0:
        raise ValueError("grid_step must be positive")
    steps = max(1, round(budget / grid_step)) if budget > 0.0 else 0

    best: StackelbergOutcome | None = None
    for cand in _simplex_grid(instance.n, budget, steps):
        # Keep candidate sums exact so Allocation totals validate.
        y = list(cand)
        drift = budget - sum(y)
        if y and drift != 0.0:
            y[max(range(len(y)), key=lambda i: y[i])] += drift
        outcome = _finish(instance, alpha, obj, y)
        if best is None or outcome.objective_value > best.objective_value:
            best = outcome
    assert best is not None
    return best
