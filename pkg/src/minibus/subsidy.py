"""Budget-balanced route transfers that implement a target allocation.

Charging tolls on lucrative routes and paying subsidies on weak ones can
make any feasible driver allocation an equilibrium.  Setting every
route's transfer-adjusted profit to the target-weighted mean profit
balances the budget exactly and equalizes driver earnings, so no driver
gains by moving.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .equilibrium import is_equilibrium, wardrop_equilibrium
from .model import Allocation, Instance, per_driver_profit


@dataclass(frozen=True)
class TransferVector:
    """Per-driver transfers (negative = toll, positive = subsidy) and the
    target allocation they implement; adjusted profit is uniform at
    ``pi_tilde_eq`` on every route."""

    tau: tuple[float, ...]
    target: Allocation
    pi_tilde_eq: float


def transfers_from_profits(
    profits: Sequence[float], target: Sequence[float]
) -> tuple[tuple[float, ...], float]:
    """Closed-form transfer vector from target-point profits and masses."""
    mass = sum(target)
    if mass <= 0.0:
        raise ValueError("target allocation must have at least one positive entry")
    pi_tilde = sum(p * x for p, x in zip(profits, target)) / mass
    tau = tuple(pi_tilde - p for p in profits)
    return tau, pi_tilde


def transfers_dense(
    profits: Sequence[float], target: Sequence[float]
) -> tuple[tuple[float, ...], float]:
    """Debug path: solve the equal-profit + budget-balance linear system directly."""
    n = len(profits)
    if sum(target) <= 0.0:
        raise ValueError("target allocation must have at least one positive entry")
    a = np.zeros((n, n))
    b = np.zeros(n)
    for r in range(n - 1):
        a[r, 0] = 1.0
        a[r, r + 1] = -1.0
        b[r] = profits[r + 1] - profits[0]
    a[n - 1, :] = np.asarray(target, dtype=float)
    tau = np.linalg.solve(a, b)
    pi_tilde = profits[0] + tau[0]
    return tuple(float(t) for t in tau), float(pi_tilde)


def transfers_for_target(
    instance: Instance, target: Allocation, solver: str = "closed-form"
) -> TransferVector:
    """Transfer vector inducing ``target`` as an equilibrium.

    ``solver`` may be ``"dense"`` to route through the explicit linear
    system instead of the closed form (debugging aid; identical result).
    """
    profits = [per_driver_profit(dr, xi) for dr, xi in zip(instance.derived, target.x)]
    if solver == "closed-form":
        tau, pi_tilde = transfers_from_profits(profits, target.x)
    elif solver == "dense":
        tau, pi_tilde = transfers_dense(profits, target.x)
    else:
        raise ValueError(f"unknown solver {solver!r}")
    return TransferVector(tau=tau, target=target, pi_tilde_eq=pi_tilde)


@dataclass(frozen=True)
class SchemeReport:
    """Verification summary for a transfer scheme.

    ``equilibrium_ok`` checks the target directly against the
    no-deviation condition under adjusted profits.  The canonical solver
    is re-run as well; when profit curves have flat segments it may pick
    a different (equally valid) equilibrium, which ``canonical_matches``
    surfaces without failing the scheme.
    """

    budget_residual: float
    budget_scale: float
    equilibrium_ok: bool
    profit_spread: float
    canonical_matches: bool
    canonical_gap: float
    wage_ok: bool | None


def verify_scheme(
    instance: Instance,
    tv: TransferVector,
    tol: float = 1e-9,
    reservation_wage: float | None = None,
) -> SchemeReport:
    target = tv.target
    profits = [per_driver_profit(dr, xi) for dr, xi in zip(instance.derived, target.x)]
    adjusted = [p + t for p, t in zip(profits, tv.tau)]
    residual = sum(t * x for t, x in zip(tv.tau, target.x))
    scale = sum(abs(t) * x for t, x in zip(tv.tau, target.x))
    spread = max(adjusted) - min(adjusted) if adjusted else 0.0

    check = is_equilibrium(instance, target, transfers=tv.tau, tol=max(tol, 1e-12))

    canonical = wardrop_equilibrium(
        instance, free_mass=target.total, transfers=tv.tau, tol=max(tol, 1e-12)
    )
    gap = max(
        (abs(a - b) for a, b in zip(canonical.allocation.x, target.x)), default=0.0
    )
    matches = gap <= 1e-7 * max(target.total, 1.0)

    wage_ok = None
    if reservation_wage is not None:
        wage_ok = tv.pi_tilde_eq >= reservation_wage - abs(reservation_wage) * 1e-12

    return SchemeReport(
        budget_residual=residual,
        budget_scale=scale,
        equilibrium_ok=check.ok,
        profit_spread=spread,
        canonical_matches=matches,
        canonical_gap=gap,
        wage_ok=wage_ok,
    )
