"""Market model of informal fixed-route transit: closed-form rider
demand under queuing, driver equilibria, optimal allocations,
budget-balanced cross-subsidies, and central-allocation strategies."""

__version__ = "0.1.0"

from .allocation import Objective, marginal_value, objective_value, optimize_allocation
from .analysis import (
    BoundViolation,
    RatioReport,
    certify_bounds,
    lpf_lower_bound_instance,
    lpf_lower_bound_ratio,
    random_instance,
    random_instances,
    ratio_report,
    tight_profit_instance,
    tight_welfare_instance,
)
from .equilibrium import (
    EquilibriumCheck,
    EquilibriumResult,
    is_equilibrium,
    rank_order,
    solve_equilibrium,
    supply_at_profit,
    wardrop_equilibrium,
)
from .model import (
    Allocation,
    DerivedRoute,
    Instance,
    InstanceConfig,
    RegimeError,
    RouteParams,
    ScheduleReport,
    allocation_from,
    derive_route,
    instance_gamma,
    linearized_demand,
    linearized_view,
    minibus_demand,
    per_driver_profit,
    rider_schedule,
    service_time,
)
from .scenario import (
    InstanceParseError,
    InstanceValidationError,
    SweepTable,
    bundled_instance,
    parse_instance,
    serialize_instance,
    sweep_alpha,
    sweep_drivers,
    synthetic_evening_network,
)
from .stackelberg import (
    StackelbergOutcome,
    brute_force_stackelberg,
    greedy,
    lncf,
    lpf,
)
from .subsidy import SchemeReport, TransferVector, transfers_for_target, verify_scheme

__all__ = [
    "Allocation",
    "BoundViolation",
    "DerivedRoute",
    "EquilibriumCheck",
    "EquilibriumResult",
    "Instance",
    "InstanceConfig",
    "InstanceParseError",
    "InstanceValidationError",
    "Objective",
    "RatioReport",
    "RegimeError",
    "RouteParams",
    "ScheduleReport",
    "SchemeReport",
    "StackelbergOutcome",
    "SweepTable",
    "TransferVector",
    "allocation_from",
    "brute_force_stackelberg",
    "bundled_instance",
    "certify_bounds",
    "derive_route",
    "greedy",
    "instance_gamma",
    "is_equilibrium",
    "linearized_demand",
    "linearized_view",
    "lncf",
    "lpf",
    "lpf_lower_bound_instance",
    "lpf_lower_bound_ratio",
    "marginal_value",
    "minibus_demand",
    "objective_value",
    "optimize_allocation",
    "parse_instance",
    "per_driver_profit",
    "random_instance",
    "random_instances",
    "rank_order",
    "ratio_report",
    "rider_schedule",
    "serialize_instance",
    "service_time",
    "solve_equilibrium",
    "supply_at_profit",
    "sweep_alpha",
    "sweep_drivers",
    "synthetic_evening_network",
    "tight_profit_instance",
    "tight_welfare_instance",
    "transfers_for_target",
    "verify_scheme",
    "wardrop_equilibrium",
]
