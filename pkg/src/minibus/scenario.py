"""Instance-file parsing/serialization and the sweep experiments.

An instance file is a flat key=value section for the market-wide
primitives followed by a ``[routes]`` table:

    # optional comment lines
    F = 4
    t1 = 0
    t2 = 420
    D = 1000
    eta_E = 0.61
    eta_L = 2.4
    eta_T = 2.5
    money_per_minute = 2.5

    [routes]
    id,fare,travel_time,trip_cost,Lambda,outside_cost
    r01,30,12,96,5200,95

An optional ``S`` column gives a route's cost advantage directly, in
which case ``outside_cost`` is ignored for that route.  Times are in
minutes, money in generic currency units.  Sweep results are emitted as
CSV with fixed headers, 12-significant-digit values, and LF line
endings, so identical inputs produce byte-identical output.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .allocation import Objective, objective_value, optimize_allocation
from .analysis import ratio_report
from .model import Instance, InstanceConfig, RouteParams
from .stackelberg import StackelbergOutcome, brute_force_stackelberg, greedy, lncf, lpf

DRIVER_SWEEP_HEADER = "D,algo,profit_ratio,welfare_ratio,eq_profit_per_driver"
ALPHA_SWEEP_HEADER = "alpha,algo,objective,ratio"

_GLOBAL_KEYS = ("F", "t1", "t2", "D", "eta_E", "eta_L", "eta_T", "money_per_minute")
_REQUIRED_KEYS = ("F", "t1", "t2", "D", "eta_E", "eta_L", "eta_T")
_ROUTE_COLUMNS = ("id", "fare", "travel_time", "trip_cost", "Lambda", "outside_cost")

ALGORITHMS: dict[str, Callable[[Instance, float, Objective], StackelbergOutcome]] = {
    "lpf": lpf,
    "lncf": lncf,
    "greedy": greedy,
    "brute": brute_force_stackelberg,
}


class InstanceParseError(ValueError):
    """Malformed instance text; carries the 1-based source line."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class InstanceValidationError(ValueError):
    """Well-formed text whose values violate a model invariant."""


def _fmt(v: float) -> str:
    return repr(float(v))


def parse_instance(text: str) -> Instance:
    """Parse and validate an instance file."""
    globals_: dict[str, float] = {}
    route_rows: list[tuple[int, list[str]]] = []
    header: list[str] | None = None
    in_routes = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line == "[routes]":
            if in_routes:
                raise InstanceParseError("duplicate [routes] section", lineno)
            in_routes = True
            continue
        if not in_routes:
            if "=" not in line:
                raise InstanceParseError("expected key = value", lineno)
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in _GLOBAL_KEYS:
                raise InstanceParseError(f"unknown key {key!r}", lineno)
            if key in globals_:
                raise InstanceParseError(f"duplicate key {key!r}", lineno)
            try:
                globals_[key] = float(value.strip())
            except ValueError:
                raise InstanceParseError(
                    f"invalid number {value.strip()!r} for key {key!r}", lineno
                ) from None
        elif header is None:
            header = [c.strip() for c in line.split(",")]
            required = set(_ROUTE_COLUMNS) - {"outside_cost"}
            extras = set(header) - set(_ROUTE_COLUMNS) - {"S"}
            if extras:
                raise InstanceParseError(f"unknown route columns {sorted(extras)}", lineno)
            if len(set(header)) != len(header):
                raise InstanceParseError("duplicate route columns", lineno)
            missing_cols = required - set(header)
            if missing_cols:
                raise InstanceParseError(f"missing route columns {sorted(missing_cols)}", lineno)
            if "outside_cost" not in header and "S" not in header:
                raise InstanceParseError(
                    "route table needs an outside_cost or S column", lineno
                )
        else:
            cells = [c.strip() for c in line.split(",")]
            if len(cells) != len(header):
                raise InstanceParseError(
                    f"expected {len(header)} cells, got {len(cells)}", lineno
                )
            route_rows.append((lineno, cells))

    missing = [k for k in _REQUIRED_KEYS if k not in globals_]
    if missing:
        raise InstanceParseError(f"missing required keys: {', '.join(missing)}")
    if header is None:
        raise InstanceParseError("missing [routes] section")
    if not route_rows:
        raise InstanceParseError("route table is empty")

    try:
        cfg = InstanceConfig(
            capacity=globals_["F"],
            t1=globals_["t1"],
            t2=globals_["t2"],
            total_drivers=globals_["D"],
            eta_early=globals_["eta_E"],
            eta_late=globals_["eta_L"],
            eta_travel=globals_["eta_T"],
            money_per_minute=globals_.get("money_per_minute"),
        )
    except ValueError as exc:
        raise InstanceValidationError(str(exc)) from None

    col = {name: header.index(name) for name in header}
    routes = []
    for lineno, cells in route_rows:
        rid = cells[col["id"]]

        def num(name: str) -> float:
            try:
                return float(cells[col[name]])
            except ValueError:
                raise InstanceParseError(
                    f"invalid number {cells[col[name]]!r} in column {name!r}", lineno
                ) from None

        if "S" in col:
            advantage: float | None = num("S")
            outside: float | None = None
        else:
            advantage = None
            outside = num("outside_cost")
        try:
            routes.append(
                RouteParams(
                    id=rid,
                    fare=num("fare"),
                    travel_time=num("travel_time"),
                    trip_cost=num("trip_cost"),
                    total_demand=num("Lambda"),
                    outside_cost=outside,
                    cost_advantage=advantage,
                )
            )
        except InstanceParseError:
            raise
        except ValueError as exc:
            raise InstanceValidationError(str(exc)) from None

    try:
        return Instance.build(cfg, routes)
    except ValueError as exc:
        raise InstanceValidationError(str(exc)) from None


def serialize_instance(instance: Instance, comment: str | None = None) -> str:
    """Instance back to file text; parse(serialize(x)) preserves all values."""
    cfg = instance.config
    out = io.StringIO()
    if comment:
        for line in comment.splitlines():
            out.write(f"# {line}\n" if line else "#\n")
    out.write(f"F = {_fmt(cfg.capacity)}\n")
    out.write(f"t1 = {_fmt(cfg.t1)}\n")
    out.write(f"t2 = {_fmt(cfg.t2)}\n")
    out.write(f"D = {_fmt(cfg.total_drivers)}\n")
    out.write(f"eta_E = {_fmt(cfg.eta_early)}\n")
    out.write(f"eta_L = {_fmt(cfg.eta_late)}\n")
    out.write(f"eta_T = {_fmt(cfg.eta_travel)}\n")
    out.write(f"money_per_minute = {_fmt(cfg.money_per_minute)}\n")
    out.write("\n[routes]\n")
    direct = any(r.cost_advantage is not None for r in instance.routes)
    if direct:
        out.write(",".join(_ROUTE_COLUMNS[:-1]) + ",S\n")
    else:
        out.write(",".join(_ROUTE_COLUMNS) + "\n")
    for r in instance.routes:
        cells = [
            r.id,
            _fmt(r.fare),
            _fmt(r.travel_time),
            _fmt(r.trip_cost),
            _fmt(r.total_demand),
        ]
        if direct:
            s = r.cost_advantage
            if s is None:
                raise InstanceValidationError(
                    "cannot serialize a mix of outside_cost and direct-S routes"
                )
            cells.append(_fmt(s))
        else:
            assert r.outside_cost is not None
            cells.append(_fmt(r.outside_cost))
        out.write(",".join(cells) + "\n")
    return out.getvalue()


@dataclass(frozen=True)
class SweepTable:
    header: str
    rows: tuple[tuple, ...]

    def to_csv(self) -> str:
        lines = [self.header]
        for row in self.rows:
            lines.append(",".join(_cell(v) for v in row))
        return "\n".join(lines) + "\n"


def _cell(v) -> str:
    if isinstance(v, str):
        return v
    value = float(v)
    if not math.isfinite(value):
        raise ValueError("sweep tables must contain finite numbers")
    return format(value, ".12g")


def sweep_drivers(
    instance: Instance, d_from: float, d_to: float, d_step: float
) -> SweepTable:
    """Ratio report per driver-mass level over [d_from, d_to]."""
    if d_from <= 0 or d_to < d_from or d_step <= 0:
        raise ValueError("need 0 < d_from <= d_to and d_step > 0")
    rows = []
    d = d_from
    while d <= d_to + 1e-9 * d_step:
        rep = ratio_report(instance.with_drivers(d))
        rows.append(
            (d, "equilibrium", rep.profit_ratio, rep.welfare_ratio, rep.eq_per_driver_profit)
        )
        d += d_step
    return SweepTable(header=DRIVER_SWEEP_HEADER, rows=tuple(rows))


def sweep_alpha(
    instance: Instance,
    algos: Sequence[str],
    alpha_grid: Sequence[float],
    obj: Objective,
    grid_step: float | None = None,
) -> SweepTable:
    """Objective and optimality ratio per (control share, algorithm)."""
    for name in algos:
        if name not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {name!r}")
    if "brute" in algos and instance.n > 4:
        raise ValueError("brute force is limited to 4 routes")
    best = objective_value(instance, optimize_allocation(instance, obj), obj)
    rows = []
    for alpha in alpha_grid:
        for name in algos:
            if name == "brute":
                outcome = brute_force_stackelberg(instance, alpha, obj, grid_step=grid_step)
            else:
                outcome = ALGORITHMS[name](instance, alpha, obj)
            ratio = best / outcome.objective_value if outcome.objective_value > 0 else math.inf
            rows.append((alpha, name, outcome.objective_value, ratio))
    return SweepTable(header=ALPHA_SWEEP_HEADER, rows=tuple(rows))


def bundled_instance() -> Instance:
    """The packaged copy of the synthetic evening network."""
    from importlib.resources import files

    text = files("minibus.data").joinpath("evening18.txt").read_text(encoding="utf-8")
    return parse_instance(text)


def synthetic_evening_network(total_drivers: float = 1000.0) -> Instance:
    """Bundled 18-route synthetic evening-peak instance.

    Deterministic recipe sized to real-world reports of a station-hub
    auto-rickshaw market: vehicle capacity 4, a 7-hour evening peak,
    roughly 100k latent riders spread over 18 residential corridors with
    one-way trips of 5..22 minutes, fares spanning a 3x per-rider profit
    range, operating costs at 80% of full-load revenue, and walking as
    the outside option (twice the in-vehicle time plus access overhead).
    """
    cfg = InstanceConfig(
        capacity=4.0,
        t1=1020.0,
        t2=1440.0,
        total_drivers=total_drivers,
        eta_early=0.61,
        eta_late=2.4,
        eta_travel=2.5,
        money_per_minute=2.5,
    )
    n = 18
    weights = [1.0 / (3.0 + k) for k in range(1, n + 1)]
    wsum = sum(weights)
    routes = []
    for k in range(1, n + 1):
        travel = 4.0 + k
        fare = 15.0 + 30.0 * (k - 1) / (n - 1)  # longer corridors charge more
        demand = 100000.0 * weights[k - 1] / wsum
        outside = 2.0 * travel + 6.0
        routes.append(
            RouteParams(
                id=f"r{k:02d}",
                fare=fare,
                travel_time=travel,
                trip_cost=0.8 * cfg.capacity * fare,
                total_demand=demand,
                outside_cost=outside,
            )
        )
    return Instance.build(cfg, routes)
