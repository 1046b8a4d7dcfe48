"""Command-line front end.

One verb per experiment: equilibria, optimal allocations, ratio reports,
driver and control-share sweeps, cross-subsidy schemes, worst-case
instance generators, and bound certification.  Instances are read from a
file path or stdin (`-`); results go to stdout or ``--out``.  Exit codes:
0 success, 1 validation error, 2 parse error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .allocation import Objective, objective_value, optimize_allocation
from .analysis import (
    certify_bounds,
    lpf_lower_bound_instance,
    random_instances,
    ratio_report,
    tight_profit_instance,
    tight_welfare_instance,
)
from .equilibrium import wardrop_equilibrium
from .model import Instance, per_driver_profit
from .scenario import (
    ALGORITHMS,
    InstanceParseError,
    InstanceValidationError,
    parse_instance,
    serialize_instance,
    sweep_alpha,
    sweep_drivers,
    synthetic_evening_network,
)
from .subsidy import transfers_for_target, verify_scheme


def _fmt(v: float) -> str:
    import math

    if not math.isfinite(v):
        raise InstanceValidationError("non-finite value in output")
    return format(float(v), ".12g")


def _read_instance(path: str) -> Instance:
    if path == "-":
        text = sys.stdin.read()
    else:
        p = Path(path)
        if not p.exists():
            raise InstanceParseError(f"no such file: {path}")
        text = p.read_text(encoding="utf-8")
    return parse_instance(text)


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _objective(name: str) -> Objective:
    return Objective(name)


def _cmd_equilibrium(args) -> str:
    inst = _read_instance(args.instance)
    res = wardrop_equilibrium(inst)
    lines = [f"# pi_eq = {_fmt(res.pi_eq)}", "route,drivers,per_driver_profit"]
    for dr, xi in zip(inst.derived, res.allocation.x):
        lines.append(f"{dr.id},{_fmt(xi)},{_fmt(per_driver_profit(dr, xi))}")
    return "\n".join(lines) + "\n"


def _cmd_optimize(args) -> str:
    inst = _read_instance(args.instance)
    obj = _objective(args.objective)
    alloc = optimize_allocation(inst, obj)
    value = objective_value(inst, alloc, obj)
    lines = [f"# objective = {args.objective}, value = {_fmt(value)}", "route,drivers"]
    for dr, xi in zip(inst.derived, alloc.x):
        lines.append(f"{dr.id},{_fmt(xi)}")
    return "\n".join(lines) + "\n"


def _cmd_ratio(args) -> str:
    inst = _read_instance(args.instance)
    rep = ratio_report(inst)
    header = (
        "profit_ratio,welfare_ratio,p_max_over_p_min,bound_profit,bound_welfare,"
        "eq_profit_per_driver"
    )
    row = ",".join(
        _fmt(v)
        for v in (
            rep.profit_ratio,
            rep.welfare_ratio,
            rep.p_max_over_p_min,
            rep.bound_profit,
            rep.bound_welfare,
            rep.eq_per_driver_profit,
        )
    )
    return f"{header}\n{row}\n"


def _cmd_sweep_drivers(args) -> str:
    inst = _read_instance(args.instance)
    table = sweep_drivers(inst, args.d_from, args.d_to, args.d_step)
    if args.plot_dir:
        from .plotting import render_driver_sweep

        render_driver_sweep(table, Path(args.plot_dir))
    return table.to_csv()


def _cmd_cross_subsidy(args) -> str:
    inst = _read_instance(args.instance)
    obj = _objective(args.objective)
    target = optimize_allocation(inst, obj)
    tv = transfers_for_target(inst, target)
    rep = verify_scheme(inst, tv)
    lines = [
        f"# objective = {args.objective}",
        f"# pi_tilde_eq = {_fmt(tv.pi_tilde_eq)}",
        f"# budget_residual = {_fmt(rep.budget_residual)}",
        f"# equilibrium_ok = {str(rep.equilibrium_ok).lower()}",
        "route,target_drivers,profit_at_target,transfer",
    ]
    for dr, xi, tau in zip(inst.derived, target.x, tv.tau):
        lines.append(
            f"{dr.id},{_fmt(xi)},{_fmt(per_driver_profit(dr, xi))},{_fmt(tau)}"
        )
    return "\n".join(lines) + "\n"


def _cmd_stackelberg(args) -> str:
    inst = _read_instance(args.instance)
    obj = _objective(args.objective)
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    for a in algos:
        if a not in ALGORITHMS:
            raise InstanceValidationError(f"unknown algorithm {a!r}")
    try:
        grid = [float(a) for a in args.alpha_grid.split(",") if a.strip()]
    except ValueError:
        raise InstanceValidationError(f"bad --alpha-grid {args.alpha_grid!r}") from None
    table = sweep_alpha(inst, algos, grid, obj, grid_step=args.grid_step)
    if args.plot_dir:
        from .plotting import render_alpha_sweep

        render_alpha_sweep(table, Path(args.plot_dir))
    return table.to_csv()


_TIGHT_COMMENT = (
    "units: times in minutes, money in generic currency units\n"
    "rider-side costs are expressed in waiting-minutes; fares convert via money_per_minute"
)


def _cmd_gen_tight(args) -> str:
    if args.kind == "profit":
        inst = tight_profit_instance(args.eps)
        note = f"tight profit-ratio instance, eps = {args.eps!r}"
    elif args.kind == "welfare":
        inst = tight_welfare_instance(args.eps, args.pmax_pmin)
        note = (
            f"tight welfare-ratio instance, eps = {args.eps!r}, "
            f"pmax/pmin = {args.pmax_pmin!r}"
        )
    else:
        if args.alpha is None:
            raise InstanceValidationError("--kind lpf requires --alpha")
        inst = lpf_lower_bound_instance(args.alpha, args.eps)
        note = (
            f"lowest-profit-first stress instance, eps = {args.eps!r}, "
            f"alpha = {args.alpha!r}"
        )
    return serialize_instance(inst, comment=f"{note}\n{_TIGHT_COMMENT}")


def _cmd_gen_demo(args) -> str:
    inst = synthetic_evening_network(total_drivers=args.drivers)
    return serialize_instance(
        inst,
        comment=(
            "synthetic 18-route evening-peak network\n"
            + _TIGHT_COMMENT
        ),
    )


def _cmd_certify(args) -> str:
    instances = random_instances(args.seed, args.count, n_max=args.n_max)
    violations = certify_bounds(instances)
    if not violations:
        return f"# certified: {args.count} instances, seed {args.seed}, 0 violations\n"
    parts = [f"# VIOLATIONS: {len(violations)} of {args.count}, seed {args.seed}\n"]
    for v in violations:
        parts.append(
            serialize_instance(v.instance, comment=f"violation index={v.index}: {v.reason}")
        )
    return "\n".join(parts)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="minibus",
        description="Informal-transit market model: equilibria, optima, and mechanisms.",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_common(p, with_instance=True):
        if with_instance:
            p.add_argument(
                "instance", nargs="?", default="-", help="instance file, or - for stdin"
            )
        p.add_argument("--out", default=None, help="output path (default stdout)")

    p = sub.add_parser("equilibrium", help="equilibrium driver allocation")
    add_common(p)
    p.set_defaults(func=_cmd_equilibrium)

    p = sub.add_parser("optimize", help="objective-optimal allocation")
    p.add_argument("--objective", choices=["profit", "welfare"], required=True)
    add_common(p)
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("ratio", help="optimum/equilibrium ratio report")
    add_common(p)
    p.set_defaults(func=_cmd_ratio)

    p = sub.add_parser("sweep-drivers", help="ratio report across driver-mass levels")
    p.add_argument("--from", dest="d_from", type=float, required=True)
    p.add_argument("--to", dest="d_to", type=float, required=True)
    p.add_argument("--step", dest="d_step", type=float, required=True)
    p.add_argument("--plot-dir", default=None, help="also render figures into this directory")
    add_common(p)
    p.set_defaults(func=_cmd_sweep_drivers)

    p = sub.add_parser("cross-subsidy", help="budget-balanced transfers for the optimum")
    p.add_argument("--objective", choices=["profit", "welfare"], required=True)
    add_common(p)
    p.set_defaults(func=_cmd_cross_subsidy)

    p = sub.add_parser("stackelberg", help="central-allocation strategies across alpha")
    p.add_argument("--algos", default="lpf,lncf,greedy", help="comma list: lpf,lncf,greedy,brute")
    p.add_argument(
        "--alpha-grid",
        default="0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1",
        help="comma list of control shares",
    )
    p.add_argument("--objective", choices=["profit", "welfare"], required=True)
    p.add_argument("--grid-step", type=float, default=None, help="brute-force grid step")
    p.add_argument("--plot-dir", default=None, help="also render figures into this directory")
    add_common(p)
    p.set_defaults(func=_cmd_stackelberg)

    p = sub.add_parser("gen-tight", help="worst-case instance generators")
    p.add_argument("--kind", choices=["profit", "welfare", "lpf"], required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--alpha", type=float, default=None, help="control share (kind=lpf)")
    p.add_argument(
        "--pmax-pmin", type=float, default=3.0, help="per-rider profit spread (kind=welfare)"
    )
    add_common(p, with_instance=False)
    p.set_defaults(func=_cmd_gen_tight)

    p = sub.add_parser("gen-demo", help="bundled 18-route synthetic instance")
    p.add_argument("--drivers", type=float, default=1000.0)
    add_common(p, with_instance=False)
    p.set_defaults(func=_cmd_gen_demo)

    p = sub.add_parser("certify", help="check ratio bounds on random instances")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n-max", type=int, default=6)
    add_common(p, with_instance=False)
    p.set_defaults(func=_cmd_certify)

    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        text = args.func(args)
    except InstanceParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except (InstanceValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _write(text, args.out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
