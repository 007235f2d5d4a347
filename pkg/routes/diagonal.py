import argparse
import logging

from dependencies import add_format_flag, add_param_flags, emit, resolve_params
from exceptions import NotFoundError, UndecidedError
from schemas import FixedPointStability, Params, SigmaReport, SymmetricLimitKind
from utils.interval_dynamics import (
    cesaro_average, chaos_witness, find_cycles, iterate, lyapunov_report, sigma_a,
    symmetric_attractor, threshold_a
)
from utils.map_core import fixed_point_stability, map_f, schwarzian_certificate

logger = logging.getLogger(__name__)

def iterate_command(args: argparse.Namespace) -> int:
    p, _ = resolve_params(args)
    orbit = iterate(p, args.x0, args.n)
    rows = [(k, x, s) for k, (x, s) in enumerate(zip(orbit.points, orbit.partial_sums))]
    emit(orbit, args.format, rows, ["k", "x", "partial_sum"])
    return 0

def cesaro_command(args: argparse.Namespace) -> int:
    p, _ = resolve_params(args)
    emit(cesaro_average(p, args.x0, args.n, burn_in=args.burn_in), args.format)
    return 0

def cycles_command(args: argparse.Namespace) -> int:
    p, _ = resolve_params(args)
    report = find_cycles(p, args.max_period, include_boundary=args.include_boundary)
    rows = [
        (c.period, i, x, c.multiplier, c.stability.value, c.center_of_mass)
        for c in report.cycles for i, x in enumerate(c.points)
    ]
    emit(report, args.format, rows, ["period", "index", "point", "multiplier", "stability", "center_of_mass"])
    return 0

def sigma_command(args: argparse.Namespace) -> int:
    sigma = sigma_a(args.a)
    residual = abs(map_f(Params(a=args.a, b=0.5), sigma) - (1.0 - sigma))
    emit(SigmaReport(a=args.a, sigma=sigma, residual=residual), args.format)
    return 0

def symmetric_command(args: argparse.Namespace) -> int:
    limit = symmetric_attractor(args.a, args.x0, args.n, tol=args.tol)
    emit(limit, args.format, [(i, x) for i, x in enumerate(limit.limit_points)], ["index", "x"])
    if limit.kind == SymmetricLimitKind.undecided:
        raise UndecidedError(f"no limit within {args.n} steps", steps=args.n)
    return 0

def chaos_witness_command(args: argparse.Namespace) -> int:
    p, _ = resolve_params(args)
    witness = chaos_witness(p, args.grid)
    emit(witness, args.format)
    if not witness.satisfied:
        raise NotFoundError(f"not found: no period-3 witness at a={p.a}, b={p.b}")
    return 0

def threshold_command(args: argparse.Namespace) -> int:
    emit(threshold_a(args.b, tol=args.tol, a_max=args.a_max), args.format)
    return 0

def lyapunov_command(args: argparse.Namespace) -> int:
    p, _ = resolve_params(args)
    emit(lyapunov_report(p, args.x0, args.n, burn_in=args.burn_in), args.format)
    return 0

def schwarzian_command(args: argparse.Namespace) -> int:
    emit(schwarzian_certificate(Params(a=args.a, b=0.5), args.grid), args.format)
    return 0

def stability_command(args: argparse.Namespace) -> int:
    p, _ = resolve_params(args)
    table = FixedPointStability(params=p, reports=fixed_point_stability(p))
    rows = [(r.point, r.multiplier, r.label.value) for r in table.reports]
    emit(table, args.format, rows, ["point", "multiplier", "label"])
    return 0

def register(subparsers) -> None:
    parser = subparsers.add_parser("iterate", help="orbit of f_{a,b} with running sums of x_k - b")
    add_param_flags(parser)
    parser.add_argument("--x0", type=float, required=True)
    parser.add_argument("--n", type=int, required=True)
    add_format_flag(parser)
    parser.set_defaults(handler=iterate_command)

    parser = subparsers.add_parser("cesaro", help="time average of an orbit against the bound 2 ln(1/delta)/(a n)")
    add_param_flags(parser)
    parser.add_argument("--x0", type=float, required=True)
    parser.add_argument("--n", type=int, required=True)
    parser.add_argument("--burn-in", type=int, default=None,
                        help="steps discarded first (default: until the orbit enters the invariant interval)")
    add_format_flag(parser)
    parser.set_defaults(handler=cesaro_command)

    parser = subparsers.add_parser("cycles", help="periodic orbits and their centers of mass")
    add_param_flags(parser)
    parser.add_argument("--max-period", type=int, required=True)
    parser.add_argument("--include-boundary", action="store_true", help="also list the fixed points 0 and 1")
    add_format_flag(parser)
    parser.set_defaults(handler=cycles_command)

    parser = subparsers.add_parser("sigma", help="attracting two-cycle point sigma_a of f_{a,1/2}, a > 8")
    parser.add_argument("--a", type=float, required=True)
    add_format_flag(parser)
    parser.set_defaults(handler=sigma_command)

    parser = subparsers.add_parser("symmetric", help="limit of an orbit of f_{a,1/2}: fixed point 1/2 or two-cycle")
    parser.add_argument("--a", type=float, required=True)
    parser.add_argument("--x0", type=float, required=True)
    parser.add_argument("--n", type=int, default=100_000)
    parser.add_argument("--tol", type=float, default=1e-8)
    add_format_flag(parser)
    parser.set_defaults(handler=symmetric_command)

    parser = subparsers.add_parser("chaos-witness", help="period-3 witness f^3(x) < x < f(x)")
    add_param_flags(parser)
    parser.add_argument("--grid", type=int, default=None)
    add_format_flag(parser)
    parser.set_defaults(handler=chaos_witness_command)

    parser = subparsers.add_parser("threshold", help="estimated onset a_b of period three (assumes monotone onset)")
    parser.add_argument("--b", type=float, required=True)
    parser.add_argument("--tol", type=float, default=None)
    parser.add_argument("--a-max", type=float, default=None)
    add_format_flag(parser)
    parser.set_defaults(handler=threshold_command)

    parser = subparsers.add_parser("lyapunov", help="Lyapunov exponent of f_{a,b} along an orbit")
    add_param_flags(parser)
    parser.add_argument("--x0", type=float, required=True)
    parser.add_argument("--n", type=int, default=100_000)
    parser.add_argument("--burn-in", type=int, default=None)
    add_format_flag(parser)
    parser.set_defaults(handler=lyapunov_command)

    parser = subparsers.add_parser("schwarzian", help="sign certificate for the negative Schwarzian derivative, a > 4")
    parser.add_argument("--a", type=float, required=True)
    parser.add_argument("--grid", type=int, default=None)
    add_format_flag(parser)
    parser.set_defaults(handler=schwarzian_command)

    parser = subparsers.add_parser("stability", help="multipliers of the fixed points 0, b and 1")
    add_param_flags(parser)
    add_format_flag(parser)
    parser.set_defaults(handler=stability_command)
