import argparse
import logging

from dependencies import add_format_flag, add_param_flags, emit, resolve_params
from exceptions import UndecidedError
from schemas import PlanarLimitKind
from utils.planar_dynamics import (
    classify_planar_fixed_points, planar_converge, region_of, routing_delta, transverse_certificate
)

logger = logging.getLogger(__name__)

REGION_HELP = (
    "regions are assigned in the order diagonal, V, T_delta, S_r, S_ell after folding points "
    "above the diagonal onto it with (x, y) -> (y, x)"
)

def planar_command(args: argparse.Namespace) -> int:
    p, _ = resolve_params(args)
    limit = planar_converge(p, (args.x0, args.y0), n_max=args.n_max, tol=args.tol, delta=args.delta)
    emit(limit, args.format)
    if limit.kind == PlanarLimitKind.undecided:
        raise UndecidedError(f"undecided after {limit.steps} steps from {limit.start}", steps=limit.steps)
    return 0

def fixed_points_command(args: argparse.Namespace) -> int:
    p, g = resolve_params(args)
    report = classify_planar_fixed_points(p, g)
    rows = [
        (fp.point[0], fp.point[1], fp.eigenvalues[0], fp.eigenvalues[1], fp.attracting, fp.is_nash, fp.residual)
        for fp in report.fixed_points
    ]
    emit(report, args.format, rows, ["x", "y", "eigenvalue_1", "eigenvalue_2", "attracting", "is_nash", "residual"])
    return 0

def certificate_command(args: argparse.Namespace) -> int:
    p, _ = resolve_params(args)
    emit(transverse_certificate(p, args.sample, delta=args.delta), args.format)
    return 0

def regions_command(args: argparse.Namespace) -> int:
    p, _ = resolve_params(args)
    delta = routing_delta(p) if args.delta is None else args.delta
    label = region_of(p, delta, (args.x0, args.y0))
    emit(label, args.format, [(args.x0, args.y0, label.name, label.delta)], ["x", "y", "region", "delta"])
    return 0

def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "planar",
        help="convergence of F_{a,b} to (1, 0) below the diagonal and (0, 1) above it",
        description=f"Iterate F_{{a,b}} from (x0, y0); {REGION_HELP}."
    )
    add_param_flags(parser)
    parser.add_argument("--x0", type=float, required=True)
    parser.add_argument("--y0", type=float, required=True)
    parser.add_argument("--n-max", type=int, default=None)
    parser.add_argument("--tol", type=float, default=None)
    parser.add_argument("--delta", type=float, default=None, help="T_delta width (default: routing delta)")
    add_format_flag(parser)
    parser.set_defaults(handler=planar_command)

    parser = subparsers.add_parser("fixed-points", help="the five fixed points of F_{a,b} and their Nash status")
    add_param_flags(parser)
    add_format_flag(parser)
    parser.set_defaults(handler=fixed_points_command)

    parser = subparsers.add_parser("certificate", help="exponential repulsion of the diagonal: horizon N and kappa")
    add_param_flags(parser)
    parser.add_argument("--sample", type=int, default=100)
    parser.add_argument("--delta", type=float, default=None, help="default: invariant-interval delta")
    add_format_flag(parser)
    parser.set_defaults(handler=certificate_command)

    parser = subparsers.add_parser("regions", help="region V, T_delta, S_r or S_ell of a point", description=REGION_HELP)
    add_param_flags(parser)
    parser.add_argument("--x0", type=float, required=True)
    parser.add_argument("--y0", type=float, required=True)
    parser.add_argument("--delta", type=float, default=None)
    add_format_flag(parser)
    parser.set_defaults(handler=regions_command)
