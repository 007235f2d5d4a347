import argparse
import logging
import sys

from config import settings
from dependencies import add_format_flag
from schemas import ARange, SweepJob, SweepKind
from utils.sweep_engine import dataset_to_csv, run_sweep

logger = logging.getLogger(__name__)

def sweep_command(args: argparse.Namespace) -> int:
    job = SweepJob(
        b_values=args.b,
        a_range=ARange(min=args.a_min, max=args.a_max, steps=args.a_steps),
        transient=args.transient,
        samples_per_cell=args.samples,
        seed=args.seed,
        kind=SweepKind(args.kind),
        threshold_tol=args.threshold_tol
    )
    result = run_sweep(job, workers=args.workers, out_dir=args.out, name=args.name)
    if result.manifest.flagged_cells:
        logger.info(f"{len(result.manifest.flagged_cells)} flagged cell(s)")

    if args.out is not None:
        sys.stdout.write(result.manifest.model_dump_json(indent=2) + "\n")
    elif args.format == "csv":
        sys.stdout.write(dataset_to_csv(result.rows))
    else:
        sys.stdout.write(result.model_dump_json(indent=2) + "\n")
    return 0

def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "sweep",
        help="bifurcation, Lyapunov, Cesaro or period-3 threshold datasets over an (a, b) grid"
    )
    parser.add_argument("--b", type=float, nargs="+", required=True, help="one or more b values")
    parser.add_argument("--a-min", type=float, required=True)
    parser.add_argument("--a-max", type=float, required=True)
    parser.add_argument("--a-steps", type=int, default=0, help="number of a intervals; 0 gives a single cell per b")
    parser.add_argument("--transient", type=int, default=settings.SWEEP_TRANSIENT)
    parser.add_argument("--samples", type=int, default=settings.SWEEP_SAMPLES)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--kind", choices=[k.value for k in SweepKind], default=SweepKind.bifurcation.value)
    parser.add_argument("--threshold-tol", type=float, default=settings.THRESHOLD_TOL)
    parser.add_argument("--workers", type=int, default=settings.THREADS, help="default: MWU_LAB_THREADS")
    parser.add_argument("--out", default=None, help="directory for <name>.csv and <name>.manifest.json")
    parser.add_argument("--name", default="sweep")
    add_format_flag(parser)
    parser.set_defaults(handler=sweep_command)
