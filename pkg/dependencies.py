import argparse
import logging
import sys
from typing import Any, List, Optional, Sequence, TextIO, Tuple

import pandas as pd
from pydantic import BaseModel

from exceptions import UsageError
from schemas import GameSpec, Params
from utils.map_core import params_from_game

logger = logging.getLogger(__name__)

FORMATS = ("json", "csv")

def add_param_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("parameters", "give either --a/--b or --alpha/--beta/--epsilon")
    group.add_argument("--a", type=float, help="map parameter a > 0")
    group.add_argument("--b", type=float, help="interior fixed point b in (0, 1)")
    group.add_argument("--alpha", type=float, help="cost coefficient of strategy 1")
    group.add_argument("--beta", type=float, help="cost coefficient of strategy 2")
    group.add_argument("--epsilon", type=float, help="MWU learning rate in (0, 1)")

def add_format_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=FORMATS, default="json", help="output format (default json)")

def resolve_params(args: argparse.Namespace, stream: TextIO = None) -> Tuple[Params, Optional[GameSpec]]:
    """Exactly one of (a, b) or (alpha, beta, epsilon); the game form is converted and echoed."""
    direct = [getattr(args, "a", None), getattr(args, "b", None)]
    game = [getattr(args, "alpha", None), getattr(args, "beta", None), getattr(args, "epsilon", None)]
    has_direct = any(v is not None for v in direct)
    has_game = any(v is not None for v in game)

    if has_direct == has_game:
        raise UsageError("give exactly one of --a/--b or --alpha/--beta/--epsilon")
    if has_direct:
        if None in direct:
            raise UsageError("--a and --b must be given together")
        return Params(a=direct[0], b=direct[1]), None
    if None in game:
        raise UsageError("--alpha, --beta and --epsilon must be given together")

    g = GameSpec(alpha=game[0], beta=game[1], epsilon=game[2])
    p = params_from_game(g)
    logger.info(f"Converted game {g} to a={p.a}, b={p.b}")
    (stream or sys.stderr).write(f"# params_from_game: a={p.a!r} b={p.b!r}\n")
    return p, g

def emit(
    model: BaseModel,
    fmt: str,
    rows: Optional[Sequence[Sequence[Any]]] = None,
    columns: Optional[List[str]] = None,
    stream: TextIO = None
) -> None:
    stream = stream or sys.stdout
    if fmt == "csv":
        if rows is None:
            rows, columns = _flatten(model)
        frame = pd.DataFrame(list(rows), columns=columns)
        stream.write(frame.to_csv(index=False, float_format="%.17g", lineterminator="\r\n"))
    else:
        stream.write(model.model_dump_json(indent=2) + "\n")

def _flatten(model: BaseModel) -> Tuple[List[List[Any]], List[str]]:
    """Scalar fields of a model as a single CSV row."""
    data = model.model_dump(mode="json")
    columns = [k for k, v in data.items() if not isinstance(v, (dict, list))]
    return [[data[k] for k in columns]], columns
