"""Closed-form evaluation of the congestion game, the MWU step and the maps
f_{a,b} (diagonal) and F_{a,b} (unit square).

Every map evaluation goes through the logistic form
``sigmoid(logit(x) - a (y - b))``, which is algebraically identical to
``x / (x + (1 - x) exp(a (y - b)))`` and cannot overflow.
"""
import logging
import math
from typing import List, Tuple

import numpy as np
from scipy.special import expit, logit as np_logit

from config import settings
from exceptions import CertificateError, DegenerateGameError, DomainError, PreconditionError
from schemas import CostTable, GameSpec, Params, SchwarzianReport, StabilityEnum, StabilityReport

logger = logging.getLogger(__name__)

_EXP_MAX = 709.0

def _check_unit(value: float, name: str = "x") -> None:
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {value}", field=name, value=value)

def _safe_exp(v: float) -> float:
    if v > _EXP_MAX:
        return math.inf
    return math.exp(v)

def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)

def _logit(x: float) -> float:
    return math.log(x) - math.log1p(-x)

def _component(a: float, b: float, x: float, y: float) -> float:
    # 0 and 1 are absorbing; y == b leaves x unchanged (exp(0) == 1).
    if x == 0.0 or x == 1.0 or y == b:
        return x
    return _sigmoid(_logit(x) - a * (y - b))

def _spread(a: float, b: float, x: float, y: float) -> float:
    """s (1 - s) for s = _component(a, b, x, y), without cancellation."""
    if x == 0.0 or x == 1.0:
        return 0.0
    if y == b:
        return x * (1.0 - x)
    z = _logit(x) - a * (y - b)
    return _sigmoid(z) * _sigmoid(-z)

def _gain(a: float, b: float, x: float, y: float) -> float:
    """exp(a (y - b)) / (x + (1 - x) exp(a (y - b)))**2."""
    if x == 0.0:
        return _safe_exp(-a * (y - b))
    if x == 1.0:
        return _safe_exp(a * (y - b))
    if y == b:
        return 1.0
    return _spread(a, b, x, y) / (x * (1.0 - x))

# ------------------------------------------------------------------ game

def expected_costs(g: GameSpec, x: float, y: float) -> CostTable:
    _check_unit(x, "x")
    _check_unit(y, "y")
    return CostTable(
        c11=g.alpha * (1 + y),
        c12=g.beta * (2 - y),
        c21=g.alpha * (1 + x),
        c22=g.beta * (2 - x)
    )

def expected_player_cost(g: GameSpec, x: float, y: float) -> Tuple[float, float]:
    c = expected_costs(g, x, y)
    return x * c.c11 + (1 - x) * c.c12, y * c.c21 + (1 - y) * c.c22

def is_nash_equilibrium(g: GameSpec, x: float, y: float, tol: float = 1e-12) -> bool:
    c = expected_costs(g, x, y)

    def best_response(prob: float, first: float, second: float) -> bool:
        diff = (first - second) / max(abs(first), abs(second), 1.0)
        if prob == 1.0:
            return diff <= tol
        if prob == 0.0:
            return diff >= -tol
        return abs(diff) <= tol

    return best_response(x, c.c11, c.c12) and best_response(y, c.c21, c.c22)

def _mwu_coordinate(x: float, exponent: float, log_keep: float) -> float:
    if x == 0.0 or x == 1.0 or exponent == 0.0:
        return x
    return _sigmoid(_logit(x) - exponent * log_keep)

def mwu_step(g: GameSpec, x: float, y: float) -> Tuple[float, float]:
    """One round of multiplicative weights for both players, from raw costs."""
    c = expected_costs(g, x, y)
    log_keep = math.log1p(-g.epsilon)
    return (
        _mwu_coordinate(x, c.c12 - c.c11, log_keep),
        _mwu_coordinate(y, c.c22 - c.c21, log_keep)
    )

def params_from_game(g: GameSpec) -> Params:
    b = (2 * g.beta - g.alpha) / (g.alpha + g.beta)
    if not 0.0 < b < 1.0:
        logger.info(f"Degenerate game alpha={g.alpha} beta={g.beta}: b={b}")
        raise DegenerateGameError(
            f"degenerate game: b = {b} lies outside (0, 1); orbits collapse to a corner",
            b=b
        )
    a = (g.alpha + g.beta) * -math.log1p(-g.epsilon)
    return Params(a=a, b=b)

# ------------------------------------------------------------------ maps

def map_f(p: Params, x: float) -> float:
    _check_unit(x)
    return _component(p.a, p.b, x, x)

def map_F(p: Params, x: float, y: float) -> Tuple[float, float]:
    _check_unit(x, "x")
    _check_unit(y, "y")
    return _component(p.a, p.b, x, y), _component(p.a, p.b, y, x)

def _check_unit_array(xs: np.ndarray, name: str = "x") -> None:
    if not np.all((xs >= 0.0) & (xs <= 1.0)):
        raise DomainError(f"{name} must lie in [0, 1]", field=name)

def _component_array(a: float, b: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        out = expit(np_logit(x) - a * (y - b))
    return np.where((x == 0.0) | (x == 1.0) | (y == b), x, out)

def map_f_array(p: Params, xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    _check_unit_array(xs)
    return _component_array(p.a, p.b, xs, xs)

def map_F_array(p: Params, xs, ys) -> Tuple[np.ndarray, np.ndarray]:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    _check_unit_array(xs, "x")
    _check_unit_array(ys, "y")
    return _component_array(p.a, p.b, xs, ys), _component_array(p.a, p.b, ys, xs)

# ----------------------------------------------------------- derivatives

def derivative_f(p: Params, x: float) -> float:
    _check_unit(x)
    a = p.a
    return (1.0 - a * x * (1.0 - x)) * _gain(a, p.b, x, x)

def transverse_eigenvalue(p: Params, x: float) -> float:
    _check_unit(x)
    a = p.a
    return (1.0 + a * x * (1.0 - x)) * _gain(a, p.b, x, x)

def jacobian_F(p: Params, x: float, y: float) -> np.ndarray:
    _check_unit(x, "x")
    _check_unit(y, "y")
    a, b = p.a, p.b
    return np.array([
        [_gain(a, b, x, y), -a * _spread(a, b, x, y)],
        [-a * _spread(a, b, y, x), _gain(a, b, y, x)]
    ])

def critical_points(p: Params) -> Tuple[float, ...]:
    if p.a <= 4:
        return ()
    r = math.sqrt(0.25 - 1.0 / p.a)
    return 0.5 - r, 0.5 + r

def stability_label(multiplier: float, tol: float = None) -> StabilityEnum:
    tol = settings.NEUTRAL_TOL if tol is None else tol
    gap = abs(multiplier) - 1.0
    if abs(gap) <= tol:
        return StabilityEnum.neutral
    return StabilityEnum.attracting if gap < 0 else StabilityEnum.repelling

def fixed_point_stability(p: Params) -> List[StabilityReport]:
    reports = []
    for point in (0.0, p.b, 1.0):
        multiplier = derivative_f(p, point)
        reports.append(StabilityReport(point=point, multiplier=multiplier, label=stability_label(multiplier)))
    return reports

def schwarzian_certificate(p: Params, grid_size: int = None) -> SchwarzianReport:
    """Certify Sf < 0 for a > 4 via P_a(t) = a^3 t^2 - 4 a^2 t + 6 a - 12 > 0, t = x (1 - x)."""
    grid_size = grid_size or settings.SCHWARZIAN_GRID_SIZE
    a = p.a
    if a <= 4:
        raise PreconditionError("precondition violated: a must exceed 4", operation="schwarzian_certificate")
    if grid_size < 2:
        raise PreconditionError("grid_size must be at least 2", operation="schwarzian_certificate")

    def poly(t):
        return a ** 3 * t ** 2 - 4 * a ** 2 * t + 6 * a - 12

    t_star = min(2.0 / a, 0.25)
    p_at_t_star = float(poly(t_star))
    p_grid_min = float(min(np.min(poly(np.linspace(0.0, 0.25, grid_size))), p_at_t_star))

    xs = np.linspace(1e-6, 1 - 1e-6, grid_size)
    u = xs * (xs - 1.0)
    numerator = -a * (-12 + 6 * a + 4 * a ** 2 * u + a ** 3 * u ** 2)
    with np.errstate(divide="ignore"):
        sg = numerator / (2 * (1 + a * u) ** 2)
    sg_grid_max = float(np.max(sg))

    report = SchwarzianReport(
        a=a,
        t_star=t_star,
        p_at_t_star=p_at_t_star,
        p_grid_min=p_grid_min,
        sg_grid_max=sg_grid_max,
        grid_size=grid_size,
        positive=p_at_t_star > 0 and p_grid_min > 0,
        negative=sg_grid_max < 0
    )
    if not (report.positive and report.negative):
        logger.error(f"Schwarzian certificate failed at a={a}: {report}")
        raise CertificateError(f"Schwarzian sign certificate failed at a={a}")
    logger.info(f"Schwarzian certificate at a={a}: min P={p_grid_min:.6g}, max Sg={sg_grid_max:.6g}")
    return report

def flip_conjugacy_residual(p: Params, x: float) -> float:
    """|1 - f_{a,b}(x) - f_{a,1-b}(1 - x)|.

    In the logit coordinate the mirrored exponent is exactly ``-z`` for
    ``z = logit(x) - a (x - b)``, so both terms are evaluated from one ``z``.
    """
    _check_unit(x)
    forward = map_f(p, x)
    if x == 0.0 or x == 1.0 or x == p.b:
        mirrored = 1.0 - x
    else:
        mirrored = _sigmoid(-(_logit(x) - p.a * (x - p.b)))
    return abs(1.0 - forward - mirrored)
