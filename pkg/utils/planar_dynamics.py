"""Dynamics of F_{a,b} off the diagonal.

Points above the diagonal are handled through the swap (x, y) -> (y, x),
which commutes with F exactly because both coordinates share one kernel.
"""
import logging
import math
import sys
from typing import List, Optional, Tuple

import numpy as np

from config import settings
from exceptions import CertificateError, DomainError, PreconditionError
from schemas import (
    DiagonalJacobian, FixedPointsReport, GameSpec, Params, PlanarFixedPointReport, PlanarLimit,
    PlanarLimitKind, PlanarOrbit, RegionEnum, RegionLabel, TransverseCertificate
)
from utils.interval_dynamics import cesaro_average, find_invariant_interval
from utils.map_core import (
    _check_unit, _component, _spread, derivative_f, expected_player_cost, is_nash_equilibrium, jacobian_F,
    params_from_game, transverse_eigenvalue
)

logger = logging.getLogger(__name__)

Point = Tuple[float, float]

NASH_POINTS = {(0.0, 1.0), (1.0, 0.0)}

def _check_point(point: Point, name: str = "start") -> Point:
    x, y = float(point[0]), float(point[1])
    _check_unit(x, f"{name}.x")
    _check_unit(y, f"{name}.y")
    return x, y

def distance_to_diagonal(x: float, y: float) -> float:
    return abs(x - y) / math.sqrt(2.0)

def iterate_planar(p: Params, start: Point, n: int) -> PlanarOrbit:
    x, y = _check_point(start)
    if n < 1:
        raise DomainError("n must be at least 1", field="n", value=n)
    a, b = p.a, p.b
    points: List[Point] = []
    sums_x: List[float] = []
    sums_y: List[float] = []
    sx = sy = 0.0
    for _ in range(n):
        points.append((x, y))
        sums_x.append(sx)
        sums_y.append(sy)
        sx += x - b
        sy += y - b
        x, y = _component(a, b, x, y), _component(a, b, y, x)
    return PlanarOrbit(params=p, start=start, points=points, partial_sums_x=sums_x, partial_sums_y=sums_y)

# ------------------------------------------------------------------ diagonal

def diagonal_jacobian(p: Params, x: float) -> DiagonalJacobian:
    matrix = jacobian_F(p, x, x)
    return DiagonalJacobian(
        x=x,
        matrix=matrix.tolist(),
        tangential_eigenvalue=derivative_f(p, x),
        transverse_eigenvalue=transverse_eigenvalue(p, x)
    )

def _log_lambda(a: float, b: float, x: float) -> float:
    # log of (1 + a t) s (1 - s) / t with t = x (1 - x) and s = f(x)
    if x == 0.0:
        return a * b
    if x == 1.0:
        return a * (1.0 - b)
    t = x * (1.0 - x)
    spread = _spread(a, b, x, x)
    if spread == 0.0:
        return -math.inf
    return math.log1p(a * t) + math.log(spread) - math.log(t)

def transverse_certificate(p: Params, sample: int = 100, delta: Optional[float] = None) -> TransverseCertificate:
    """Closed-form horizon N with kappa = delta^4 (1 + a delta^2)^N > 1, checked
    against the product of transverse multipliers along ``sample`` diagonal orbits.
    """
    if sample < 1:
        raise DomainError("sample must be at least 1", field="sample", value=sample)
    if delta is None:
        delta = find_invariant_interval(p).delta
    elif not 0.0 < delta < 0.5:
        raise DomainError(f"delta must lie in (0, 1/2), got {delta}", field="delta", value=delta)

    a, b = p.a, p.b
    growth = math.log1p(a * delta * delta)
    horizon = 4.0 * math.log(1.0 / delta) / growth
    if horizon + 1 > settings.CERTIFICATE_MAX_N:
        raise CertificateError(
            f"certificate horizon {horizon:.3g} exceeds {settings.CERTIFICATE_MAX_N} steps at a={a}, delta={delta}"
        )
    N = math.ceil(horizon) + 1
    log_kappa = 4.0 * math.log(delta) + N * growth

    starts = np.linspace(delta, 1.0 - delta, sample)
    worst = math.inf
    for x0 in starts:
        x = float(x0)
        total = 0.0
        for _ in range(N):
            total += _log_lambda(a, b, x)
            x = _component(a, b, x, x)
        if total < log_kappa:
            logger.error(f"Transverse certificate failed at a={a}, b={b}, start={float(x0)}")
            raise CertificateError("transverse product below kappa", start=float(x0))
        worst = min(worst, total)

    logger.info(f"Transverse certificate a={a}, b={b}: delta={delta}, N={N}, log kappa={log_kappa:.6g}")
    return TransverseCertificate(
        params=p,
        delta=delta,
        N=N,
        kappa=math.exp(log_kappa),
        log_kappa=log_kappa,
        samples=sample,
        min_log_product=worst,
        verified_on=f"{sample} diagonal orbits from starts spread over [{delta}, {1.0 - delta}]"
    )

# ------------------------------------------------------------ fixed points

def classify_planar_fixed_points(p: Params, g: Optional[GameSpec] = None) -> FixedPointsReport:
    a, b = p.a, p.b
    if g is not None:
        game_b = params_from_game(g).b
        if abs(game_b - b) > 1e-12:
            raise DomainError(f"game has b={game_b}, parameters have b={b}", field="b", value=b)

    reports = []
    for point in ((0.0, 0.0), (1.0, 1.0), (0.0, 1.0), (1.0, 0.0), (b, b)):
        x, y = point
        if point == (b, b):
            frame = diagonal_jacobian(p, b)
            eigenvalues = (frame.tangential_eigenvalue, frame.transverse_eigenvalue)
        else:
            # off-diagonal entries vanish at the corners
            matrix = jacobian_F(p, x, y)
            eigenvalues = (float(matrix[0, 0]), float(matrix[1, 1]))
        image = (_component(a, b, x, y), _component(a, b, y, x))

        if g is not None:
            is_nash = is_nash_equilibrium(g, x, y)
            expected_cost = expected_player_cost(g, x, y)[0]
        else:
            is_nash = point in NASH_POINTS or point == (b, b)
            expected_cost = None

        reports.append(PlanarFixedPointReport(
            point=point,
            eigenvalues=eigenvalues,
            attracting=max(abs(e) for e in eigenvalues) < 1.0,
            is_nash=is_nash,
            residual=math.hypot(image[0] - x, image[1] - y),
            expected_cost=expected_cost
        ))
    return FixedPointsReport(params=p, game=g, fixed_points=reports)

# ----------------------------------------------------------------- regions

def routing_delta(p: Params) -> float:
    """A delta small enough that F maps T_delta into T_delta and V."""
    a, b = p.a, p.b
    # smallest image y over S_r is F at (b, 1); the largest image x over S_ell
    # is F at (b, 0), whose distance to 1 is the mirrored kernel at (1 - b, 1)
    delta_r = _component(a, b, b, 1.0)
    delta_l = _component(a, 1.0 - b, 1.0 - b, 1.0)
    delta = 0.5 * min(delta_r, delta_l)
    if delta == 0.0:
        logger.warning(f"routing delta underflows at a={a}, b={b}; T_delta tracking uses the smallest normal float")
        delta = sys.float_info.min
    return delta

def _region_below(b: float, delta: float, x: float, y: float) -> RegionEnum:
    """Region of a point with y <= x, checked in order diagonal, V, T_delta, S_r, S_ell."""
    if x == y:
        return RegionEnum.diagonal
    if 0.0 <= y < b < x <= 1.0:
        return RegionEnum.V
    if b <= y < x <= 1.0 - delta or delta <= y < x <= b:
        return RegionEnum.T_delta
    if b <= y <= x <= 1.0:
        return RegionEnum.S_r
    return RegionEnum.S_ell

def _check_delta(p: Params, delta: float) -> None:
    if not 0.0 < delta < min(p.b, 1.0 - p.b):
        raise DomainError(f"delta must lie in (0, min(b, 1 - b)), got {delta}", field="delta", value=delta)

def region_of(p: Params, delta: float, point: Point) -> RegionLabel:
    _check_delta(p, delta)
    x, y = _check_point(point, "point")
    mirrored = y > x
    if mirrored:
        x, y = y, x
    return RegionLabel(region=_region_below(p.b, delta, x, y), mirrored=mirrored, delta=delta)

# ------------------------------------------------------------- convergence

def planar_converge(
    p: Params,
    start: Point,
    n_max: Optional[int] = None,
    tol: Optional[float] = None,
    delta: Optional[float] = None
) -> PlanarLimit:
    """Iterate F until the orbit is within ``tol`` of (1, 0) or (0, 1).

    Off-diagonal orbits are tracked in the triangle below the diagonal,
    recording the step they enter V, whether they ever leave it, and any
    image of a T_delta point landing outside T_delta and V.
    """
    n_max = settings.PLANAR_N_MAX if n_max is None else n_max
    tol = settings.PLANAR_TOL if tol is None else tol
    if tol < 1e-12:
        raise PreconditionError(f"tol must be at least 1e-12, got {tol}", operation="planar_converge")
    x, y = _check_point(start)
    delta = routing_delta(p) if delta is None else delta
    _check_delta(p, delta)
    a, b = p.a, p.b

    if x == y:
        cesaro = None
        if 0.0 < x < 1.0:
            cesaro = cesaro_average(p, x, max(1, n_max))
        return PlanarLimit(
            params=p, start=(x, y), kind=PlanarLimitKind.diagonal, side="diagonal",
            steps=0, final=(x, y), delta=delta, cesaro=cesaro
        )

    mirrored = y > x
    if mirrored:
        x, y = y, x

    entered_v: Optional[int] = None
    left_v = False
    violations = 0
    region = _region_below(b, delta, x, y)
    kind = PlanarLimitKind.undecided
    steps = n_max
    for k in range(n_max + 1):
        if region == RegionEnum.V and entered_v is None:
            entered_v = k
        if 1.0 - x <= tol and y <= tol:
            kind = PlanarLimitKind.converged
            steps = k
            break
        if k == n_max:
            break
        x, y = _component(a, b, x, y), _component(a, b, y, x)
        previous, region = region, _region_below(b, delta, x, y)
        if previous == RegionEnum.T_delta and region not in (RegionEnum.T_delta, RegionEnum.V):
            violations += 1
        if entered_v is not None and region != RegionEnum.V:
            left_v = True

    limit = (1.0, 0.0)
    final = (x, y)
    if mirrored:
        limit = (0.0, 1.0)
        final = (y, x)
    if kind == PlanarLimitKind.undecided:
        logger.info(f"planar_converge a={a}, b={b}, start={start}: undecided after {n_max} steps")
        limit = None
    if left_v or violations:
        logger.warning(f"planar_converge a={a}, b={b}, start={start}: left_v={left_v}, violations={violations}")

    return PlanarLimit(
        params=p,
        start=(float(start[0]), float(start[1])),
        kind=kind,
        side="above" if mirrored else "below",
        limit=limit,
        steps=steps,
        final=final,
        delta=delta,
        entered_v_step=entered_v,
        left_v=left_v,
        t_delta_violations=violations
    )
