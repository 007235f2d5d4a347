"""Dynamics of f_{a,b} on the invariant diagonal: orbits, the invariant
interval, Cesàro averages, cycles, the symmetric two-cycle, period-3
witnesses and Lyapunov exponents.

All invariants are checked on computed (floating-point) orbits, which
shadow but need not coincide with true orbits.
"""
import logging
import math
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.optimize import bisect

from config import settings
from exceptions import CertificateError, DomainError, NotFoundError, PreconditionError
from schemas import (
    AttractionEvidence, CesaroReport, ChaosWitness, CycleReport, InvariantInterval,
    LiYorkeStatistics, LyapunovReport, Orbit, Params, PeriodicOrbit, SymmetricLimit, SymmetricLimitKind,
    ThresholdEstimate
)
from utils.map_core import (
    _check_unit, _component, _component_array, _gain, critical_points, stability_label
)

logger = logging.getLogger(__name__)

ROOT_XTOL = 1e-15
LOWER_PERIOD_TOL = 1e-9
SAME_POINT_TOL = 1e-9
WITNESS_MARGIN = 1e-9
HIT_TOL = 1e-14
LOG_FLOOR = math.log(1e-300)

def _check_interior(x0: float, name: str = "x0") -> None:
    _check_unit(x0, name)
    if x0 == 0.0 or x0 == 1.0:
        raise DomainError(f"{name} must lie strictly inside (0, 1), got {x0}", field=name, value=x0)

def _advance(a: float, b: float, x: float, steps: int) -> float:
    for _ in range(steps):
        x = _component(a, b, x, x)
    return x

def _derivative(a: float, b: float, x: float) -> float:
    return (1.0 - a * x * (1.0 - x)) * _gain(a, b, x, x)

# ------------------------------------------------------------------ orbits

def iterate(p: Params, x0: float, n: int) -> Orbit:
    _check_unit(x0, "x0")
    if n < 1:
        raise DomainError("n must be at least 1", field="n", value=n)
    a, b = p.a, p.b
    points = [0.0] * n
    sums = [0.0] * n
    x, s = x0, 0.0
    for k in range(n):
        points[k] = x
        sums[k] = s
        s += x - b
        x = _component(a, b, x, x)
    return Orbit(params=p, x0=x0, points=points, partial_sums=sums)

# ------------------------------------------------------ invariant interval

def _image_bounds(p: Params, delta: float) -> Tuple[float, float]:
    """Smallest image and smallest image-complement over [delta, 1 - delta].

    The lower half is sampled in x, the upper half in u = 1 - x so that
    1 - delta keeps its meaning when it rounds to 1.0; complements of images
    use the mirrored map f_{a,1-b}(1 - x) = 1 - f_{a,b}(x).
    """
    a, b = p.a, p.b
    half = settings.INTERVAL_GRID_SIZE // 2
    crit = [c for c in critical_points(p) if c < 0.5]
    samples = np.linspace(delta, 0.5, half)
    if crit and crit[0] >= delta:
        samples = np.append(samples, crit[0])

    # x in [delta, 1/2]
    lower_image = _component_array(a, b, samples, samples)
    lower_comp = _component_array(a, 1.0 - b, 1.0 - samples, 1.0 - samples)
    # x = 1 - u, u in [delta, 1/2]; c_r = 1 - c_l
    upper_image = _component_array(a, b, 1.0 - samples, 1.0 - samples)
    upper_comp = _component_array(a, 1.0 - b, samples, samples)

    image_min = float(min(lower_image.min(), upper_image.min()))
    comp_min = float(min(lower_comp.min(), upper_comp.min()))
    return image_min, comp_min

def _entry_steps(p: Params, x: float, lo: float, hi: float) -> int:
    a, b = p.a, p.b
    for k in range(settings.ENTRY_MAX_STEPS + 1):
        if lo <= x <= hi:
            return k
        x = _component(a, b, x, x)
    raise CertificateError(f"orbit did not enter [{lo}, {hi}] within {settings.ENTRY_MAX_STEPS} steps", start=x)

def find_invariant_interval(p: Params) -> InvariantInterval:
    for k in range(2, settings.INTERVAL_LADDER_MAX_K + 1):
        delta = math.ldexp(1.0, -k)
        image_min, comp_min = _image_bounds(p, delta)
        if image_min >= delta and comp_min >= delta:
            lo, hi = delta, 1.0 - delta
            capped = False
            try:
                entry_bound = max(_entry_steps(p, 1e-6, lo, hi), _entry_steps(p, 1.0 - 1e-6, lo, hi))
            except CertificateError:
                # delta stays certified; only the entry count is open
                entry_bound = settings.ENTRY_MAX_STEPS
                capped = True
                logger.warning(f"Entry bound for a={p.a}, b={p.b} capped at {entry_bound} step(s)")
            logger.info(f"Invariant interval for a={p.a}, b={p.b}: delta=2^-{k}, entry_bound={entry_bound}")
            return InvariantInterval(
                params=p,
                delta=delta,
                lo=lo,
                hi=hi,
                ladder_k=k,
                entry_bound=entry_bound,
                entry_bound_capped=capped,
                image_min=image_min,
                image_max=1.0 - comp_min
            )
    logger.error(f"No invariant-interval certificate for a={p.a}, b={p.b}")
    raise CertificateError(f"no certificate found for a={p.a}, b={p.b}")

# ----------------------------------------------------------------- Cesàro

def cesaro_average(
    p: Params,
    x0: float,
    n: int,
    burn_in: Optional[int] = None,
    interval: Optional[InvariantInterval] = None
) -> CesaroReport:
    """Average of n iterates paired with the bound 2 ln(1/delta) / (a n).

    With ``burn_in=None`` the orbit is first advanced until it lies in the
    certified interval, after which the bound applies.
    """
    _check_interior(x0)
    if n < 1:
        raise DomainError("n must be at least 1", field="n", value=n)
    interval = interval or find_invariant_interval(p)
    a, b = p.a, p.b

    if burn_in is None:
        try:
            burn_in = _entry_steps(p, x0, interval.lo, interval.hi)
        except CertificateError:
            burn_in = settings.ENTRY_MAX_STEPS
            logger.warning(f"Orbit from x0={x0} not yet in [{interval.lo}, {interval.hi}]; burn-in capped at {burn_in}")
    x = _advance(a, b, x0, burn_in)

    # deviations from b stay bounded, so the running sum keeps its precision
    s = 0.0
    for _ in range(n):
        s += x - b
        x = _component(a, b, x, x)

    residual = abs(s) / n
    bound = 2.0 * math.log(1.0 / interval.delta) / (a * n)
    return CesaroReport(
        params=p,
        x0=x0,
        n=n,
        burn_in=burn_in,
        delta=interval.delta,
        average=b + s / n,
        bound=bound,
        residual=residual,
        within_bound=residual <= bound
    )

def birkhoff_average(
    p: Params,
    x0: float,
    n: int,
    observable: Optional[Callable[[float], float]] = None,
    burn_in: int = 0
) -> float:
    _check_interior(x0)
    if n < 1:
        raise DomainError("n must be at least 1", field="n", value=n)
    observable = observable or (lambda v: v)
    a, b = p.a, p.b
    x = _advance(a, b, x0, burn_in)
    values = []
    for _ in range(n):
        values.append(observable(x))
        x = _component(a, b, x, x)
    return math.fsum(values) / n

# ----------------------------------------------------------------- cycles

def _proper_divisors(m: int) -> List[int]:
    return [d for d in range(1, m) if m % d == 0]

def _cycle_grid(p: Params, lo: float, hi: float) -> np.ndarray:
    parts = [np.linspace(lo, hi, settings.CYCLE_GRID_SIZE)]
    for c in critical_points(p):
        local = np.linspace(c - 1e-3, c + 1e-3, 2001)
        parts.append(local[(local >= lo) & (local <= hi)])
    return np.unique(np.concatenate(parts))

def _bracketed_roots(a: float, b: float, grid: np.ndarray, m: int) -> List[float]:
    def residual(x: float) -> float:
        return _advance(a, b, x, m) - x

    values = grid.copy()
    for _ in range(m):
        values = _component_array(a, b, values, values)
    values -= grid

    roots = [float(x) for x in grid[values == 0.0]]
    for i in np.flatnonzero(values[:-1] * values[1:] < 0):
        left, right = float(grid[i]), float(grid[i + 1])
        f_left, f_right = residual(left), residual(right)
        if f_left == 0.0:
            roots.append(left)
        elif f_right == 0.0:
            roots.append(right)
        elif f_left * f_right < 0:
            roots.append(bisect(residual, left, right, xtol=ROOT_XTOL, maxiter=200))
    return roots

def _refine(a: float, b: float, x: float, m: int) -> float:
    """Re-solve f^m(x) = x in a small bracket around a forward-iterated cycle point."""
    def residual(v: float) -> float:
        return _advance(a, b, v, m) - v

    for h in (1e-13, 1e-11, 1e-9):
        left, right = max(0.0, x - h), min(1.0, x + h)
        f_left, f_right = residual(left), residual(right)
        if f_left * f_right < 0:
            return bisect(residual, left, right, xtol=ROOT_XTOL, maxiter=200)
    return x

def _periodic_orbit(a: float, b: float, root: float, m: int) -> PeriodicOrbit:
    points = [root]
    for _ in range(m - 1):
        points.append(_component(a, b, points[-1], points[-1]))
    points = [points[0]] + [_refine(a, b, x, m) for x in points[1:]]
    start = points.index(min(points))
    points = points[start:] + points[:start]

    multiplier = 1.0
    for x in points:
        multiplier *= _derivative(a, b, x)
    residual = max(abs(_component(a, b, x, x) - points[(i + 1) % m]) for i, x in enumerate(points))
    return PeriodicOrbit(
        period=m,
        points=points,
        multiplier=multiplier,
        stability=stability_label(multiplier),
        center_of_mass=math.fsum(points) / m,
        residual=residual
    )

def find_cycles(p: Params, max_period: int, include_boundary: bool = False) -> CycleReport:
    """Periodic orbits of f_{a,b} up to ``max_period`` by sign-change
    bracketing of f^m(x) - x and bisection.

    Interior cycles only unless ``include_boundary``; the boundary fixed
    points 0 and 1 are exempt from the center-of-mass law.
    """
    if not 1 <= max_period <= settings.CYCLE_MAX_PERIOD:
        raise PreconditionError(
            f"max_period must lie in [1, {settings.CYCLE_MAX_PERIOD}], got {max_period}",
            operation="find_cycles"
        )
    a, b = p.a, p.b
    try:
        interval = find_invariant_interval(p)
        lo, hi = interval.lo, interval.hi
    except CertificateError:
        logger.warning(f"No interval certificate at a={a}, b={b}; scanning [1e-12, 1 - 1e-12]")
        lo, hi = 1e-12, 1.0 - 1e-12
    grid = _cycle_grid(p, lo, hi)

    cycles: List[PeriodicOrbit] = []
    for m in range(1, max_period + 1):
        found: List[PeriodicOrbit] = []
        for root in _bracketed_roots(a, b, grid, m):
            if not 0.0 < root < 1.0:
                continue
            if any(abs(_advance(a, b, root, d) - root) <= LOWER_PERIOD_TOL for d in _proper_divisors(m)):
                continue
            if any(abs(root - x) <= SAME_POINT_TOL for orbit in found for x in orbit.points):
                continue
            orbit = _periodic_orbit(a, b, root, m)
            spacing = np.diff(sorted(orbit.points))
            if m > 1 and spacing.min() <= SAME_POINT_TOL:
                continue
            found.append(orbit)
        if found:
            logger.debug(f"a={a}, b={b}: {len(found)} orbit(s) of period {m}")
        cycles.extend(sorted(found, key=lambda o: o.points[0]))

    if include_boundary:
        boundary = []
        for x in (0.0, 1.0):
            multiplier = _derivative(a, b, x)
            boundary.append(PeriodicOrbit(
                period=1,
                points=[x],
                multiplier=multiplier,
                stability=stability_label(multiplier),
                center_of_mass=x
            ))
        cycles = boundary + cycles

    logger.info(f"find_cycles a={a}, b={b}, max_period={max_period}: {len(cycles)} orbit(s)")
    return CycleReport(params=p, max_period=max_period, cycles=cycles)

# --------------------------------------------------------- symmetric case

def _gamma(a: float, x: float) -> float:
    return x - (1.0 - x) * math.exp(a / 2.0 * (x - 0.5))

def sigma_a(a: float) -> float:
    """Point sigma_a of the attracting two-cycle {sigma_a, 1 - sigma_a} of f_{a,1/2}, a > 8."""
    if not a > 8:
        raise PreconditionError(f"sigma_a requires a > 8, got {a}", operation="sigma_a")
    # gamma_a is concave on [0, 1/2] with gamma_a(0) < 0 = gamma_a(1/2); it is positive on (sigma, 1/2)
    h = 0.25
    while _gamma(a, 0.5 - h) <= 0.0:
        h /= 2.0
        if h < 1e-16:
            raise CertificateError(f"sigma_a is not resolvable in double precision at a={a}")
    return bisect(lambda x: _gamma(a, x), 0.0, 0.5 - h, xtol=ROOT_XTOL, maxiter=200)

def symmetric_attractor(a: float, x0: float, n: int, tol: float = 1e-8) -> SymmetricLimit:
    p = Params(a=a, b=0.5)
    _check_interior(x0)
    sigma = sigma_a(a) if a > 8 else None

    x = x0
    for k in range(n):
        if sigma is not None and abs(x - 0.5) <= HIT_TOL:
            return SymmetricLimit(
                a=a, x0=x0, kind=SymmetricLimitKind.exceptional, limit_points=[0.5],
                sigma=sigma, steps=k, hit_step=k
            )
        x = _component(a, 0.5, x, x)

    if sigma is None:
        if abs(x - 0.5) <= tol:
            return SymmetricLimit(a=a, x0=x0, kind=SymmetricLimitKind.fixed_point, limit_points=[x], steps=n)
    else:
        if abs(x - 0.5) <= HIT_TOL:
            return SymmetricLimit(
                a=a, x0=x0, kind=SymmetricLimitKind.exceptional, limit_points=[0.5],
                sigma=sigma, steps=n, hit_step=n
            )
        y = _component(a, 0.5, x, x)
        low, high = min(x, y), max(x, y)
        if abs(low - sigma) <= tol and abs(high - (1.0 - sigma)) <= tol:
            return SymmetricLimit(
                a=a, x0=x0, kind=SymmetricLimitKind.two_cycle, limit_points=[low, high],
                sigma=sigma, steps=n
            )

    logger.info(f"symmetric_attractor a={a}, x0={x0}: undecided after {n} steps (last x={x})")
    return SymmetricLimit(
        a=a, x0=x0, kind=SymmetricLimitKind.undecided, limit_points=[x], sigma=sigma, steps=n
    )

def sample_fixed_point_attraction(
    p: Params,
    starts: int = 20,
    n: int = 10_000,
    tol: float = 1e-8,
    seed: int = 0
) -> AttractionEvidence:
    """Sample orbits and count those that settle on b. Evidence only."""
    rng = np.random.default_rng(seed)
    a, b = p.a, p.b
    converged = 0
    worst = 0.0
    for x0 in rng.uniform(0.01, 0.99, starts):
        distance = abs(_advance(a, b, float(x0), n) - b)
        worst = max(worst, distance)
        converged += distance <= tol
    return AttractionEvidence(
        params=p,
        below_threshold=p.a <= p.repelling_threshold,
        starts=starts,
        converged=converged,
        max_final_distance=worst
    )

# ------------------------------------------------------------------ chaos

def _witness_holds(a: float, b: float, x: float, margin: float) -> bool:
    f1 = _component(a, b, x, x)
    f3 = _advance(a, b, f1, 2)
    return f3 < x - margin and x < f1 - margin

def chaos_witness(p: Params, grid: Optional[int] = None) -> ChaosWitness:
    """Scan (max(0, 3b - 1), b) for f^3(x) < x < f(x); b > 1/2 is reduced by the flip x -> 1 - x."""
    grid = grid or settings.CHAOS_GRID_SIZE
    if p.b > 0.5:
        inner = chaos_witness(p.mirrored(), grid)
        x = 1.0 - inner.x_witness if inner.satisfied else None
        return ChaosWitness(params=p, x_witness=x, satisfied=inner.satisfied, orientation="reversed",
                            margin=WITNESS_MARGIN)

    a, b = p.a, p.b
    lo = max(0.0, 3.0 * b - 1.0)
    if lo < b:
        xs = np.linspace(lo, b, grid + 2)[1:-1]
        f1 = _component_array(a, b, xs, xs)
        f2 = _component_array(a, b, f1, f1)
        f3 = _component_array(a, b, f2, f2)
        for i in np.flatnonzero((f3 < xs - WITNESS_MARGIN) & (xs < f1 - WITNESS_MARGIN)):
            x = float(xs[i])
            if _witness_holds(a, b, x, WITNESS_MARGIN):
                return ChaosWitness(params=p, x_witness=x, satisfied=True, margin=WITNESS_MARGIN)
    return ChaosWitness(params=p, satisfied=False, margin=WITNESS_MARGIN)

def threshold_a(b: float, tol: Optional[float] = None, a_max: Optional[float] = None) -> ThresholdEstimate:
    """Smallest a (within tol) at which the period-3 witness fires.

    Assumes the witness is monotone in a; the result is an estimate.
    """
    tol = settings.THRESHOLD_TOL if tol is None else tol
    a_max = settings.A_MAX if a_max is None else a_max
    if tol < 1e-6:
        raise PreconditionError(f"tol must be at least 1e-6, got {tol}", operation="threshold_a")
    if not 0.0 < b < 1.0:
        raise DomainError(f"b must lie in (0, 1), got {b}", field="b", value=b)

    def fires(a: float) -> bool:
        return chaos_witness(Params(a=a, b=b)).satisfied

    # f_{a,b} is a homeomorphism for a <= 4, so no period 3 below
    lo = 4.0
    if a_max <= lo or not fires(a_max):
        raise NotFoundError(f"no witness below a={a_max:g}", search_cap=a_max)
    hi = a_max
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if fires(mid):
            hi = mid
        else:
            lo = mid
    logger.info(f"threshold_a(b={b}) estimate {hi} (bracket [{lo}, {hi}])")
    return ThresholdEstimate(b=b, estimate=hi, lo=lo, hi=hi, tol=tol)

def default_burn_in(p: Params) -> int:
    try:
        interval = find_invariant_interval(p)
    except CertificateError:
        return 1000
    return 1000 if interval.entry_bound_capped else max(1000, interval.entry_bound)

def lyapunov_exponent(p: Params, x0: float, n: int, burn_in: Optional[int] = None) -> float:
    if n < 1000:
        raise PreconditionError(f"n must be at least 1000, got {n}", operation="lyapunov_exponent")
    _check_interior(x0)
    a, b = p.a, p.b
    if burn_in is None:
        burn_in = default_burn_in(p)
    x = _advance(a, b, x0, burn_in)
    total = 0.0
    for _ in range(n):
        d = abs(_derivative(a, b, x))
        total += math.log(d) if d > 1e-300 else LOG_FLOOR
        x = _component(a, b, x, x)
    return total / n

def lyapunov_report(p: Params, x0: float, n: int, burn_in: Optional[int] = None) -> LyapunovReport:
    burn_in = default_burn_in(p) if burn_in is None else burn_in
    return LyapunovReport(params=p, x0=x0, n=n, burn_in=burn_in, exponent=lyapunov_exponent(p, x0, n, burn_in))

def li_yorke_pair_witness(p: Params, x: float, y: float, n: int, burn_in: int = 0) -> LiYorkeStatistics:
    """Finite shadow of a Li-Yorke pair: min and max distance over the second half of n steps."""
    _check_unit(x, "x")
    _check_unit(y, "y")
    if n < 2:
        raise DomainError("n must be at least 2", field="n", value=n)
    a, b = p.a, p.b
    u, v = _advance(a, b, x, burn_in), _advance(a, b, y, burn_in)
    distances = []
    for k in range(n):
        if k >= n // 2:
            distances.append(abs(u - v))
        u, v = _component(a, b, u, u), _component(a, b, v, v)
    return LiYorkeStatistics(
        params=p, x=x, y=y, n=n,
        liminf_distance=min(distances),
        limsup_distance=max(distances)
    )
