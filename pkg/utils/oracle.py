"""High-precision reference evaluations in the naive closed forms.

Only used to check the production path; nothing here is tuned for speed.
"""
import mpmath as mp

DEFAULT_DPS = 60

def _f(a, b, x, y):
    return x / (x + (1 - x) * mp.exp(a * (y - b)))

def map_f(a: float, b: float, x: float, dps: int = DEFAULT_DPS):
    with mp.workdps(dps):
        a, b, x = mp.mpf(a), mp.mpf(b), mp.mpf(x)
        return +_f(a, b, x, x)

def map_F(a: float, b: float, x: float, y: float, dps: int = DEFAULT_DPS):
    with mp.workdps(dps):
        a, b, x, y = mp.mpf(a), mp.mpf(b), mp.mpf(x), mp.mpf(y)
        return +_f(a, b, x, y), +_f(a, b, y, x)

def derivative_f(a: float, b: float, x: float, dps: int = DEFAULT_DPS):
    with mp.workdps(dps):
        a, b, x = mp.mpf(a), mp.mpf(b), mp.mpf(x)
        e = mp.exp(a * (x - b))
        return (a * x ** 2 - a * x + 1) * e / (x + (1 - x) * e) ** 2

def transverse_eigenvalue(a: float, b: float, x: float, dps: int = DEFAULT_DPS):
    with mp.workdps(dps):
        a, b, x = mp.mpf(a), mp.mpf(b), mp.mpf(x)
        e = mp.exp(a * (x - b))
        return (1 + a * x * (1 - x)) * e / (x + (1 - x) * e) ** 2

def flip_residual(a: float, b: float, x: float, dps: int = DEFAULT_DPS):
    """|1 - f_{a,b}(x) - f_{a,1-b}(1-x)| with the mirrored b taken exactly."""
    with mp.workdps(dps):
        a, b, x = mp.mpf(a), mp.mpf(b), mp.mpf(x)
        return abs(1 - _f(a, b, x, x) - _f(a, 1 - b, 1 - x, 1 - x))

def iterate_f(a: float, b: float, x0: float, n: int, dps: int = DEFAULT_DPS):
    with mp.workdps(dps):
        a, b, x = mp.mpf(a), mp.mpf(b), mp.mpf(x0)
        points = [x]
        for _ in range(n - 1):
            x = _f(a, b, x, x)
            points.append(x)
        return points

def sigma(a: float, dps: int = DEFAULT_DPS):
    """Root of x - (1 - x) exp((a/2)(x - 1/2)) in (0, 1/2) by high-precision bisection."""
    with mp.workdps(dps):
        a = mp.mpf(a)
        half = mp.mpf(1) / 2

        def gamma(x):
            return x - (1 - x) * mp.exp(a / 2 * (x - half))

        h = mp.mpf(1) / 4
        while gamma(half - h) <= 0:
            h /= 2
        lo, hi = mp.mpf(0), half - h
        for _ in range(4 * dps):
            mid = (lo + hi) / 2
            if gamma(mid) < 0:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2
