import math

import numpy as np
import pytest

from exceptions import CertificateError, DomainError, PreconditionError
from schemas import GameSpec, Params, PlanarLimitKind, RegionEnum
from utils.map_core import derivative_f, map_F, params_from_game, transverse_eigenvalue
from utils.planar_dynamics import (
    classify_planar_fixed_points, diagonal_jacobian, distance_to_diagonal, iterate_planar, planar_converge,
    region_of, routing_delta, transverse_certificate
)

def test_distance_to_diagonal():
    assert distance_to_diagonal(1.0, 0.0) == pytest.approx(1 / math.sqrt(2))
    assert distance_to_diagonal(0.3, 0.3) == 0.0

def test_planar_orbit_matches_map(params_14):
    orbit = iterate_planar(params_14, (0.7, 0.2), 5)
    for (x, y), (u, v) in zip(orbit.points, orbit.points[1:]):
        assert (u, v) == map_F(params_14, x, y)
    assert orbit.partial_sums_x[1] == pytest.approx(0.7 - 0.4)
    assert orbit.partial_sums_y[1] == pytest.approx(0.2 - 0.4)

def test_planar_orbit_rejects_outside_square(params_14):
    with pytest.raises(DomainError):
        iterate_planar(params_14, (1.1, 0.2), 5)

# ----------------------------------------------------------- diagonal frame

@pytest.mark.parametrize("x", [0.1, 0.4, 0.75])
def test_diagonal_eigenvectors(params_14, x):
    frame = diagonal_jacobian(params_14, x)
    matrix = np.array(frame.matrix)
    assert matrix @ np.array([1.0, 1.0]) == pytest.approx(frame.tangential_eigenvalue * np.array([1.0, 1.0]), rel=1e-12)
    assert matrix @ np.array([1.0, -1.0]) == pytest.approx(frame.transverse_eigenvalue * np.array([1.0, -1.0]), rel=1e-12)
    assert frame.tangential_eigenvalue == derivative_f(params_14, x)
    assert frame.transverse_eigenvalue == transverse_eigenvalue(params_14, x)
    if x == params_14.b:
        assert frame.transverse_eigenvalue > 1.0

def test_transverse_certificate_horizon(params_14):
    certificate = transverse_certificate(params_14, sample=50, delta=0.05)
    assert certificate.N == 350
    assert certificate.kappa > 1.0
    assert certificate.log_kappa == pytest.approx(4 * math.log(0.05) + 350 * math.log1p(14 * 0.05 ** 2))
    assert certificate.min_log_product >= certificate.log_kappa

def test_transverse_certificate_default_delta(params_14):
    certificate = transverse_certificate(params_14, sample=10)
    assert certificate.delta == 2.0 ** -7
    assert certificate.N > 20_000

def test_transverse_certificate_inputs(params_14):
    with pytest.raises(DomainError):
        transverse_certificate(params_14, sample=10, delta=0.6)
    with pytest.raises(DomainError):
        transverse_certificate(params_14, sample=0, delta=0.05)

def test_transverse_certificate_horizon_cap():
    with pytest.raises(CertificateError):
        transverse_certificate(Params(a=1e-3, b=0.5), sample=1, delta=1e-3)

# ------------------------------------------------------------ fixed points

def test_planar_fixed_points(params_14):
    report = classify_planar_fixed_points(params_14)
    by_point = {fp.point: fp for fp in report.fixed_points}
    assert set(by_point) == {(0.0, 0.0), (1.0, 1.0), (0.0, 1.0), (1.0, 0.0), (0.4, 0.4)}
    assert all(fp.residual == 0.0 for fp in report.fixed_points)
    assert by_point[(1.0, 0.0)].attracting and by_point[(0.0, 1.0)].attracting
    assert not by_point[(0.0, 0.0)].attracting
    assert not by_point[(1.0, 1.0)].attracting
    assert not by_point[(0.4, 0.4)].attracting
    assert sum(fp.is_nash for fp in report.fixed_points) == 3

def test_planar_fixed_points_from_game():
    g = GameSpec(alpha=1.0, beta=1.0, epsilon=0.5)
    p = params_from_game(g)
    report = classify_planar_fixed_points(p, g)
    nash = {fp.point for fp in report.fixed_points if fp.is_nash}
    assert nash == {(0.0, 1.0), (1.0, 0.0), (0.5, 0.5)}
    assert all(fp.expected_cost is not None for fp in report.fixed_points)

def test_planar_fixed_points_game_mismatch():
    g = GameSpec(alpha=1.0, beta=1.0, epsilon=0.5)
    with pytest.raises(DomainError):
        classify_planar_fixed_points(Params(a=1.0, b=0.3), g)

# ----------------------------------------------------------------- regions

def test_routing_delta(params_14):
    assert routing_delta(params_14) == pytest.approx(7.5e-5, rel=0.05)

@pytest.mark.parametrize("point,name", [
    ((0.7, 0.2), "V"),
    ((0.5, 0.45), "T_delta"),
    ((0.99, 0.5), "S_r"),
    ((0.3, 0.01), "S_ell"),
    ((0.2, 0.7), "upper_mirror(V)"),
    ((0.5, 0.5), "diagonal"),
])
def test_region_examples(params_14, point, name):
    assert region_of(params_14, 0.05, point).name == name

@pytest.mark.parametrize("delta", [0.0, 0.4, 0.5])
def test_region_delta_range(params_14, delta):
    with pytest.raises(DomainError):
        region_of(params_14, delta, (0.7, 0.2))

def test_v_is_forward_invariant_and_monotone(params_14, rng):
    for _ in range(200):
        x = float(rng.uniform(0.41, 0.99))
        y = float(rng.uniform(0.01, 0.39))
        u, v = map_F(params_14, x, y)
        assert u > x and v < y
        assert region_of(params_14, 0.05, (u, v)).region == RegionEnum.V

def test_s_r_contracts(params_14, rng):
    for _ in range(200):
        y = float(rng.uniform(0.41, 0.99))
        x = float(rng.uniform(y, 1.0))
        u, v = map_F(params_14, x, y)
        assert u <= x and v < y

def test_swap_equivariance(params_14, rng):
    for x, y in rng.uniform(0.0, 1.0, (100, 2)):
        u, v = map_F(params_14, float(x), float(y))
        assert map_F(params_14, float(y), float(x)) == (v, u)

def test_order_below_diagonal_is_preserved(params_14, rng):
    for x, y in rng.uniform(0.0, 1.0, (500, 2)):
        x, y = float(max(x, y)), float(min(x, y))
        if x - y < 1e-9:
            continue
        u, v = map_F(params_14, x, y)
        assert u > v

def test_near_diagonal_distance_grows(params_14, rng):
    horizon = transverse_certificate(params_14, sample=10, delta=0.05).N
    for x in rng.uniform(0.05, 0.95, 100):
        start = (float(x), float(x) - 1e-6)
        end = iterate_planar(params_14, start, horizon + 1).points[-1]
        assert distance_to_diagonal(*end) > distance_to_diagonal(*start)

# ------------------------------------------------------------- convergence

def test_converges_from_v(params_14):
    limit = planar_converge(params_14, (0.7, 0.2))
    assert limit.kind == PlanarLimitKind.converged
    assert limit.limit == (1.0, 0.0)
    assert limit.side == "below"
    assert limit.entered_v_step == 0
    assert not limit.left_v
    assert 1.0 - limit.final[0] <= 1e-9 and limit.final[1] <= 1e-9

@pytest.mark.parametrize("start", [(0.3, 0.0), (0.51, 0.49), (0.95, 0.6)])
def test_converges_below_diagonal(params_14, start):
    limit = planar_converge(params_14, start)
    assert limit.kind == PlanarLimitKind.converged
    assert limit.limit == (1.0, 0.0)
    assert limit.entered_v_step is not None
    assert not limit.left_v
    assert limit.t_delta_violations == 0

def test_converges_above_diagonal_by_symmetry(params_14):
    above = planar_converge(params_14, (0.2, 0.7))
    below = planar_converge(params_14, (0.7, 0.2))
    assert above.limit == (0.0, 1.0)
    assert above.side == "above"
    assert above.steps == below.steps
    assert above.final == (below.final[1], below.final[0])

def test_diagonal_start_defers_to_cesaro(params_14):
    limit = planar_converge(params_14, (0.3, 0.3), n_max=10_000)
    assert limit.kind == PlanarLimitKind.diagonal
    assert limit.cesaro is not None and limit.cesaro.within_bound

def test_diagonal_endpoint_has_no_average(params_14):
    limit = planar_converge(params_14, (1.0, 1.0), n_max=10)
    assert limit.kind == PlanarLimitKind.diagonal
    assert limit.cesaro is None

def test_undecided_when_budget_runs_out(params_14):
    limit = planar_converge(params_14, (0.51, 0.49), n_max=1)
    assert limit.kind == PlanarLimitKind.undecided
    assert limit.limit is None
    assert limit.steps == 1

def test_tolerance_floor(params_14):
    with pytest.raises(PreconditionError):
        planar_converge(params_14, (0.7, 0.2), tol=1e-13)

@pytest.mark.parametrize("a,b", [(6.0, 0.4), (10.0, 0.6)])
def test_off_diagonal_starts_converge_to_their_side(rng, a, b):
    p = Params(a=a, b=b)
    for x, y in rng.uniform(0.0, 1.0, (20, 2)):
        if x == y:
            continue
        limit = planar_converge(p, (float(x), float(y)))
        assert limit.kind == PlanarLimitKind.converged
        assert limit.limit == ((1.0, 0.0) if x > y else (0.0, 1.0))

@pytest.mark.slow
@pytest.mark.parametrize("a,b", [(6.0, 0.4), (9.0, 0.5), (10.0, 0.6), (14.0, 0.4), (30.0, 0.2)])
def test_random_off_diagonal_starts_converge(rng, a, b):
    p = Params(a=a, b=b)
    for x, y in rng.uniform(0.0, 1.0, (50, 2)):
        if x == y:
            continue
        limit = planar_converge(p, (float(x), float(y)))
        assert limit.kind == PlanarLimitKind.converged
        assert limit.limit == ((1.0, 0.0) if x > y else (0.0, 1.0))
