import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trunclap import closed_form as cf
from trunclap import regularity as reg
from trunclap.errors import ParameterError
from trunclap.pde_solver import DirectionSet, GridDomain, Polytope, ScalarField, Stencil, solve_dirichlet

HALF_PI = math.pi / 2


def vertices_inside(cover, poly):
    # Containment oracle: sample points on every edge and check every cube.
    v = poly.vertices
    w = np.roll(v, -1, axis=0)
    t = np.linspace(0, 1, 50)[:, None, None]
    pts = (v + t * (w - v)).reshape(-1, 2)
    z = cover.local(pts)
    return bool(np.all(np.abs(z) <= HALF_PI + 1e-12))


# --- covers -------------------------------------------------------------------

def test_square_q_is_one_cube():
    cover = reg.build_cube_cover(Polytope.box([-HALF_PI] * 2, [HALF_PI] * 2))
    assert len(cover) == 1
    np.testing.assert_allclose(cover.centers[0], 0.0, atol=1e-12)


def test_rectangle_gets_four_cubes():
    poly = Polytope.box([-1.4, -0.7], [1.4, 0.7])
    cover = reg.build_cube_cover(poly)
    assert len(cover) == 4
    assert vertices_inside(cover, poly)
    for o in cover.rotations:
        np.testing.assert_allclose(np.abs(o), np.abs(np.round(o)), atol=1e-12)


def test_hexagon_gets_six_cubes():
    poly = Polytope.regular_polygon(6, 1.2)
    cover = reg.build_cube_cover(poly)
    assert len(cover) == 6
    assert vertices_inside(cover, poly)
    for o in cover.rotations:
        np.testing.assert_allclose(o.T @ o, np.eye(2), atol=1e-12)


def test_cover_is_tight_on_boundary():
    poly = Polytope.regular_polygon(5, 1.0, 0.3)
    cover = reg.build_cube_cover(poly)
    edge = reg.sample_boundary(poly, 500, seed=1)
    assert np.abs(cover.inf_phi(edge)).max() < 1e-7


def test_cover_rejects_large_or_nonconvex():
    with pytest.raises(ParameterError):
        reg.build_cube_cover(Polytope.box([-2, -2], [2, 2]))
    with pytest.raises(ParameterError):
        reg.build_cube_cover(object())


# --- barrier --------------------------------------------------------------------

def test_barrier_rejects_beta():
    cover = reg.build_cube_cover(Polytope.regular_polygon(4, 1.0))
    for beta in (0.0, 1.5, -0.2):
        with pytest.raises(ParameterError):
            reg.barrier(cover, 1.0, beta)
    with pytest.raises(ParameterError):
        reg.barrier(cover, 0.0, 0.5)


def test_barrier_single_cube_beta_one():
    poly = Polytope.box([-HALF_PI] * 2, [HALF_PI] * 2)
    cover = reg.build_cube_cover(poly)
    bar = reg.barrier(cover, 1.5, 1.0)
    x = reg.sample_polytope(poly, 1000, seed=0)
    rep = bar.supersolution_check(x)
    assert rep.holds
    # with beta = 1 the barrier is N alpha phi and P+_1 + alpha phi = 0
    np.testing.assert_allclose(rep.lhs, rep.target, atol=1e-10)
    pair = cf.cube_eigenpair(2, HALF_PI)
    np.testing.assert_allclose(bar(x), 2 * 1.5 * pair.u(x), rtol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 5.0), st.floats(0.02, 1.0), st.integers(3, 8))
def test_barrier_supersolution_random(alpha, beta, sides):
    poly = Polytope.regular_polygon(sides, 1.0)
    cover = reg.build_cube_cover(poly)
    bar = reg.barrier(cover, alpha, beta)
    rep = bar.supersolution_check(reg.sample_polytope(poly, 300, seed=sides))
    assert rep.holds
    assert rep.max_violation <= 1e-9 * (1 + np.abs(rep.target).max())


def test_barrier_vanishes_on_boundary_and_holder_bound():
    poly = Polytope.regular_polygon(6, 1.0)
    cover = reg.build_cube_cover(poly)
    rng = np.random.default_rng(0)
    for alpha, beta in [(1.0, 1.0), (2.0, 0.3), (0.5, 0.05)]:
        bar = reg.barrier(cover, alpha, beta)
        edge = reg.sample_boundary(poly, 2000, seed=1)
        # phi vanishes to rounding on the boundary; the power beta magnifies that rounding
        assert np.abs(cover.inf_phi(edge)).max() <= 1e-7
        assert np.abs(bar(edge)).max() <= bar.coef * 1e-7**beta
        x = reg.sample_polytope(poly, 10_000, seed=2)
        q1 = bar.holder_quotients(x, x[rng.permutation(len(x))])
        q2 = bar.holder_quotients(x[:2000], edge)
        # pairs squeezed against the boundary, where the quotient is largest
        centre = poly.vertices.mean(axis=0)
        near = centre + (1 - np.logspace(-10, -2, 2000))[:, None] * (edge - centre)
        q3 = bar.holder_quotients(near, edge)
        assert max(q1.max(), q2.max(), q3.max()) <= bar.holder_constant


def test_phi_holder_modulus():
    # |phi(x) - phi(z)| <= (sqrt(N) |x - z|)^(1/N) on a cube
    cover = reg.build_cube_cover(Polytope.box([-HALF_PI] * 2, [HALF_PI] * 2))
    rng = np.random.default_rng(3)
    x = rng.uniform(-HALF_PI, HALF_PI, (5000, 2))
    z = np.clip(x + rng.normal(scale=10 ** rng.uniform(-8, 0, (5000, 1)), size=(5000, 2)), -HALF_PI, HALF_PI)
    d = np.linalg.norm(x - z, axis=1)
    lhs = np.abs(cover.inf_phi(x) - cover.inf_phi(z))
    assert np.all(lhs <= (math.sqrt(2) * d) ** 0.5 + 1e-12)


# --- condition check --------------------------------------------------------------

def test_holder_condition_check_examples():
    poly = Polytope.regular_polygon(6, 1.0)
    cover = reg.build_cube_cover(poly)
    alpha, beta = 1.0, 0.5
    assert reg.holder_condition_check(lambda x: np.zeros(len(x)), cover, alpha, beta)
    assert reg.holder_condition_check(lambda x: -alpha * cover.inf_phi(x) ** beta, cover, alpha, beta)
    assert not reg.holder_condition_check(lambda x: -np.ones(len(x)), cover, alpha, beta)


def test_comparison_with_numerical_solution():
    poly = Polytope.regular_polygon(6, 1.2)
    cover = reg.build_cube_cover(poly)
    alpha, beta = 1.0, 0.5
    bar = reg.barrier(cover, alpha, beta)
    f = lambda x: -alpha * cover.inf_phi(x) ** beta  # noqa: E731
    assert reg.holder_condition_check(f, cover, alpha, beta)
    for h in (0.08, 0.04):
        g = GridDomain(poly, h)
        u = solve_dirichlet(Stencil(g, DirectionSet(4)), f).values
        assert np.all(u >= 0)
        assert np.all(u <= g.sample(bar) + 5 * h)


# --- exponent fit -----------------------------------------------------------------

@pytest.mark.parametrize("n", [2, 3])
def test_exponent_fit_cube(n):
    pair = cf.cube_eigenpair(n, HALF_PI)
    face = np.zeros(n)
    face[0] = HALF_PI
    normal = -np.eye(n)[0]
    slope = reg.holder_exponent_fit(pair.u, face, normal, window=1e-2)
    assert slope == pytest.approx(1 / n, rel=0.05)


def test_exponent_fit_affine_ramp():
    slope = reg.holder_exponent_fit(lambda x: 1.0 - x[:, 0], np.array([1.0, 0.0]), np.array([-1.0, 0.0]), 0.5)
    assert slope == pytest.approx(1.0, abs=1e-6)


def test_exponent_fit_grid_field():
    pair = cf.cube_eigenpair(2, HALF_PI)
    g = GridDomain(Polytope.box([-HALF_PI] * 2, [HALF_PI] * 2), math.pi / 256)
    field = ScalarField(g, g.sample(pair.u))
    slope = reg.holder_exponent_fit(field, np.array([HALF_PI, 0.0]), np.array([-1.0, 0.0]), window=0.1)
    assert slope == pytest.approx(0.5, rel=0.05)
    with pytest.raises(ParameterError):
        reg.holder_exponent_fit(field, np.array([HALF_PI, 0.0]), np.array([-1.0, 0.0]), window=3 * g.h)


def test_exponent_fit_needs_samples():
    with pytest.raises(ParameterError):
        reg.holder_exponent_fit(lambda x: x[:, 0], np.zeros(2), np.array([1.0, 0.0]), 0.1, samples=4)


# --- remark -----------------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3])
def test_remark_concave_and_growing(n):
    rep = reg.remark_counterexample(n)
    assert rep.u_center == pytest.approx(1 / (2 * n))
    assert rep.max_quadratic_form <= 1e-8 and rep.concave
    assert rep.max_eigenvalue <= 1e-8
    for g in (0.5, 0.25, 0.1):
        assert rep.growth_monotone(g)


def test_remark_quotient_near_face_value():
    fn = reg.RemarkFunction(1)
    d = 1e-6 * math.pi
    q = fn.near_face(d) / d**0.1
    assert q == pytest.approx(0.25, abs=0.01)
    # u(x) ~ 1/|log d| as the face is approached
    assert fn.near_face(1e-300) * abs(math.log(1e-300)) == pytest.approx(1.0, rel=0.01)


def test_remark_hessian_matches_finite_differences():
    fn = reg.RemarkFunction(2)
    rng = np.random.default_rng(0)
    x = rng.uniform(-1.2, 1.2, (50, 2))
    step = 1e-4
    e = np.eye(2) * step
    for xi, hi in zip(x, fn.hessian(x)):
        fd = np.array([[
            (fn.value(xi + e[i] + e[j]) - fn.value(xi + e[i] - e[j]) - fn.value(xi - e[i] + e[j])
             + fn.value(xi - e[i] - e[j]))[0] / (4 * step * step)
            for j in range(2)] for i in range(2)])
        np.testing.assert_allclose(fd, hi, atol=1e-6)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_remark_concavity_threshold_is_sharp(n):
    thr = reg.concavity_threshold(n)
    # the worst point is cos x_i = 1/2 in every coordinate
    x = np.full((1, n), math.acos(0.5))
    above = reg.RemarkFunction(n, thr * 1.001).hessian(x)[0]
    below = reg.RemarkFunction(n, thr * 0.999).hessian(x)[0]
    assert np.linalg.eigvalsh(above).max() < 0 < np.linalg.eigvalsh(below).max()


@pytest.mark.parametrize("n", [1, 2, 3])
def test_remark_small_sigma_loses_concavity(n):
    rep = reg.remark_counterexample(n, sigma=n / 2)
    assert rep.max_quadratic_form > 0 and not rep.concave
