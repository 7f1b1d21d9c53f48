import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trunclap import closed_form as cf
from trunclap.errors import DomainError, IterationLimitError, ParameterError
from trunclap.pde_solver import (
    Ball,
    DirectionSet,
    EigenConfig,
    GridDomain,
    Polytope,
    ScalarField,
    SolverConfig,
    Stencil,
    apply_pplus1,
    ball_grid,
    bnv_certify_lower_bound,
    eigen_inverse_power,
    read_binary,
    second_difference,
    solve_dirichlet,
    square_grid,
    write_binary,
    write_csv,
)

PI = math.pi


def full_stencil_nodes(stencil):
    """Interior positions where no direction is cut by the boundary."""
    m = stencil.size
    return np.flatnonzero(np.all((stencil.plus < m) & (stencil.minus < m), axis=0))


def random_domain(rng):
    kind = rng.integers(3)
    if kind == 0:
        lo = -rng.uniform(0.5, 1.5, 2)
        return Polytope.box(lo, lo + rng.uniform(1.0, 3.0, 2))
    if kind == 1:
        return Polytope.regular_polygon(int(rng.integers(3, 8)), rng.uniform(0.8, 1.5), rng.uniform(0, 1))
    return Ball(tuple(rng.uniform(-0.2, 0.2, 2)), rng.uniform(0.8, 1.5))


# --- directions ---------------------------------------------------------------

def test_direction_set_structure():
    d = DirectionSet(4)
    vecs = [tuple(v) for v in d.vectors]
    assert (1, 0) in vecs and (0, 1) in vecs
    assert len(set(vecs)) == len(vecs)
    for v in vecs:
        assert tuple(-c for c in v) not in vecs
        assert math.gcd(*map(abs, v)) == 1
        assert max(map(abs, v)) <= 4
    np.testing.assert_array_equal(d.vectors, DirectionSet(4).vectors)


def test_angular_resolution_decreases():
    res = [DirectionSet(r).angular_resolution for r in (1, 2, 3, 4, 6)]
    assert all(b < a for a, b in zip(res, res[1:]))


def test_direction_set_3d_contains_axes():
    vecs = {tuple(v) for v in DirectionSet(2, 3).vectors}
    assert {(1, 0, 0), (0, 1, 0), (0, 0, 1)} <= vecs


def test_bad_parameters():
    with pytest.raises(ParameterError):
        DirectionSet(0)
    with pytest.raises(ParameterError):
        GridDomain(Polytope.box([0, 0], [1, 1]), 0.0)
    with pytest.raises(ParameterError):
        Polytope.polygon([[0, 0], [2, 0], [1, 0.2], [2, 2], [0, 2]])
    with pytest.raises(ParameterError):
        Stencil(square_grid(1.0, 0.1), DirectionSet(2, 3))


# --- geometry -----------------------------------------------------------------

def test_ray_exits():
    box = Polytope.box([-1, -1], [1, 1])
    np.testing.assert_allclose(box.ray_exit(np.array([[0.0, 0.5]]), np.array([0.0, 1.0])), [0.5])
    np.testing.assert_allclose(box.ray_exit(np.array([[0.0, 0.0]]), np.array([1.0, 1.0]) / math.sqrt(2)), [math.sqrt(2)])
    ball = Ball((0.0, 0.0), 2.0)
    np.testing.assert_allclose(ball.ray_exit(np.array([[1.0, 0.0]]), np.array([1.0, 0.0])), [1.0])
    np.testing.assert_allclose(ball.ray_exit(np.array([[1.0, 0.0]]), np.array([-1.0, 0.0])), [3.0])


def test_interior_nodes_have_positive_slack():
    for dom in (Polytope.regular_polygon(6, 1.0), Ball((0.1, 0.0), 1.0), Polytope.box([-1, -1], [1, 2])):
        g = GridDomain(dom, 0.05)
        assert np.all(dom.slack(g.interior_points) > 0)


# --- second differences ---------------------------------------------------------

def test_second_difference_exact_on_quadratics_and_affine():
    g = square_grid(2.0, 0.1)
    st_ = Stencil(g, DirectionSet(3))
    x = g.interior_points
    quad = 0.5 * np.sum(x * x, axis=1)
    aff = 0.3 * x[:, 0] - 1.7 * x[:, 1] + 0.2
    full = full_stencil_nodes(st_)
    for pos in full[:: max(1, len(full) // 40)]:
        node = g.interior[pos]
        for e in DirectionSet(3).vectors:
            assert second_difference(g, quad, node, e) == pytest.approx(1.0, abs=1e-9)
            assert second_difference(g, aff, node, e) == pytest.approx(0.0, abs=1e-9)


def test_second_difference_matches_stencil_rows():
    g = ball_grid(2, 1.0, 0.1)
    dirs = DirectionSet(2)
    st_ = Stencil(g, dirs)
    u = np.random.default_rng(0).uniform(-1, 1, g.size)
    table = st_.directional(u)
    for pos in range(0, g.size, 17):
        for j, e in enumerate(dirs.vectors):
            assert second_difference(g, u, g.interior[pos], e) == pytest.approx(table[j, pos], rel=1e-12, abs=1e-12)


def test_second_difference_rejects_boundary_node():
    g = square_grid(2.0, 0.25)
    boundary = np.flatnonzero(~g.inside)[0]
    with pytest.raises(DomainError):
        second_difference(g, np.zeros(g.size), boundary, (1, 0))


def test_apply_on_quadratics():
    g = square_grid(2.0, 0.1)
    st_ = Stencil(g, DirectionSet(4))
    x = g.interior_points
    full = full_stencil_nodes(st_)
    concave = apply_pplus1(st_, -0.5 * np.sum(x * x, axis=1))
    np.testing.assert_allclose(concave[full], -1.0, atol=1e-9)
    saddle = apply_pplus1(st_, 0.5 * x[:, 0] ** 2 - x[:, 1] ** 2)
    np.testing.assert_allclose(saddle[full], 1.0, atol=1e-9)


def test_apply_on_cube_eigenfunction_converges_in_interior():
    pair = cf.cube_eigenpair(2, PI / 2)
    errs = []
    for h in (PI / 16, PI / 32, PI / 64):
        g = square_grid(PI, h)
        st_ = Stencil(g, DirectionSet(4))
        phi = g.sample(pair.u)
        inner = np.all(np.abs(g.interior_points) < PI / 4, axis=1)
        errs.append(np.abs(st_.apply(phi) + pair.mu * phi)[inner].max())
    assert errs[0] > errs[1] > errs[2]


# --- monotonicity & comparison ----------------------------------------------------

def test_weights_are_monotone():
    g = GridDomain(Polytope.regular_polygon(5, 1.0), 0.07)
    st_ = Stencil(g, DirectionSet(4))
    assert np.all(st_.w_plus > 0) and np.all(st_.w_minus > 0) and np.all(st_.w_center < 0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_monotonicity_random_perturbation(seed):
    rng = np.random.default_rng(seed)
    g = GridDomain(random_domain(rng), float(rng.uniform(0.08, 0.2)))
    st_ = Stencil(g, DirectionSet(int(rng.integers(1, 4))))
    u = rng.uniform(-1, 1, g.size)
    base = st_.apply(u)
    for _ in range(10):
        j = int(rng.integers(g.size))
        bumped = u.copy()
        bumped[j] += rng.uniform(1e-6, 1.0)
        diff = st_.apply(bumped) - base
        diff[j] = 0.0
        assert diff.min() >= -1e-12


def test_discrete_comparison_random_pairs():
    rng = np.random.default_rng(42)
    for _ in range(10):
        g = GridDomain(random_domain(rng), float(rng.uniform(0.08, 0.15)))
        st_ = Stencil(g, DirectionSet(int(rng.integers(1, 4))))
        f2 = rng.uniform(-2, 1, g.size)
        f1 = f2 + rng.uniform(0, 1, g.size)
        u1 = solve_dirichlet(st_, f1).values
        u2 = solve_dirichlet(st_, f2).values
        assert np.all(u1 <= u2 + 1e-10)


def test_zero_and_signed_forcing():
    g = GridDomain(Polytope.regular_polygon(6, 1.0), 0.1)
    st_ = Stencil(g, DirectionSet(3))
    np.testing.assert_array_equal(solve_dirichlet(st_, 0.0).values, 0.0)
    u = solve_dirichlet(st_, lambda x: 1.0 + x[:, 0] ** 2).values
    assert u.max() <= 0


def test_solve_recovers_cube_eigenfunction():
    pair = cf.cube_eigenpair(2, PI / 2)
    g = square_grid(PI, PI / 128)
    st_ = Stencil(g, DirectionSet(4))
    u = solve_dirichlet(st_, lambda x: -pair.mu * pair.u(x)).values
    assert np.abs(u - g.sample(pair.u)).max() <= 0.05


def test_explicit_and_howard_agree():
    g = square_grid(2.0, 0.25)
    st_ = Stencil(g, DirectionSet(2))
    f = lambda x: -1.0 - x[:, 0] ** 2  # noqa: E731
    a = solve_dirichlet(st_, f, SolverConfig(method="howard", tol=1e-12)).values
    b = solve_dirichlet(st_, f, SolverConfig(method="explicit", tol=1e-11, max_iter=100_000)).values
    np.testing.assert_allclose(a, b, atol=1e-9)


def test_iteration_limit_carries_history():
    st_ = Stencil(square_grid(2.0, 0.1), DirectionSet(2))
    with pytest.raises(IterationLimitError) as info:
        solve_dirichlet(st_, -1.0, SolverConfig(method="explicit", max_iter=5))
    assert len(info.value.history) == 5


def test_unbounded_forcing_rejected():
    st_ = Stencil(square_grid(2.0, 0.25), DirectionSet(1))
    with pytest.raises(ParameterError):
        solve_dirichlet(st_, lambda x: np.where(x[:, 0] > 0, np.inf, 0.0))
    with pytest.raises(ParameterError):
        SolverConfig(method="gauss-seidel")


# --- eigenvalues --------------------------------------------------------------

def test_eigen_iteration_homogeneity():
    st_ = Stencil(square_grid(PI, PI / 16), DirectionSet(3))
    cfg = EigenConfig(tol=1e-12, max_iter=60)
    start = np.random.default_rng(0).uniform(0.5, 1.5, st_.size)
    a = eigen_inverse_power(st_, cfg, start)
    b = eigen_inverse_power(st_, cfg, 4.0 * start)
    assert a.mu_history == b.mu_history
    c = eigen_inverse_power(st_, cfg, 3.7 * start)
    np.testing.assert_allclose(c.mu_history, a.mu_history, rtol=1e-12)


def test_eigenfield_positive_and_normalised():
    est = eigen_inverse_power(Stencil(ball_grid(2, 1.0, 0.1), DirectionSet(3)))
    v = est.eigenfield.values
    assert v.min() > 0 and v.max() == pytest.approx(1.0)
    tail = est.residual_history[5:]
    assert tail[-1] <= tail[0]


def test_eigen_3d_cube():
    g = GridDomain(Polytope.box([-PI / 2] * 3, [PI / 2] * 3), PI / 8)
    est = eigen_inverse_power(Stencil(g, DirectionSet(2, 3)))
    assert est.mu_h == pytest.approx(1 / 3, rel=0.05)


def test_eigen_rejects_nonpositive_start():
    st_ = Stencil(square_grid(PI, PI / 8), DirectionSet(1))
    with pytest.raises(ParameterError):
        eigen_inverse_power(st_, start=np.zeros(st_.size))


# --- BNV certificate -------------------------------------------------------------

def test_bnv_certificate():
    pair = cf.cube_eigenpair(2, PI / 2)
    g = square_grid(PI, PI / 64)
    st_ = Stencil(g, DirectionSet(4))
    phi = g.sample(pair.u)
    assert bnv_certify_lower_bound(st_, 0.49, phi)
    assert not bnv_certify_lower_bound(st_, 0.6, phi)
    # constant 1: operator is 0 away from the boundary and negative next to it
    assert bnv_certify_lower_bound(st_, 0.0, np.ones(st_.size))
    with pytest.raises(ParameterError):
        bnv_certify_lower_bound(st_, 0.1, np.zeros(st_.size))


# --- determinism ---------------------------------------------------------------

@pytest.mark.parametrize(
    "method,domain",
    [("howard", Polytope.regular_polygon(7, 1.0)), ("explicit", Polytope.box([-1, -1], [1, 1]))],
)
def test_thread_count_bit_identity(method, domain):
    # The explicit step scales with min(h+ h-), so it gets a face-aligned grid.
    g = GridDomain(domain, 0.08 if method == "howard" else 0.1)
    st_ = Stencil(g, DirectionSet(3))
    f = lambda x: -1.0 + 0.5 * np.sin(3 * x[:, 0])  # noqa: E731
    outs = [
        solve_dirichlet(st_, f, SolverConfig(method=method, threads=t, tol=1e-9, max_iter=50_000)).values
        for t in (1, 2, 8)
    ]
    assert outs[0].tobytes() == outs[1].tobytes() == outs[2].tobytes()


# --- I/O ------------------------------------------------------------------------

def test_binary_round_trip(tmp_path):
    g = ball_grid(2, 1.0, 0.2)
    field = ScalarField(g, np.arange(g.size, dtype=float) + 0.5)
    path = tmp_path / "u.bin"
    write_binary(field, path)
    snap = read_binary(path)
    assert snap.dim == 2 and snap.shape == g.shape and snap.h == g.h
    np.testing.assert_array_equal(snap.lo, g.lo)
    np.testing.assert_array_equal(snap.values, field.full())
    raw = path.read_bytes()
    assert int.from_bytes(raw[:8], "little") == 2
    assert len(raw) == 8 + 16 + 8 + 32 + 8 * int(np.prod(g.shape))


def test_binary_truncated_file_rejected(tmp_path):
    g = square_grid(1.0, 0.25)
    path = tmp_path / "u.bin"
    write_binary(ScalarField(g, np.ones(g.size)), path)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ParameterError):
        read_binary(path)


def test_csv_layout(tmp_path):
    g = square_grid(1.0, 0.25)
    path = tmp_path / "u.csv"
    write_csv(ScalarField(g, np.full(g.size, 0.1)), path)
    lines = path.read_text().splitlines()
    assert lines[0] == "x0,x1,interior,value"
    assert len(lines) == 1 + g.points.shape[0]
    assert "0.10000000000000001" in path.read_text()


def test_field_rejects_nonfinite():
    g = square_grid(1.0, 0.25)
    with pytest.raises(ParameterError):
        ScalarField(g, np.full(g.size, np.nan))
