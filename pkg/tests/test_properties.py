"""Property-based checks of structural invariants."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from levelset_topopt import levelset as ls
from levelset_topopt import optimizer as opt
from levelset_topopt import shape_gradient as sg
from levelset_topopt.cases import grid_coordinates
from levelset_topopt.grid import build_grid_map, build_mesh, exterior_facets

from conftest import brute_force_tags

sizes = st.integers(1, 12)
finite = st.floats(-10, 10, allow_nan=False)


@given(sizes, sizes, st.floats(0.5, 4.0))
def test_vertex_and_triangle_counts(Nx, Ny, h):
    mesh = build_mesh(h * Nx, h * Ny, Nx, Ny)
    assert mesh.n_vertices == (Nx + 1) * (Ny + 1) + Nx * Ny
    assert mesh.n_triangles == 4 * Nx * Ny
    np.testing.assert_allclose(mesh.areas.sum(), h * h * Nx * Ny, rtol=1e-12)
    assert np.all(mesh.areas > 0)


@settings(max_examples=40)
@given(st.integers(1, 6), st.integers(1, 6), st.data())
def test_classify_matches_oracle_and_is_monotone(Nx, Ny, data):
    mesh = build_mesh(float(Nx), float(Ny), Nx, Ny)
    phi = data.draw(arrays(float, mesh.n_vertices, elements=finite))
    shift = data.draw(st.floats(0, 5))
    tags = ls.classify_cells(phi, mesh)
    np.testing.assert_array_equal(tags, brute_force_tags(mesh, phi))
    # lowering the level set only adds material
    assert np.all(ls.classify_cells(phi - shift, mesh) >= tags)


@given(st.integers(2, 10), st.integers(2, 10), finite, st.floats(0.01, 1.0), st.integers(0, 2**32 - 1))
def test_advect_constant(Nx, Ny, c, beta, seed):
    vx, vy = np.random.default_rng(seed).standard_normal((2, Ny + 1, Nx + 1))
    phi = np.full((Ny + 1, Nx + 1), c)
    np.testing.assert_array_equal(ls.advect(phi, vx, vy, beta, 1.0 * Nx, 1.0 * Ny), phi)


@given(st.integers(2, 10), st.integers(2, 10), st.integers(0, 2**32 - 1))
def test_reinitialize_odd(Nx, Ny, seed):
    phi = np.random.default_rng(seed).standard_normal((Ny + 1, Nx + 1))
    lx, ly = 2.0 * Nx, 2.0 * Ny
    np.testing.assert_array_equal(ls.reinitialize(-phi, lx, ly), -ls.reinitialize(phi, lx, ly))


@given(st.integers(1, 8), st.integers(1, 8), finite, finite, finite)
def test_interpolation_reproduces_affine(Nx, Ny, a, b, c):
    lx, ly = 0.5 * Nx, 0.5 * Ny
    mesh = build_mesh(lx, ly, Nx, Ny)
    X, Y = grid_coordinates(lx, ly, Nx, Ny)
    out = ls.interpolate_to_mesh(a * X + b * Y + c, build_grid_map(mesh))
    x, y = mesh.vertices.T
    np.testing.assert_allclose(out, a * x + b * y + c, atol=1e-12 * (1 + abs(a) + abs(b) + abs(c)) * (1 + lx + ly))


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_descent_direction(Nx, Ny, seed):
    mesh = build_mesh(float(Nx), float(Ny), Nx, Ny)
    op = sg.assemble_descent_operator(mesh, exterior_facets(mesh))
    rhs = np.random.default_rng(seed).standard_normal(2 * mesh.n_vertices)
    theta = sg.solve_descent(op, rhs)
    np.testing.assert_allclose(rhs @ theta, sg.quadratic_form(op, theta), rtol=1e-9)
    assert rhs @ theta > 0


@given(st.floats(0.05, 1.0), st.lists(st.booleans(), min_size=1, max_size=40))
def test_line_search_beta_bounds(beta0, outcomes):
    cfg = opt.OptimizerConfig(beta0_init=beta0)
    s = opt.StepState(beta0=beta0, beta=beta0, It=1)
    for worse in outcomes:
        opt.line_search_update(s, 2.0 if worse else 0.0, 1.0, cfg)
        assert 0.1 * beta0 - 1e-15 <= s.beta0 <= 1.0
        assert 0 < s.beta <= s.beta0
        assert 0 <= s.ls <= cfg.ls_max
