import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from ssprkse.barotropic import BarotropicState, barotropic_ssprk2_substep, barotropic_ssprk3_substep
from ssprkse.grid import Boundary, Grid, VectorField, divergence, perp
from ssprkse.harness.metrics import relative_l2
from ssprkse.harness.tables import format_value, parse_value
from ssprkse.modesplit import split_velocity, tridiag_solve
from ssprkse.tendencies import LayerStack, PhysicalParams, hydrostatic_pressure, thickness_tendency_Th

seeds = st.integers(0, 2 ** 32 - 1)
bcs = st.sampled_from(list(Boundary))
dims = st.integers(4, 9)


def _grid(nx, ny, bc):
    return Grid(nx, ny, 1e3, 1.5e3, bc)


def _vec(rng, grid, lead=()):
    F = VectorField(rng.normal(size=lead + grid.u_shape), rng.normal(size=lead + grid.v_shape))
    if grid.channel:
        F.v[..., [0, -1], :] = 0
    return F


@given(seeds, dims, dims, bcs)
def test_divergence_telescopes(seed, nx, ny, bc):
    grid = _grid(nx, ny, bc)
    d = divergence(_vec(np.random.default_rng(seed), grid), grid)
    assert abs(d.sum()) <= 1e-12 * (np.abs(d).sum() + 1)


@given(seeds, dims, dims, bcs, st.integers(1, 4))
def test_thickness_tendency_conserves_each_layer(seed, nx, ny, bc, L):
    rng = np.random.default_rng(seed)
    grid = _grid(nx, ny, bc)
    h = rng.uniform(1, 100, (L,) + grid.cell_shape)
    t = thickness_tendency_Th(h, _vec(rng, grid, (L,)), grid)
    assert np.all(np.abs(t.sum(axis=(1, 2))) <= 1e-12 * (np.abs(t).sum(axis=(1, 2)) + 1))


@given(seeds, dims, dims, bcs)
def test_perp_is_skew(seed, nx, ny, bc):
    rng = np.random.default_rng(seed)
    grid = _grid(nx, ny, bc)
    a, b = _vec(rng, grid), _vec(rng, grid)
    pa, pb = perp(a, grid), perp(b, grid)
    lhs = (b.u * pa.u).sum() + (b.v * pa.v).sum()
    rhs = (a.u * pb.u).sum() + (a.v * pb.v).sum()
    assert abs(lhs + rhs) <= 1e-12 * (abs(lhs) + 1)


@given(seeds, bcs, st.integers(1, 5))
def test_split_is_weighted_free_and_reconstructs(seed, bc, L):
    rng = np.random.default_rng(seed)
    grid = _grid(5, 6, bc)
    h = rng.uniform(0.5, 500, (L,) + grid.cell_shape)
    u = _vec(rng, grid, (L,))
    sp = split_velocity(LayerStack(h, u), grid)
    hu = 0.5 * (h + np.roll(h, 1, axis=-1))
    # scaled by the full transport: utilde alone is pure round-off when L = 1
    assert np.abs((hu * sp.utilde.u).sum(axis=0)).max() <= 1e-12 * (hu * np.abs(u.u)).sum(axis=0).max()
    np.testing.assert_allclose((sp.utilde + sp.ubar[None]).u, u.u, atol=1e-12)


@given(seeds, st.integers(1, 32))
@settings(max_examples=60)
def test_tridiag_matches_dense(seed, L):
    rng = np.random.default_rng(seed)
    lo, up = rng.uniform(-1, 1, L), rng.uniform(-1, 1, L)
    lo[0] = up[-1] = 0
    d = (np.abs(lo) + np.abs(up) + rng.uniform(0.1, 3, L)) * rng.choice([-1, 1], L)
    r = rng.normal(size=L)
    A = np.diag(d) + np.diag(lo[1:], -1) + np.diag(up[:-1], 1)
    ref = np.linalg.solve(A, r)
    assert np.linalg.norm(tridiag_solve(lo, d, up, r) - ref) <= 1e-12 * np.linalg.norm(ref)


@given(st.floats(-1e5, 1e5), st.floats(-1e5, 1e5), seeds)
def test_pressure_linear_in_surface_pressure(a, b, seed):
    h = np.random.default_rng(seed).uniform(1, 100, (3, 4, 4))
    rho = (1000.0, 1001.0, 1004.0)

    def p(ps):
        return hydrostatic_pressure(h, PhysicalParams(rho=rho, p_s=np.full((4, 4), ps)))
    base = hydrostatic_pressure(h, PhysicalParams(rho=rho))
    np.testing.assert_allclose(p(a) + p(b) - base, p(a + b), rtol=1e-12, atol=1e-6)


@given(seeds, st.integers(1, 16), st.sampled_from([2, 3]), st.floats(1.0, 500.0))
@settings(max_examples=40)
def test_substep_frozen_forcing_and_flux(seed, M, order, dt):
    rng = np.random.default_rng(seed)
    grid = _grid(5, 4, Boundary.PERIODIC)
    u0 = _vec(rng, grid) * 0.1
    G = rng.normal(size=2) * 1e-4
    Gf = VectorField(np.full(grid.u_shape, G[0]), np.full(grid.v_shape, G[1]))
    zeta = 0.01 * rng.normal(size=grid.cell_shape)
    state = BarotropicState(u0, zeta, np.full(grid.cell_shape, 20.0))
    kern = barotropic_ssprk2_substep if order == 2 else barotropic_ssprk3_substep
    res = kern(state, Gf, PhysicalParams(f=0.0, g=1e-300), grid, dt, M)
    np.testing.assert_allclose(res.ubar_final.u, u0.u + dt * G[0], atol=1e-13)
    resid = res.zeta_final - zeta + dt * divergence(res.accumulated_flux, grid)
    assert np.abs(resid).max() <= 1e-12 * (np.abs(zeta).max() + 1e-3)


@given(seeds, st.floats(-10, 10).filter(lambda c: abs(c) > 1e-6))
def test_relative_l2_scaling(seed, c):
    ref = np.random.default_rng(seed).normal(size=17)
    assert math.isclose(relative_l2(c * ref, ref), abs(c - 1), rel_tol=1e-12, abs_tol=1e-15)


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_csv_float_round_trip(x):
    assert parse_value(format_value(float(x))) == x
