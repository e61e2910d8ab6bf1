import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from u1slag.calculus import PairField, residual_pair
from u1slag.clift import (C3Point, analytic_example, build_fibration, catenoid, check_disjointness,
                          fibration_map_explicit, fibre_patch, fibre_sample, frame_check, hl_patch,
                          lift_functions, lift_mesh, lift_point, lift_radii, plane_patch, sampler_hl,
                          seam_continuity, sl_residual)
from u1slag.domain import BoundaryFunction, build_grid
from u1slag.errors import DegenerateFrame, ExtremumConditionFailed, UnknownName
from u1slag.solver import solve

finite = st.floats(-5, 5, allow_nan=False)


# lift

def test_lift_radii_examples():
    assert lift_radii(0.0, 0.0, 0.0) == (0.0, 0.0)
    r1, r2 = lift_radii(1.0, 0.0, 0.0)
    assert r1 ** 2 == pytest.approx(2.0, abs=1e-15) and r2 == 0.0
    r1, r2 = lift_radii(0.0, 3.0, 4.0)
    assert r1 ** 2 == pytest.approx(5.0) and r2 ** 2 == pytest.approx(5.0)


@settings(max_examples=100, deadline=None)
@given(a=finite, v=finite, y=finite)
def test_lift_radii_relations(a, v, y):
    r1, r2 = lift_radii(a, v, y)
    assert r1 >= 0 and r2 >= 0
    assert abs(r1 ** 2 - r2 ** 2 - 2 * a) <= 1e-12 * (1 + abs(a) + v * v + y * y)
    assert abs((r1 * r2) ** 2 - (v * v + y * y)) <= 1e-12 * (1 + a * a + v * v + y * y)


def test_lift_point_examples():
    p = lift_point(0.0, 0.0, 0.0, 0.0, 0.0, 1.3)
    assert p.as_array().tolist() == [0, 0, 0]
    p = lift_point(1.0, 0.0, 2.0, 5.0, 0.0, 0.0)
    assert abs(p.z1) == pytest.approx(np.sqrt(5)) and abs(p.z2) == pytest.approx(np.sqrt(5))
    assert p.z1 * p.z2 == pytest.approx(5.0) and p.z3 == 1 + 2j
    with pytest.raises(ValueError):
        C3Point(np.nan, 0, 0)


@settings(max_examples=60, deadline=None)
@given(x=finite, y=finite, u=finite, v=finite, a=finite, th=st.floats(0, 7), s=st.floats(-4, 4))
def test_lift_equivariance(x, y, u, v, a, th, s):
    p = lift_point(x, y, u, v, a, th)
    q = lift_point(x, y, u, v, a, th + s)
    assert np.max(np.abs(q.as_array() - p.rotate(s).as_array())) <= 1e-12 * (1 + np.max(np.abs(p.as_array())))
    assert abs(abs(p.z1) ** 2 - abs(p.z2) ** 2 - 2 * a) <= 1e-10 * (1 + abs(a) + v * v + y * y)


def _linear_pair(g, a):
    return PairField.from_functions(g, lambda x, y: 0.3 * x - 0.2, lambda x, y: 0.3 * y + 0.7, a)


def test_lift_mesh_invariants(grid05):
    p = _linear_pair(grid05, 1.0)
    mesh = lift_mesh(p, 8)
    assert np.max(np.abs(mesh.moment() - 2.0)) <= 1e-10
    assert mesh.valid.sum() == grid05.n_int * 8
    with pytest.raises(ValueError):
        lift_mesh(p, 4)


def test_lift_mesh_theta_independent_radii(grid05):
    p = _linear_pair(grid05, 0.5)
    m8, m16 = lift_mesh(p, 8), lift_mesh(p, 16)
    assert np.allclose(np.abs(m8.points[:, :, 0, :2]), np.abs(m16.points[:, :, 0, :2]), equal_nan=True)
    assert np.allclose(m8.points[:, :, 1], m16.points[:, :, 2], equal_nan=True, atol=1e-14)


# SL residuals

def test_flat_plane_is_special():
    e = np.eye(3)
    assert sl_residual(plane_patch(e[0], e[1], e[2])).max_residual <= 1e-10


def test_control_plane_discriminates():
    e = np.eye(3)
    ev = sl_residual(plane_patch(e[0], e[1], 1j * e[2]))
    # oracle: om(e1, e2) = Im(1*0) = 0 and Omega(e1, e2, i e3) = i
    assert ev.max_omega <= 1e-10
    assert ev.max_im == pytest.approx(1.0, abs=1e-12)


def test_frame_check_degenerate():
    e = np.eye(3, dtype=complex)
    with pytest.raises(DegenerateFrame):
        frame_check(e[0], e[1], e[1])


def test_sl_linear_solver_lift(disc):
    out = []
    for h in (0.05, 0.025):
        g = build_grid(disc, h)
        sol = solve(g, BoundaryFunction.trace(disc, lambda x, y: 0.7 * x - 0.2 * y + 0.3 * x * y), 1.0)
        ev = sl_residual(lift_mesh(sol, 16))
        assert ev.max_residual <= 5 * h
        assert np.all(ev.omega >= 0) and np.all(ev.im_omega >= 0)
        out.append(ev.max_residual)
    assert out[1] < out[0]


def test_sl_solver_refinement_order(disc):
    # generic data: v + iy vanishes inside the disc, where r2 = 0 at a = 1
    phi = BoundaryFunction.trig(disc, cos=(0, 0, 0.5), sin=(0, 0.3))
    evs, inner = [], []
    for h in (0.05, 0.025):
        mesh = lift_mesh(solve(build_grid(disc, h), phi, 1.0), 16)
        X, Y, _ = np.meshgrid(*mesh.axes, indexing="ij")
        evs.append(sl_residual(mesh))
        inner.append(sl_residual(mesh, keep=np.hypot(X, Y) < 0.8).max_residual)
        assert evs[-1].max_residual <= 5 * h and evs[-1].n_degenerate == 0
    assert evs[1].max_residual < evs[0].max_residual
    assert np.log2(evs[0].mean_im / evs[1].mean_im) >= 1.0
    assert np.log2(evs[0].mean_omega / evs[1].mean_omega) >= 1.0
    assert np.log2(inner[0] / inner[1]) >= 1.0


def test_mesh_gauge_is_smooth(disc, grid05):
    # orbit samples are exact lifts, shifted in angle so z1 does not jump where r2 = 0
    sol = solve(grid05, BoundaryFunction.trig(disc, cos=(0, 0, 0.5), sin=(0, 0.3)), 1.0)
    mesh = lift_mesh(sol, 16)
    jump = np.nanmax(np.abs(np.diff(mesh.points[..., 0], axis=0)))
    assert jump < 5 * grid05.h
    g = grid05
    n = g.n_int
    ij = g.ij - g.ij.min(axis=0)
    prod = mesh.points[ij[:, 0], ij[:, 1], :, 0] * mesh.points[ij[:, 0], ij[:, 1], :, 1]
    assert np.max(np.abs(prod - (sol.v.values[:n] + 1j * g.xy[:n, 1])[:, None])) <= 1e-10


def test_sl_catenoid_off_axis(disc):
    out = []
    for h in (0.05, 0.025):
        xs = np.arange(-0.7, 0.7 + h / 2, h)
        ys = np.arange(0.1, 0.7 + h / 2, h)
        patch = lift_functions(lambda x, y: catenoid(x, y)[0], lambda x, y: catenoid(x, y)[1], 0.0, xs, ys,
                               keep=lambda x, y: x * x + y * y < 0.95)
        ev = sl_residual(patch)
        assert ev.max_residual <= 5 * h
        out.append(ev.max_residual)
    assert out[1] < out[0]


def test_hl_patch_refines():
    out = []
    for dr in (0.05, 0.025):
        ev = sl_residual(hl_patch(0.5, np.arange(0.1, 1.0 + dr / 2, dr), 16))
        assert ev.max_residual <= 5 * dr
        assert ev.max_im <= 1e-10
        out.append(ev.max_residual)
    assert out[1] < out[0]


# analytic examples

def test_analytic_examples():
    assert analytic_example("catenoid", 0.0, 1.0) == pytest.approx((0.0, 0.0), abs=1e-15)
    assert analytic_example("twosheet", 0.0, 0.0) == pytest.approx((-0.5, 0.0))
    assert analytic_example("linear", 2.0, 0.5, alpha=0.3, beta=-0.2, gamma=0.7) == pytest.approx(
        (0.3 * 2 - 0.2, 0.3 * 0.5 + 0.7))
    with pytest.raises(UnknownName):
        analytic_example("helicoid", 0.0, 0.0)


def test_sampler_hl_relations():
    p = sampler_hl(0.0, 1.0, 0.0, 0.0)
    assert p.as_array() == pytest.approx([1, 1, 1])
    rng = np.random.default_rng(0)
    for a, r, t2, t3 in rng.uniform([0, 0, 0, 0], [2, 2, 6.3, 6.3], size=(50, 4)):
        z1, z2, z3 = sampler_hl(a, r, t2, t3).as_array()
        assert abs(abs(z1) ** 2 - 2 * a - abs(z2) ** 2) < 1e-12
        assert abs(abs(z2) ** 2 - abs(z3) ** 2) < 1e-12
        w = z1 * z2 * z3
        assert abs(w.imag) < 1e-12 and w.real >= -1e-12


def test_harvey_lawson_pair_residual(disc):
    sups = []
    for h in (0.05, 0.025):
        g = build_grid(disc, h)
        p = PairField.from_functions(g, lambda x, y: analytic_example("harvey-lawson", x, y, a=0.5)[0],
                                     lambda x, y: analytic_example("harvey-lawson", x, y, a=0.5)[1], 0.5)
        sups.append(max(r.sup() for r in residual_pair(p)))
    assert sups[1] <= 10 * 0.025 ** 2
    assert 1.7 <= np.log2(sups[0] / sups[1]) <= 2.3


# explicit fibration

def test_fibration_map_cases():
    assert fibration_map_explicit(0, 0, 0.3 + 0.1j) == (0.0, 0.3 + 0.1j)
    a, b = fibration_map_explicit(1 + 1j, 0, 2.0)
    assert a == pytest.approx(1.0) and b == 2.0
    # on the seam |z1| = |z2| both formulas share the divisor
    z1, z2, z3 = 0.6 * np.exp(0.4j), 0.6 * np.exp(-1.1j), 0.2j
    a, b = fibration_map_explicit(z1, z2, z3)
    assert a == 0.0
    assert b == pytest.approx(z3 + np.conj(z1) * np.conj(z2) / abs(z2))


@pytest.mark.parametrize("a", [-1.0, -0.1, 0.0, 0.1, 1.0])
def test_fibre_round_trip(a):
    b = 0.4 - 0.7j
    pts = fibre_sample(a, b, 200, rng=np.random.default_rng(1))
    assert len(pts) == 200
    err = max(max(abs(fa - a), abs(fb - b)) for fa, fb in map(fibration_map_explicit, pts))
    assert err <= 1e-10


def test_fibre_cone_point():
    pts = fibre_sample(0.0, 0.0, 16)
    assert any(p.as_array().tolist() == [0, 0, 0] for p in pts)
    assert all(fibration_map_explicit(p) == pytest.approx((0.0, 0.0)) for p in pts)
    with pytest.raises(ValueError):
        fibre_sample(0.0, 0.0, 4)


def test_fibre_patch_sl():
    out = []
    for dr in (0.1, 0.05):
        patch = fibre_patch(1.0, 0.2j, np.arange(0.2, 1.2 + dr / 2, dr), 16)
        assert np.max(np.abs(patch.moment() - 2.0)) <= 1e-10
        out.append(sl_residual(patch).max_residual)
    assert out[1] < out[0]


def test_seam_continuity():
    rep = seam_continuity()
    assert rep.passed and rep.order >= 1.0
    assert np.all(np.diff(rep.discrepancy) < 0)


# families

def test_family_single_member(disc, grid05):
    fam = build_fibration(grid05, BoundaryFunction.trig(disc), [1.0], [0.0], [0.0])
    assert len(fam) == 1 and fam.solutions[0].f.sup() == 0.0


def test_family_phi_map(disc, grid05):
    phi = BoundaryFunction.trig(disc, cos=(0, 0, 1.0))
    fam = build_fibration(grid05, phi, [1.0], [0.0, 0.5], [0.0])
    t = np.linspace(0, 6, 7)
    x, y = disc.point(t)
    assert np.allclose(fam.Phi((1.0, 0.5, -0.3))(t), phi(t) + 0.5 * x - 0.3 * y)


def test_family_extremum_condition(disc, grid05):
    with pytest.raises(ExtremumConditionFailed):
        build_fibration(grid05, BoundaryFunction.trig(disc), members=[(1.0, 0.5, 0.0), (1.0, 0.5, 0.0)])
    with pytest.raises(ValueError):
        build_fibration(grid05, BoundaryFunction.trig(disc), [], [0.0], [0.0])


@settings(max_examples=20, deadline=None)
@given(b=st.floats(-2, 2), c=st.floats(-2, 2))
def test_linear_differences_have_one_extremum(disc, b, c):
    from u1slag.analysis import count_boundary_extrema
    if np.hypot(b, c) < 1e-3:
        return
    assert count_boundary_extrema(BoundaryFunction.trace(disc, lambda x, y: b * x + c * y)) == 1


def test_disjointness_examples(disc, grid05):
    fam = build_fibration(grid05, BoundaryFunction.trig(disc), members=[(1.0, 0, 0), (2.0, 0, 0), (1.0, 1.0, 0)])
    rep = check_disjointness(fam)
    assert rep.passed
    by = {(p["i"], p["j"]): p for p in rep.pairs}
    assert by[(0, 1)]["kind"] == "moment" and by[(0, 1)]["expected"] == 2.0
    assert by[(0, 1)]["separation"] == pytest.approx(2.0, abs=1e-9)
    assert by[(0, 2)]["kind"] == "pair" and by[(0, 2)]["min_difference"] > rep.floor
