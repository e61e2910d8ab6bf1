"""End-to-end fixture checks run by ``u1slag validate``.

Each check returns ``(passed, detail)``.  ``inject`` names a deliberate
mutation so that the suite can be shown to catch it.
"""

import numpy as np

from .calculus import PairField, residual_pair
from .clift import (analytic_example, fibration_map_explicit, fibre_sample, hl_patch, lift_mesh,
                    lift_point, plane_patch, seam_continuity, sl_residual)
from .domain import build_grid, unit_disc

INJECTIONS = ("catenoid-v-sign", "lift-phase", "fibration-sign")


def _pair(grid, name, level=0.0, flip_v=False, **params):
    sgn = -1.0 if flip_v else 1.0
    return PairField.from_functions(grid, lambda x, y: analytic_example(name, x, y, **params)[0],
                                    lambda x, y: sgn * analytic_example(name, x, y, **params)[1], level)


def _sup(fields, keep=None):
    out = 0.0
    for f in fields:
        vals = f.values if keep is None else f.values[keep]
        out = max(out, float(np.max(np.abs(vals))))
    return out


def check_residual_pair(h, inject=None):
    """Linear pairs at a in {-1, 0, 1} and the catenoid at a = 0: sup residual <= 10 h^2."""
    g = build_grid(unit_disc(), h)
    worst = {}
    for a in (-1.0, 0.0, 1.0):
        p = _pair(g, "linear", a, alpha=0.3, beta=-0.2, gamma=0.7)
        worst[f"linear a={a:g}"] = _sup(residual_pair(p))
    p = _pair(g, "catenoid", 0.0, flip_v=inject == "catenoid-v-sign")
    worst["catenoid"] = _sup(residual_pair(p))
    name, val = max(worst.items(), key=lambda kv: kv[1])
    return val <= 10 * h * h, f"worst {name}: {val:.3g} (bound {10 * h * h:.3g})"


def check_residual_twosheet(h, inject=None):
    """Two-sheet pair away from its singular line: sup over |y| > 4h <= 10 h^2."""
    g = build_grid(unit_disc(), h)
    keep = np.abs(g.points[:, 1]) > 4 * h
    val = _sup(residual_pair(_pair(g, "twosheet")), keep)
    return val <= 10 * h * h, f"{val:.3g} (bound {10 * h * h:.3g})"


def check_residual_harvey_lawson(h, inject=None):
    """Closed-form pair of the level-1/2 torus-invariant member: sup residual <= 10 h^2."""
    g = build_grid(unit_disc(), h)
    val = _sup(residual_pair(_pair(g, "harvey-lawson", 0.5, a=0.5)))
    return val <= 10 * h * h, f"{val:.3g} (bound {10 * h * h:.3g})"


def check_lift_invariants(h, inject=None):
    """Moment map 2a and z1 z2 = v + iy on every lifted sample; U(1) equivariance."""
    g = build_grid(unit_disc(), h)
    p = _pair(g, "linear", 1.0, alpha=0.3, beta=-0.2, gamma=0.7)
    mesh = lift_mesh(p, 8)
    mom = float(np.max(np.abs(mesh.moment() - 2.0)))
    n = g.n_int
    target = (p.v.values[:n] + 1j * g.xy[:n, 1])
    prod = mesh.points[..., 0] * mesh.points[..., 1]
    ij = g.ij - g.ij.min(axis=0)
    prod_err = float(np.max(np.abs(prod[ij[:, 0], ij[:, 1], :] - target[:, None])))
    q0 = lift_point(0.3, 0.2, -0.1, 0.6, 0.4, 0.7)
    s = 1.1
    q1 = lift_point(0.3, 0.2, -0.1, 0.6, 0.4, 0.7 + s + (0.5 if inject == "lift-phase" else 0.0))
    eqv = float(np.max(np.abs(q1.as_array() - q0.rotate(s).as_array())))
    ok = mom <= 1e-10 and prod_err <= 1e-10 and eqv <= 1e-12
    return ok, f"moment {mom:.2g}, product {prod_err:.2g}, equivariance {eqv:.2g}"


def check_sl_linear(h, inject=None):
    g = build_grid(unit_disc(), h)
    ev = sl_residual(lift_mesh(_pair(g, "linear", 1.0, alpha=0.3, beta=-0.2, gamma=0.7), 16))
    return ev.max_residual <= 5 * h, f"max {ev.max_residual:.3g} (bound {5 * h:.3g})"


def check_sl_catenoid(h, inject=None):
    g = build_grid(unit_disc(), h)
    ev = sl_residual(lift_mesh(_pair(g, "catenoid"), 16))
    return ev.max_residual <= 5 * h, f"max {ev.max_residual:.3g} (bound {5 * h:.3g})"


def check_sl_harvey_lawson(h, inject=None):
    r = np.arange(0.1, 1.0 + h / 2, h)
    ev = sl_residual(hl_patch(0.5, r, 16))
    return ev.max_residual <= 5 * h, f"max {ev.max_residual:.3g} (bound {5 * h:.3g})"


def check_sl_control(h, inject=None):
    """Flat SL plane passes; the Lagrangian non-special plane must be rejected."""
    e = np.eye(3)
    flat = sl_residual(plane_patch(e[0], e[1], e[2])).max_residual
    ctrl = sl_residual(plane_patch(e[0], e[1], 1j * e[2]))
    ok = flat <= 1e-10 and ctrl.max_omega <= 1e-10 and ctrl.max_im >= 0.5
    return ok, f"flat {flat:.2g}, control omega {ctrl.max_omega:.2g}, Im Omega {ctrl.max_im:.3g}"


def check_fibration_algebra(h, inject=None):
    """Round trip over fibres, the cone point and the three-case map."""
    worst = 0.0
    for a in (-1.0, -0.1, 0.0, 0.1, 1.0):
        b = 0.3 - 0.2j
        for pt in fibre_sample(a, b, 200):
            fa, fb = fibration_map_explicit(pt)
            if inject == "fibration-sign":
                fa = -fa
            worst = max(worst, abs(fa - a), abs(fb - b))
    cone = fibre_sample(0.0, 0.5j, 16)[0]
    cone_ok = cone.as_array().tolist() == [0, 0, 0.5j]
    return worst <= 1e-10 and cone_ok, f"round trip {worst:.2g}, cone point {'ok' if cone_ok else 'missing'}"


def check_seam(h, inject=None):
    rep = seam_continuity()
    return rep.passed, f"order {rep.order:.3f}, last gap discrepancy {rep.discrepancy[-1]:.2g}"


CHECKS = (
    ("residual_pair", check_residual_pair),
    ("residual_twosheet", check_residual_twosheet),
    ("residual_harvey_lawson", check_residual_harvey_lawson),
    ("lift_invariants", check_lift_invariants),
    ("sl_linear", check_sl_linear),
    ("sl_catenoid", check_sl_catenoid),
    ("sl_harvey_lawson", check_sl_harvey_lawson),
    ("sl_control_plane", check_sl_control),
    ("fibration_algebra", check_fibration_algebra),
    ("seam_continuity", check_seam),
)


def run_checks(h=0.05, inject=None, only=None):
    """Run all checks; returns a list of ``(name, passed, detail)``."""
    if inject is not None and inject not in INJECTIONS:
        raise ValueError(f"unknown injection {inject!r}")
    out = []
    for name, fn in CHECKS:
        if only and name not in only:
            continue
        ok, detail = fn(h, inject)
        out.append((name, bool(ok), detail))
    return out
