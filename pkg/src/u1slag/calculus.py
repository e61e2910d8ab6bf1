"""Finite-difference calculus on cut-cell grids.

Interior nodes use three-point Shortley-Weller formulas (centred on regular
nodes, unequal arms at cut cells).  Boundary-intersection slots get their
derivatives from a weighted least-squares cubic fit to nearby slots.  All
operators are sparse matrices acting on the full value vector of a
:class:`GridField`, so every derivative is linear and deterministic.
"""

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import CloughTocher2DInterpolator, NearestNDInterpolator
from scipy.spatial import Delaunay, cKDTree

from .domain import Grid
from .errors import NotIntegrable, TestNotVanishing
from .geometry import clip_to_box, polygon_area

A_FLOOR_DEFAULT = 1e-4


def eps_sing(h, a_floor=A_FLOOR_DEFAULT):
    """Threshold below which ``|v|`` on the x-axis is treated as zero."""
    return max(10.0 * a_floor, 5.0 * h * h)


@dataclass(frozen=True)
class Operators:
    dx: sp.csr_matrix
    dy: sp.csr_matrix
    dxx: sp.csr_matrix
    dyy: sp.csr_matrix


def _three_point(hl, hr):
    """Weights (left, centre, right) of first and second derivatives on arms hl, hr."""
    d1 = np.stack([-hr / (hl * (hl + hr)), (hr - hl) / (hl * hr), hl / (hr * (hl + hr))], -1)
    d2 = np.stack([2 / (hl * (hl + hr)), -2 / (hl * hr), 2 / (hr * (hl + hr))], -1)
    return d1, d2


# cubic monomials x^p y^q, p + q <= 3
_POWERS = [(p, q) for deg in range(4) for p in range(deg + 1) for q in [deg - p]]


def _ls_rows(grid):
    """Least-squares cubic-fit derivative weights at every boundary slot."""
    h = grid.h
    pts = grid.points
    tree = cKDTree(pts)
    i_x, i_y = _POWERS.index((1, 0)), _POWERS.index((0, 1))
    i_xx, i_yy = _POWERS.index((2, 0)), _POWERS.index((0, 2))
    rows = {name: ([], [], []) for name in ("dx", "dy", "dxx", "dyy")}
    for b in range(grid.n_bnd):
        slot = grid.n_int + b
        p0 = pts[slot]
        radius = 3.0 * h
        while True:
            idx = np.array(sorted(tree.query_ball_point(p0, radius)))
            X = (pts[idx, 0] - p0[0]) / h
            Y = (pts[idx, 1] - p0[1]) / h
            V = np.column_stack([X**p * Y**q for p, q in _POWERS])
            w = 1.0 / (1.0 + X**2 + Y**2)
            A = V * w[:, None]
            if len(idx) >= 16 and np.linalg.cond(A) < 1e8:
                break
            radius += 0.5 * h
            if radius > 8 * h:
                raise ValueError(f"cannot fit boundary derivatives at slot {slot}")
        pinv = np.linalg.pinv(A) * w[None, :]
        for name, coef in (("dx", pinv[i_x] / h), ("dy", pinv[i_y] / h),
                           ("dxx", 2 * pinv[i_xx] / h**2), ("dyy", 2 * pinv[i_yy] / h**2)):
            r, c, v = rows[name]
            r.extend([slot] * len(idx))
            c.extend(idx.tolist())
            v.extend(coef.tolist())
    return rows


@lru_cache(maxsize=64)
def operators(grid: Grid) -> Operators:
    """Sparse derivative matrices of shape ``(n, n)`` for ``grid``."""
    n_int, n = grid.n_int, grid.n
    k = np.arange(n_int)
    ls = _ls_rows(grid)
    mats = {}
    for axis, (lo, hi) in (("x", (1, 0)), ("y", (3, 2))):
        hl, hr = grid.arm[:, lo], grid.arm[:, hi]
        w1, w2 = _three_point(hl, hr)
        cols = np.stack([grid.nbr[:, lo], k, grid.nbr[:, hi]], -1)
        for order, w in (("d" + axis, w1), ("d" + axis * 2, w2)):
            r, c, v = ls[order]
            rows = np.concatenate([np.repeat(k, 3), np.asarray(r, dtype=np.int64)])
            colv = np.concatenate([cols.ravel(), np.asarray(c, dtype=np.int64)])
            vals = np.concatenate([w.ravel(), np.asarray(v, dtype=float)])
            mats[order] = sp.csr_matrix((vals, (rows, colv)), shape=(n, n))
    return Operators(mats["dx"], mats["dy"], mats["dxx"], mats["dyy"])


@lru_cache(maxsize=64)
def _triangulation(grid: Grid):
    pts = grid.points
    _, first = np.unique(np.round(pts, 13), axis=0, return_index=True)
    first = np.sort(first)
    return Delaunay(pts[first]), first


@lru_cache(maxsize=64)
def cell_weights(grid: Grid):
    """Quadrature weight of each interior node: area of its h-cell inside the domain."""
    h = grid.h
    dom = grid.domain
    poly = dom.polygon(2048)
    w = np.full(grid.n_int, h * h)
    offs = np.array([[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]]) * h
    corners = grid.xy[:, None, :] + offs[None]
    inside = dom.contains(corners[..., 0], corners[..., 1])
    for k in np.flatnonzero(~np.all(inside, axis=1)):
        x, y = grid.xy[k]
        clipped = clip_to_box(poly, x - h / 2, x + h / 2, y - h / 2, y + h / 2)
        w[k] = polygon_area(clipped) if len(clipped) >= 3 else 0.0
    return w


@lru_cache(maxsize=64)
def quadrature_weights(grid: Grid):
    """Lumped P1 weights over all slots: a third of each incident triangle's area.

    The triangulation of interior nodes and boundary intersections covers the
    inscribed boundary polygon, so unlike :func:`cell_weights` no strip along
    the boundary is lost.
    """
    tri, keep = _triangulation(grid)
    p = tri.points[tri.simplices]
    area = 0.5 * np.abs((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                        - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))
    w_local = np.zeros(len(keep))
    np.add.at(w_local, tri.simplices.ravel(), np.repeat(area / 3.0, 3))
    w = np.zeros(grid.n)
    w[keep] = w_local
    return w


@dataclass(frozen=True, eq=False)
class GridField:
    """One real value per interior node and per boundary intersection."""

    grid: Grid
    values: np.ndarray
    flagged: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} values, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid field values must be finite")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, grid, func):
        x, y = grid.points.T
        return cls(grid, np.asarray(func(x, y), dtype=float) + 0 * x)

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.n))

    @property
    def interior(self):
        return self.values[: self.grid.n_int]

    @property
    def boundary(self):
        return self.values[self.grid.n_int:]

    def sup(self, interior_only=False):
        vals = self.interior if interior_only else self.values
        return float(np.max(np.abs(vals)))

    def reflected(self, sign=1.0):
        """``(x, y) -> sign * value(x, -y)`` as an exact slot permutation."""
        return GridField(self.grid, sign * self.values[self.grid.reflect])

    def _binary(self, other, op):
        if isinstance(other, GridField):
            if other.grid is not self.grid:
                raise ValueError("fields live on different grids")
            other = other.values
        return GridField(self.grid, op(self.values, other))

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __neg__(self):
        return GridField(self.grid, -self.values)

    @cached_property
    def _interp(self):
        tri, keep = _triangulation(self.grid)
        return (CloughTocher2DInterpolator(tri, self.values[keep]),
                NearestNDInterpolator(tri.points, self.values[keep]))

    def interpolate(self, x, y):
        """C1 piecewise-cubic interpolant; nearest-slot fallback just outside the hull."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        ct, nn = self._interp
        out = ct(x, y)
        bad = ~np.isfinite(out)
        if np.any(bad):
            out = np.where(bad, nn(x, y), out)
        return out


@dataclass(frozen=True, eq=False)
class PairField:
    u: GridField
    v: GridField
    a: float
    singular: bool = False

    def __post_init__(self):
        if self.u.grid is not self.v.grid:
            raise ValueError("u and v must share one grid")
        if not np.isfinite(self.a):
            raise ValueError("a must be finite")

    @property
    def grid(self):
        return self.u.grid

    @property
    def h(self):
        return self.grid.h

    def eval(self, x, y):
        return self.u.interpolate(x, y), self.v.interpolate(x, y)

    def at_slots(self):
        return self.u.values, self.v.values

    @property
    def region(self):
        """Analysis region: the boundary-intersection polygon pulled in by a hair."""
        poly, _ = self.grid.boundary_polygon
        return poly * (1.0 - 1e-9)

    def boundary_samples(self):
        poly, order = self.grid.boundary_polygon
        slots = self.grid.n_int + order
        return poly, self.u.values[slots], self.v.values[slots]

    def reflected(self):
        return PairField(self.u.reflected(), self.v.reflected(-1.0), self.a, self.singular)

    @classmethod
    def from_functions(cls, grid, u, v, a, singular=False):
        return cls(GridField.from_function(grid, u), GridField.from_function(grid, v), a, singular)


def _apply(mat, f):
    return GridField(f.grid, mat @ f.values)


def diff_x(f: GridField) -> GridField:
    return _apply(operators(f.grid).dx, f)


def diff_y(f: GridField) -> GridField:
    return _apply(operators(f.grid).dy, f)


def diff_xx(f: GridField) -> GridField:
    return _apply(operators(f.grid).dxx, f)


def diff_yy(f: GridField) -> GridField:
    return _apply(operators(f.grid).dyy, f)


def singular_mask(v: GridField, a, eps=None):
    """Slots on the x-axis where ``a == 0`` and ``|v|`` is below the singular threshold."""
    grid = v.grid
    if a != 0:
        return np.zeros(grid.n, bool)
    eps = eps_sing(grid.h) if eps is None else eps
    on_axis = grid.points[:, 1] == 0.0
    return on_axis & (np.abs(v.values) < eps)


def residual_pair(p: PairField, eps=None):
    """Residuals ``(u_x - v_y, v_x + 2 sqrt(v^2 + y^2 + a^2) u_y)`` of the first-order system.

    For ``a == 0`` the returned fields carry ``flagged`` masks marking the
    singular x-axis slots, where the residual has no meaning.
    """
    ops = operators(p.grid)
    u, v = p.u.values, p.v.values
    y = p.grid.points[:, 1]
    r1 = ops.dx @ u - ops.dy @ v
    r2 = ops.dx @ v + 2.0 * np.sqrt(v * v + y * y + p.a * p.a) * (ops.dy @ u)
    mask = singular_mask(p.v, p.a, eps) if p.a == 0 else None
    return GridField(p.grid, r1, mask), GridField(p.grid, r2, mask)


def potential_coefficient(fx, y, a, h):
    """Coefficient multiplying ``f_xx`` and its derivative with respect to ``f_x``.

    Off the x-axis this is ``W^(-1/2)`` with ``W = f_x^2 + y^2 + a^2``.  On the
    axis row the ``y^2`` term varies across the cell faster than any nodal
    sample can follow when ``f_x`` and ``a`` are small, so the coefficient is
    averaged over ``|y| <= h/2``: ``(2/h) asinh(h / (2 s))`` with
    ``s^2 = f_x^2 + a^2``.  Both agree to relative order ``h^2 / s^2``.
    """
    fx = np.asarray(fx, dtype=float)
    y = np.asarray(y, dtype=float)
    W = fx * fx + y * y + a * a
    with np.errstate(divide="ignore", invalid="ignore"):
        c = W**-0.5
        dc = -fx * W**-1.5
        ax = y == 0
        if np.any(ax):
            s2 = fx[ax] ** 2 + a * a
            s = np.sqrt(s2)
            c[ax] = (2.0 / h) * np.arcsinh(h / (2.0 * s))
            dc[ax] = -fx[ax] / (s2 * np.sqrt(s2 + h * h / 4))
    return c, dc


def residual_potential(f: GridField, a, eps=None) -> GridField:
    """``((f_x)^2 + y^2 + a^2)^(-1/2) f_xx + 2 f_yy`` at every slot (axis row cell-averaged)."""
    grid = f.grid
    ops = operators(grid)
    y = grid.points[:, 1]
    fx = ops.dx @ f.values
    c, _ = potential_coefficient(fx, y, a, grid.h)
    with np.errstate(invalid="ignore"):
        res = c * (ops.dxx @ f.values) + 2.0 * (ops.dyy @ f.values)
    mask = None
    if a == 0:
        mask = singular_mask(GridField(grid, fx), a, eps) | ~np.isfinite(res)
        res = np.where(mask, 0.0, res)
    return GridField(grid, res, mask)


def residual_v_divergence(v: GridField, a, eps=None) -> GridField:
    """``d/dx[(v^2 + y^2 + a^2)^(-1/2) v_x] + 2 v_yy`` by flux differencing at half-nodes."""
    grid = v.grid
    ops = operators(grid)
    vals = v.values
    pts = grid.points
    n_int = grid.n_int
    k = np.arange(n_int)
    y = grid.xy[:, 1]
    out = np.empty(grid.n)

    def flux(nb, arm, sign):
        vm = 0.5 * (vals[k] + vals[nb])
        ym = 0.5 * (y + pts[nb, 1])
        coef = (vm * vm + ym * ym + a * a) ** -0.5
        return sign * coef * (vals[nb] - vals[k]) / arm

    with np.errstate(divide="ignore", invalid="ignore"):
        hl, hr = grid.arm[:, 1], grid.arm[:, 0]
        fe = flux(grid.nbr[:, 0], hr, 1.0)
        fw = flux(grid.nbr[:, 1], hl, -1.0)
        out[:n_int] = (fe - fw) / (0.5 * (hl + hr)) + 2.0 * (ops.dyy @ vals)[:n_int]
        # boundary slots: expanded non-divergence form with least-squares derivatives
        vb = vals[n_int:]
        yb = grid.bxy[:, 1]
        W = vb * vb + yb * yb + a * a
        vx = (ops.dx @ vals)[n_int:]
        out[n_int:] = (W**-0.5 * (ops.dxx @ vals)[n_int:] - W**-1.5 * vb * vx * vx
                       + 2.0 * (ops.dyy @ vals)[n_int:])
    mask = singular_mask(v, a, eps) if a == 0 else None
    if mask is not None:
        bad = mask | ~np.isfinite(out)
        out = np.where(bad, 0.0, out)
        mask = bad
    return GridField(grid, out, mask)


def _axis_cell_average(v0, vx, a, h, order=32):
    """Mean of ``W^(-1/2)`` over an axis cell with ``v = v0 + vx * xi`` across it.

    The y-average is exact; the x-average uses Gauss-Legendre nodes, which
    never land on the integrable log singularity where ``v`` crosses zero.
    """
    xi, wq = np.polynomial.legendre.leggauss(order)
    xi, wq = 0.5 * h * xi, 0.5 * wq
    s = np.sqrt((v0[:, None] + vx[:, None] * xi[None, :]) ** 2 + a * a)
    with np.errstate(divide="ignore"):
        inner = (2.0 / h) * np.arcsinh(h / (2.0 * s))
    return inner @ wq


def weak_residual_v(v: GridField, tests, a=0.0, boundary_tol=1e-12):
    """Weak form of the divergence equation tested against each ``psi`` in ``tests``.

    Returns ``-int psi_x W^(-1/2) v_x - 2 int psi_y v_y`` per test function, with
    ``W = v^2 + y^2 + a^2``.  On the axis row ``W^(-1/2)`` is averaged over the
    node's cell, where it has an integrable singularity when ``a = 0``.  Only
    first derivatives of ``v`` enter.
    """
    grid = v.grid
    ops = operators(grid)
    w = quadrature_weights(grid)
    y = grid.points[:, 1]
    vx = ops.dx @ v.values
    vy = ops.dy @ v.values
    coef, _ = potential_coefficient(v.values, y, a, grid.h)
    ax = y == 0
    coef[ax] = _axis_cell_average(v.values[ax], vx[ax], a, grid.h)
    ok = np.isfinite(coef)
    coef[~ok] = 0.0
    out = []
    for psi in tests:
        if np.max(np.abs(psi.boundary), initial=0.0) >= boundary_tol:
            raise TestNotVanishing(f"test function is {psi.sup():.3g} on the boundary")
        px = ops.dx @ psi.values
        py = ops.dy @ psi.values
        integrand = -px * coef * vx - 2.0 * py * vy
        out.append(float(np.sum(w[ok] * integrand[ok])))
    return out


def default_anchor(grid):
    row = grid.axis_nodes
    return int(row[np.argmin(np.abs(grid.xy[row, 0]))])


def _cumtrapz(vals, h):
    return np.concatenate([[0.0], np.cumsum(0.5 * (vals[1:] + vals[:-1]) * h)])


def integrate_gradient(grid, gx, gy, anchor=None):
    """Integrate ``(gx, gy)`` from ``anchor`` along axis-parallel staircases.

    The primary path runs vertically to the x-axis, along it, then vertically to
    the target.  A second path (vertical through the anchor column, then along
    the target row) is used where it exists; the largest disagreement between
    the two is returned as the path-independence error.
    """
    anchor = default_anchor(grid) if anchor is None else int(anchor)
    h = grid.h
    index = grid.index
    gxv, gyv = gx.values, gy.values
    i0, j0 = (int(t) for t in grid.ij[anchor])

    def column(i):
        js = sorted(j for (ii, j) in _columns(grid)[i])
        return js

    F = np.full(grid.n_int, np.nan)
    # anchor column down/up to the axis
    col0 = column(i0)
    ks = np.array([index[(i0, j)] for j in col0])
    cum = _cumtrapz(gyv[ks], h)
    base = cum[col0.index(j0)]
    f_axis0 = -(base - cum[col0.index(0)])
    # along the axis row
    row = sorted(i for (i, j) in index if j == 0)
    kr = np.array([index[(i, 0)] for i in row])
    cr = _cumtrapz(gxv[kr], h)
    f_row = f_axis0 + cr - cr[row.index(i0)]
    for i, fa in zip(row, f_row):
        col = column(i)
        kc = np.array([index[(i, j)] for j in col])
        cc = _cumtrapz(gyv[kc], h)
        F[kc] = fa + cc - cc[col.index(0)]

    # second path for the independence check
    err = 0.0
    f_col0 = cum - base
    for j, fc in zip(col0, f_col0):
        rowj = sorted(i for (i, jj) in index if jj == j)
        kj = np.array([index[(i, j)] for i in rowj])
        cj = _cumtrapz(gxv[kj], h)
        alt = fc + cj - cj[rowj.index(i0)]
        err = max(err, float(np.max(np.abs(alt - F[kj]))))

    out = np.empty(grid.n)
    out[: grid.n_int] = F
    sgn = np.array([1.0, -1.0, 1.0, -1.0])
    for b in range(grid.n_bnd):
        k, d = grid.bnode[b], grid.bdir[b]
        g = gxv if d < 2 else gyv
        slot = grid.n_int + b
        out[slot] = F[k] + sgn[d] * 0.5 * (g[k] + g[slot]) * grid.arm[k, d]
    return GridField(grid, out, meta={"path_error": err, "anchor": anchor}), err


@lru_cache(maxsize=64)
def _column_table(grid):
    table = {}
    for (i, j) in grid.index:
        table.setdefault(i, []).append((i, j))
    return table


def _columns(grid):
    return _column_table(grid)


def path_tolerance(grid):
    return 10.0 * grid.h**2 * grid.domain.diameter


def recover_f(p: PairField, anchor=None, tol=None) -> GridField:
    """Potential ``f`` with ``f_x = v``, ``f_y = u`` and ``f(anchor) = 0``."""
    f, err = integrate_gradient(p.grid, p.v, p.u, anchor)
    tol = path_tolerance(p.grid) if tol is None else tol
    if err > tol:
        raise NotIntegrable(f"path dependence {err:.3g} exceeds {tol:.3g}: u_x != v_y")
    return f


def recover_u_from_v(v: GridField, a, anchor=None, tol=None) -> GridField:
    """``u`` with ``u_x = v_y`` and ``u_y = -v_x / (2 sqrt(v^2 + y^2 + a^2))``, ``u(anchor) = 0``."""
    if a == 0:
        raise ValueError("recover_u_from_v needs a != 0")
    grid = v.grid
    ops = operators(grid)
    y = grid.points[:, 1]
    gx = GridField(grid, ops.dy @ v.values)
    gy = GridField(grid, -(ops.dx @ v.values) / (2.0 * np.sqrt(v.values**2 + y * y + a * a)))
    u, err = integrate_gradient(grid, gx, gy, anchor)
    tol = path_tolerance(grid) if tol is None else tol
    if err > tol:
        raise NotIntegrable(f"path dependence {err:.3g} exceeds {tol:.3g}")
    return u
