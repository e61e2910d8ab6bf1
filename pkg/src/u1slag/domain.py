"""Strictly convex, x-axis-symmetric planar domains and their cut-cell grids.

Both domain kinds are star-shaped about the origin and described in polar form
``r = R(theta)``.  Grids are uniform Cartesian lattices ``(i*h, j*h)``; the row
``j = 0`` is the x-axis, so reflection ``y -> -y`` permutes nodes exactly.
Where a lattice line leaves the domain between two nodes, the crossing point
is stored as a boundary intersection and the stencil arm is shortened
(Shortley-Weller).
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import AsymmetricDomain, DomainError, NonConvexDomain, ResolutionTooCoarse

CONVEXITY_SAMPLES = 512
CURVATURE_FLOOR = 1e-9
MIN_INTERIOR_NODES = 50

# stencil directions: E, W, N, S
DIRS = ((1, 0), (-1, 0), (0, 1), (0, -1))
_MIRROR_DIR = (0, 1, 3, 2)


@dataclass(frozen=True)
class DomainSpec:
    kind: str
    semi_axes: Optional[tuple] = None
    cos_coeffs: Optional[tuple] = None

    def radius_derivs(self, theta):
        """Return ``R, R', R''`` at the polar angles ``theta``."""
        theta = np.asarray(theta, dtype=float)
        if self.kind == "ellipse":
            p, q = self.semi_axes
            g = q**2 * np.cos(theta) ** 2 + p**2 * np.sin(theta) ** 2
            g1 = (p**2 - q**2) * np.sin(2 * theta)
            g2 = 2 * (p**2 - q**2) * np.cos(2 * theta)
            r = p * q * g**-0.5
            r1 = -0.5 * p * q * g**-1.5 * g1
            r2 = p * q * (0.75 * g**-2.5 * g1**2 - 0.5 * g**-1.5 * g2)
            return r, r1, r2
        j = np.arange(len(self.cos_coeffs))
        c = np.asarray(self.cos_coeffs, dtype=float)
        jt = np.multiply.outer(theta, j)
        r = np.cos(jt) @ c
        r1 = -np.sin(jt) @ (c * j)
        r2 = -np.cos(jt) @ (c * j**2)
        return r, r1, r2

    def radius(self, theta):
        return self.radius_derivs(theta)[0]

    def curvature(self, theta):
        r, r1, r2 = self.radius_derivs(theta)
        return (r**2 + 2 * r1**2 - r * r2) / (r**2 + r1**2) ** 1.5

    def point(self, theta):
        r = self.radius(theta)
        return r * np.cos(theta), r * np.sin(theta)

    def level(self, x, y):
        """Signed radial gap ``|p| - R(arg p)``: negative inside, zero on the boundary."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return np.hypot(x, y) - self.radius(np.arctan2(y, x))

    def contains(self, x, y, tol=0.0):
        return self.level(x, y) < -tol

    @cached_property
    def diameter(self):
        t = np.linspace(0, 2 * np.pi, 720, endpoint=False)
        x, y = self.point(t)
        pts = np.column_stack([x, y])
        d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
        return float(d.max())

    @cached_property
    def extent(self):
        t = np.linspace(0, 2 * np.pi, 4096, endpoint=False)
        x, y = self.point(t)
        return float(x.min()), float(x.max()), float(np.abs(y).max())

    def polygon(self, n=1024):
        t = np.linspace(0, 2 * np.pi, n, endpoint=False)
        x, y = self.point(t)
        return np.column_stack([x, y])


def make_domain(kind="ellipse", *, semi_axes=None, cos=None, sin=None):
    """Build and validate a domain.

    ``kind="ellipse"`` takes ``semi_axes=(p, q)`` along x and y.  ``kind="radial"``
    takes cosine coefficients of ``R(theta) = sum_j cos[j] cos(j theta)``; any
    nonzero sine coefficient breaks the x-axis symmetry and is rejected.
    """
    if kind == "ellipse":
        if semi_axes is None:
            raise DomainError("ellipse needs semi_axes=(p, q)")
        p, q = (float(s) for s in semi_axes)
        if not (p > 0 and q > 0):
            raise DomainError(f"semi-axes must be positive, got {semi_axes}")
        spec = DomainSpec("ellipse", semi_axes=(p, q))
    elif kind == "radial":
        if sin is not None and np.any(np.abs(np.asarray(sin, dtype=float)) > 0):
            raise AsymmetricDomain("radial boundary with sine terms is not symmetric under y -> -y")
        if cos is None or len(cos) == 0:
            raise DomainError("radial domain needs cosine coefficients")
        spec = DomainSpec("radial", cos_coeffs=tuple(float(c) for c in cos))
    else:
        raise DomainError(f"unknown domain kind {kind!r}")

    t = np.linspace(0, 2 * np.pi, CONVEXITY_SAMPLES, endpoint=False)
    if np.any(spec.radius(t) <= 0):
        raise DomainError("boundary radius must be positive everywhere")
    kappa = spec.curvature(t)
    if np.any(kappa <= CURVATURE_FLOOR):
        k = int(np.argmin(kappa))
        raise NonConvexDomain(f"boundary curvature {kappa[k]:.3g} at theta={t[k]:.4f}")
    return spec


def unit_disc():
    return make_domain("ellipse", semi_axes=(1.0, 1.0))


class BoundarySamples(NamedTuple):
    theta: np.ndarray
    x: np.ndarray
    y: np.ndarray
    arclength: np.ndarray
    total_length: float


def sample_boundary(domain, n):
    """Sample ``n`` equally spaced polar angles of the boundary with cumulative arclength."""
    if n < 64:
        raise ValueError(f"need at least 64 boundary samples, got {n}")
    theta = 2 * np.pi * np.arange(n) / n
    x, y = domain.point(theta)
    # speed sqrt(R^2 + R'^2) on a 16x refined grid; periodic trapezoid is spectrally accurate
    fine = 2 * np.pi * np.arange(16 * n) / (16 * n)
    r, r1, _ = domain.radius_derivs(fine)
    speed = np.sqrt(r**2 + r1**2)
    dt = fine[1] - fine[0]
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (speed[1:] + speed[:-1]) * dt)])
    total = float(speed.sum() * dt)
    return BoundarySamples(theta, x, y, cum[::16][:n], total)


@dataclass(frozen=True, eq=False)
class BoundaryFunction:
    """Dirichlet data on the boundary, parameterized by the polar angle.

    Evaluation prefers, in order: an ambient function ``func(x, y)`` whose trace
    this is, the trigonometric closed form, then a periodic cubic spline
    through the samples.
    """

    domain: DomainSpec
    theta: np.ndarray
    values: np.ndarray
    cos: Optional[tuple] = None
    sin: Optional[tuple] = None
    func: Optional[Callable] = None
    smoothness: str = "C^inf"

    def __post_init__(self):
        th = np.asarray(self.theta, dtype=float)
        if th.size < 64:
            raise ValueError("boundary function needs at least 64 samples")
        if np.any(np.diff(th) <= 0) or th[0] < 0 or th[-1] >= 2 * np.pi:
            raise ValueError("sample angles must be strictly increasing within [0, 2pi)")

    @classmethod
    def trig(cls, domain, cos=(), sin=(), n=512, smoothness="C^inf"):
        """``phi(theta) = sum_j cos[j] cos(j theta) + sin[j] sin(j theta)`` (``sin[0]`` unused)."""
        theta = 2 * np.pi * np.arange(n) / n
        obj = cls(domain, theta, np.zeros(n), tuple(map(float, cos)), tuple(map(float, sin)),
                  None, smoothness)
        object.__setattr__(obj, "values", obj(theta))
        return obj

    @classmethod
    def trace(cls, domain, func, n=512, smoothness="C^inf"):
        """Restriction of an ambient function ``func(x, y)`` to the boundary."""
        theta = 2 * np.pi * np.arange(n) / n
        x, y = domain.point(theta)
        return cls(domain, theta, np.asarray(func(x, y), dtype=float) + 0 * x, None, None, func,
                   smoothness)

    @classmethod
    def from_samples(cls, domain, theta, values, smoothness="sampled"):
        order = np.argsort(np.mod(theta, 2 * np.pi))
        th = np.mod(np.asarray(theta, dtype=float), 2 * np.pi)[order]
        return cls(domain, th, np.asarray(values, dtype=float)[order], smoothness=smoothness)

    @cached_property
    def _spline(self):
        th = np.append(self.theta, self.theta[0] + 2 * np.pi)
        vals = np.append(self.values, self.values[0])
        return CubicSpline(th, vals, bc_type="periodic")

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.func is not None:
            x, y = self.domain.point(theta)
            return np.asarray(self.func(x, y), dtype=float) + 0 * x
        if self.cos is not None:
            out = np.zeros_like(theta)
            for j, c in enumerate(self.cos):
                out = out + c * np.cos(j * theta)
            for j, s in enumerate(self.sin or ()):
                if j:
                    out = out + s * np.sin(j * theta)
            return out
        return self._spline(np.mod(theta, 2 * np.pi))

    def at(self, x, y):
        """Evaluate at boundary points given in Cartesian form."""
        if self.func is not None:
            x = np.asarray(x, dtype=float)
            return np.asarray(self.func(x, np.asarray(y, dtype=float)), dtype=float) + 0 * x
        return self(np.arctan2(y, x))

    def _combine(self, other, op):
        if isinstance(other, BoundaryFunction):
            f = lambda x, y: op(self.at(x, y), other.at(x, y))  # noqa: E731
        else:
            f = lambda x, y: op(self.at(x, y), other)  # noqa: E731
        return BoundaryFunction.trace(self.domain, f, n=len(self.theta), smoothness=self.smoothness)

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __neg__(self):
        return BoundaryFunction.trace(self.domain, lambda x, y: -self.at(x, y), n=len(self.theta),
                                      smoothness=self.smoothness)

    def plus_linear(self, b, c):
        """``phi + b x + c y``."""
        return BoundaryFunction.trace(self.domain, lambda x, y: self.at(x, y) + b * x + c * y,
                                      n=len(self.theta), smoothness=self.smoothness)

    def reflected(self):
        """The data ``phi'(x, y) = -phi(x, -y)``."""
        return BoundaryFunction.trace(self.domain, lambda x, y: -self.at(x, -np.asarray(y)),
                                      n=len(self.theta), smoothness=self.smoothness)

    def sup(self):
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True, eq=False)
class Grid:
    """Cut-cell lattice on a domain.

    Field values are stored as one vector: interior nodes first (``n_int``),
    then one slot per boundary intersection (``n_bnd``).  ``nbr[k, d]`` is the
    slot reached from node ``k`` in direction ``d`` (E, W, N, S) and
    ``arm[k, d]`` the distance to it.
    """

    domain: DomainSpec
    h: float
    ij: np.ndarray
    xy: np.ndarray
    nbr: np.ndarray
    arm: np.ndarray
    bnode: np.ndarray
    bdir: np.ndarray
    bfrac: np.ndarray
    bxy: np.ndarray
    reflect: np.ndarray
    index: dict = field(repr=False)

    @property
    def n_int(self):
        return len(self.ij)

    @property
    def n_bnd(self):
        return len(self.bnode)

    @property
    def n(self):
        return self.n_int + self.n_bnd

    @cached_property
    def points(self):
        """Coordinates of every value slot, shape ``(n, 2)``."""
        return np.vstack([self.xy, self.bxy])

    @cached_property
    def axis_nodes(self):
        return np.flatnonzero(self.ij[:, 1] == 0)

    @cached_property
    def btheta(self):
        return np.arctan2(self.bxy[:, 1], self.bxy[:, 0])

    @cached_property
    def regular(self):
        """Interior nodes whose four neighbours are all interior."""
        return np.all(self.nbr < self.n_int, axis=1)

    @cached_property
    def boundary_polygon(self):
        """Distinct boundary intersections ordered by angle (a convex CCW polygon)."""
        order = np.lexsort((np.hypot(*self.bxy.T), self.btheta))
        pts = self.bxy[order]
        keep = np.ones(len(pts), bool)
        keep[1:] = np.any(np.abs(np.diff(pts, axis=0)) > 1e-13, axis=1)
        return pts[keep], order[keep]


def build_grid(domain, h):
    """Lay a lattice of spacing ``h`` over ``domain`` and record cut-cell arms."""
    h = float(h)
    diam = domain.diameter
    if not (0 < h < diam / 8):
        raise ResolutionTooCoarse(f"h={h} must lie in (0, diam/8={diam / 8:.4g})")
    xmin, xmax, ymax = domain.extent
    imin, imax = int(np.floor(xmin / h)) - 1, int(np.ceil(xmax / h)) + 1
    jmax = int(np.ceil(ymax / h)) + 1
    tol = 1e-12 * diam

    ii = np.arange(imin, imax + 1)
    jj = np.arange(0, jmax + 1)
    X, Y = np.meshgrid(ii * h, jj * h, indexing="ij")
    upper = domain.level(X, Y) < -tol  # rows j >= 0; lower half mirrored for exact symmetry

    def inside(i, j):
        j = abs(j)
        if i < imin or i > imax or j > jmax:
            return False
        return bool(upper[i - imin, j])

    nodes = [(i, j) for j in range(-jmax, jmax + 1) for i in range(imin, imax + 1) if inside(i, j)]
    if len(nodes) < MIN_INTERIOR_NODES:
        raise ResolutionTooCoarse(f"only {len(nodes)} interior nodes at h={h}")
    index = {node: k for k, node in enumerate(nodes)}
    n_int = len(nodes)

    cache = {}

    def crossing(i, j, d):
        # distance from node (i, j) to the boundary along direction d
        if j < 0 or (j == 0 and d == 3):
            return crossing(i, -j, _MIRROR_DIR[d])
        key = (i, j, d)
        if key not in cache:
            dx, dy = DIRS[d]
            x0, y0 = i * h, j * h
            g = lambda s: float(domain.level(x0 + s * dx, y0 + s * dy))  # noqa: E731
            if g(h) <= tol and g(h) >= -tol:
                s = h
            else:
                s = brentq(g, 0.0, h, xtol=1e-15 * max(1.0, diam), rtol=1e-15, maxiter=200)
            cache[key] = s
        return cache[key]

    nbr = np.empty((n_int, 4), dtype=np.int64)
    arm = np.empty((n_int, 4))
    bnode, bdir, bfrac, bxy = [], [], [], []
    bindex = {}
    for k, (i, j) in enumerate(nodes):
        for d, (dx, dy) in enumerate(DIRS):
            if inside(i + dx, j + dy):
                nbr[k, d] = index[(i + dx, j + dy)]
                arm[k, d] = h
                continue
            s = crossing(i, j, d)
            b = len(bnode)
            bindex[(i, j, d)] = b
            bnode.append(k)
            bdir.append(d)
            bfrac.append(s / h)
            bxy.append((i * h + s * dx, j * h + s * dy))
            nbr[k, d] = n_int + b
            arm[k, d] = s
    bxy = np.array(bxy, dtype=float).reshape(-1, 2)
    # enforce exact mirror symmetry of lower-half crossing coordinates
    for (i, j, d), b in bindex.items():
        if j < 0 or (j == 0 and d == 3):
            mb = bindex[(i, -j, _MIRROR_DIR[d])]
            bxy[b] = (bxy[mb, 0], -bxy[mb, 1])

    ij = np.array(nodes, dtype=np.int64)
    xy = ij * h
    reflect = np.empty(n_int + len(bnode), dtype=np.int64)
    for k, (i, j) in enumerate(nodes):
        reflect[k] = index[(i, -j)]
    for (i, j, d), b in bindex.items():
        reflect[n_int + b] = n_int + bindex[(i, -j, _MIRROR_DIR[d])]

    return Grid(domain, h, ij, xy.astype(float), nbr, arm, np.array(bnode, dtype=np.int64),
                np.array(bdir, dtype=np.int64), np.array(bfrac), bxy, reflect, index)
