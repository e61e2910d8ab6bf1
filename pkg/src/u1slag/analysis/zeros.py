"""Zeros of the difference of two solution pairs and their multiplicities.

A zero of ``(u1, v1) - (u2, v2)`` is located by a quadtree over the analysis
region.  Each cell's winding number counts the zeros inside it with
multiplicity, so cells with winding 0 and a field magnitude that cannot
reach zero are discarded, and cells with nonzero winding are split until
they are as small as the resolution allows.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..calculus import eps_sing
from ..errors import (AnalysisError, FitPoor, IdenticalSolutions, NotAZero, SingularZero,
                      Unstable, UnderResolved, ZeroOnBoundary, ZeroOnContour)
from ..geometry import circle_path, clip_to_box, polygon_area, polygon_path
from .winding import contour_winding

# split at slightly off-centre fractions so cell edges avoid symmetry lines (notably y = 0)
SPLIT_FRACTIONS = (0.5123, 0.4629, 0.5617, 0.4311)
LATTICE = 17


class AnalyticPair:
    """A pair ``(u, v)`` given in closed form, with the evaluation interface of a grid pair."""

    def __init__(self, u, v, a=0.0, region=None, h=0.01, singular=False):
        self.u_fn, self.v_fn = u, v
        self.a = float(a)
        self.h = float(h)
        self.singular = singular
        if region is None:
            t = 2 * np.pi * np.arange(512) / 512
            region = np.column_stack([np.cos(t), np.sin(t)])
        self._region = np.asarray(region, dtype=float)

    @property
    def region(self):
        return self._region

    def eval(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return np.asarray(self.u_fn(x, y), float) + 0 * x, np.asarray(self.v_fn(x, y), float) + 0 * x

    def reflected(self):
        return AnalyticPair(lambda x, y: self.u_fn(x, -np.asarray(y)),
                            lambda x, y: -self.v_fn(x, -np.asarray(y)),
                            self.a, self._region, self.h, self.singular)


@dataclass(frozen=True)
class ZeroRecord:
    location: tuple
    k: int
    singular: bool = False
    radius: Optional[float] = None
    magnitude: float = 0.0

    def __post_init__(self):
        if self.singular and self.location[1] != 0:
            raise ValueError("a singular zero must lie on the x-axis")


class ZeroSet(list):
    """List of :class:`ZeroRecord` that also carries the whole-boundary winding."""

    def __init__(self, records=(), boundary_winding=0, stats=None):
        super().__init__(records)
        self.boundary_winding = boundary_winding
        self.stats = stats or {}

    @property
    def total_multiplicity(self):
        return sum(r.k for r in self)


def difference(p1, p2):
    """``(u1 - u2) + i (v1 - v2)`` as a vectorized complex function of ``(x, y)``."""

    def d(x, y):
        u1, v1 = p1.eval(x, y)
        u2, v2 = p2.eval(x, y)
        return (u1 - u2) + 1j * (v1 - v2)

    return d


def _inside(poly, x, y):
    # convex CCW polygon, non-strict
    px, py = poly[:, 0], poly[:, 1]
    qx, qy = np.roll(px, -1), np.roll(py, -1)
    cross = (qx - px)[:, None] * (np.ravel(y) - py[:, None]) - (qy - py)[:, None] * (np.ravel(x) - px[:, None])
    return np.all(cross >= 0, axis=0).reshape(np.shape(x))


def _distance_to_edges(poly, x, y):
    px, py = poly[:, 0], poly[:, 1]
    ex, ey = np.roll(px, -1) - px, np.roll(py, -1) - py
    L = np.hypot(ex, ey)
    return float(np.min(((x - px) * ey - (y - py) * ex) / np.where(L > 0, L, 1) * -1))


def _lattice(poly, box, m):
    x0, x1, y0, y1 = box
    xs, ys = np.meshgrid(np.linspace(x0, x1, m), np.linspace(y0, y1, m))
    keep = _inside(poly, xs, ys)
    return xs[keep], ys[keep]


def _lipschitz(d, region, m=65):
    x0, y0 = region.min(axis=0)
    x1, y1 = region.max(axis=0)
    xs, ys = np.meshgrid(np.linspace(x0, x1, m), np.linspace(y0, y1, m))
    inside = _inside(region * (1 - 1e-6), xs, ys)
    vals = np.where(inside, d(xs, ys), np.nan)
    dx = (x1 - x0) / (m - 1)
    dy = (y1 - y0) / (m - 1)
    gx = np.abs(np.diff(vals, axis=1)) / dx
    gy = np.abs(np.diff(vals, axis=0)) / dy
    return 1.5 * float(max(np.nanmax(gx), np.nanmax(gy)))


def _sup(d, region, m=65):
    x0, y0 = region.min(axis=0)
    x1, y1 = region.max(axis=0)
    xs, ys = np.meshgrid(np.linspace(x0, x1, m), np.linspace(y0, y1, m))
    inside = _inside(region, xs, ys)
    return float(np.max(np.abs(d(xs[inside], ys[inside]))))


def _identical(p1, p2, tol):
    g1, g2 = getattr(p1, "u", None), getattr(p2, "u", None)
    if g1 is not None and g2 is not None and getattr(g1, "grid", None) is getattr(g2, "grid", 0):
        gap = max(np.max(np.abs(p1.u.values - p2.u.values)), np.max(np.abs(p1.v.values - p2.v.values)))
        return float(gap) <= tol
    return _sup(difference(p1, p2), p1.region) <= tol


def _cell_winding(d, region, box):
    poly = clip_to_box(region, *box)
    if len(poly) < 3 or polygon_area(poly) <= 1e-16:
        return None, poly
    k, _ = contour_winding(d, polygon_path(poly))
    return k, poly


def _split(box, frac):
    x0, x1, y0, y1 = box
    xm = x0 + frac * (x1 - x0)
    ym = y0 + frac * (y1 - y0)
    return [(x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1)]


def find_zeros(p1, p2, cluster=None, min_cell=None, identical_tol=1e-10, verify_circles=True):
    """Zeros of ``(u1, v1) - (u2, v2)`` in the interior of the analysis region.

    Cells with nonzero winding are refined to a quarter of ``cluster``
    (default ``4 h``), then hits closer than ``cluster`` are merged with
    their multiplicities summed.  The sum of multiplicities always equals the
    winding number along the whole boundary, which is stored on the result.
    """
    h = p1.h
    cluster = 4 * h if cluster is None else cluster
    # winding 0 cells are not refined below this; all multiplicities of solution
    # differences are positive, so a winding 0 cell of such a difference is empty
    min_cell = cluster / 2 if min_cell is None else min_cell
    region = np.asarray(p1.region, dtype=float)
    if _identical(p1, p2, identical_tol):
        raise IdenticalSolutions("the two pairs agree to within tolerance")
    d = difference(p1, p2)
    lo = region.min(axis=0) - 1e-9
    hi = region.max(axis=0) + 1e-9
    root = (lo[0], hi[0], lo[1], hi[1])
    try:
        k_total, _ = contour_winding(d, polygon_path(region))
    except ZeroOnContour as exc:
        raise ZeroOnBoundary(str(exc)) from exc
    stats = {"cells": 1, "discarded_margin": 0, "discarded_small": 0, "split_retries": 0}
    hits = []
    L = _lipschitz(d, region)
    stack = [(root, k_total)]
    while stack:
        box, k = stack.pop()
        size = max(box[1] - box[0], box[3] - box[2])
        poly = clip_to_box(region, *box)
        if k == 0:
            # discarding a winding 0 cell can only hide a +/- pair, never change the total
            x0, x1, y0, y1 = box
            gx, gy = np.meshgrid(np.linspace(x0, x1, 5), np.linspace(y0, y1, 5))
            inside = _inside(poly, gx, gy)
            if not np.any(inside):
                stats["discarded_margin"] += 1
                continue
            vals = d(gx, gy)
            mags = np.abs(vals[inside])
            steps = np.concatenate([np.abs(np.diff(vals, axis=1)).ravel(),
                                    np.abs(np.diff(vals, axis=0)).ravel()])
            local = max(2.0 * float(steps.max()) / (size / 4), 0.1 * L)
            if mags.min() > 0.75 * local * size / 4:
                stats["discarded_margin"] += 1
                continue
            if size <= min_cell:
                stats["discarded_small"] += 1
                continue
        elif size <= cluster / 4:
            xs, ys = _lattice(poly, box, LATTICE)
            if xs.size == 0:
                xs, ys = poly[:, 0], poly[:, 1]
            mags = np.abs(d(xs, ys))
            j = int(np.argmin(mags))
            hits.append((float(xs[j]), float(ys[j]), k, float(mags[j])))
            continue
        children = None
        for frac in SPLIT_FRACTIONS:
            try:
                kids = [(b, _cell_winding(d, region, b)[0]) for b in _split(box, frac)]
            except (ZeroOnContour, UnderResolved):
                stats["split_retries"] += 1
                continue
            if sum(kk for _, kk in kids if kk is not None) != k:
                stats["split_retries"] += 1
                continue
            children = kids
            break
        if children is None:
            raise UnderResolved(f"cannot split cell {box} consistently")
        stats["cells"] += 4
        # reverse so cells are processed in a fixed order
        stack.extend((b, kk) for b, kk in reversed(children) if kk is not None)

    records = _merge(hits, cluster)
    out = []
    for (b, c, k, mag) in records:
        radius = None
        if verify_circles and _distance_to_edges(region, b, c) > 1.05 * cluster and not any(
                (b - b2) ** 2 + (c - c2) ** 2 < (2 * cluster) ** 2
                for (b2, c2, _, _) in records if (b2, c2) != (b, c)):
            try:
                kc, _ = contour_winding(d, circle_path((b, c), cluster))
                if kc == k:
                    radius = cluster
            except (ZeroOnContour, UnderResolved):
                pass
        singular = _is_singular(p1, p2, b, c, cluster)
        out.append(ZeroRecord((b, 0.0 if singular else c), int(k), singular, radius, mag))
    out.sort(key=lambda r: r.location)
    total = sum(r.k for r in out)
    if total != k_total:
        raise AnalysisError(f"multiplicities sum to {total} but the boundary winding is {k_total}")
    return ZeroSet(out, k_total, stats)


def _merge(hits, cluster):
    groups = []
    for hit in sorted(hits):
        for g in groups:
            if any(np.hypot(hit[0] - o[0], hit[1] - o[1]) < cluster for o in g):
                g.append(hit)
                break
        else:
            groups.append([hit])
    # a chain of merges can leave two groups within range; repeat until stable
    changed = True
    while changed:
        changed = False
        for i in range(len(groups)):
            for j in range(i + 1, len(groups)):
                if any(np.hypot(p[0] - q[0], p[1] - q[1]) < cluster for p in groups[i] for q in groups[j]):
                    groups[i] += groups.pop(j)
                    changed = True
                    break
            if changed:
                break
    out = []
    for g in groups:
        w = np.array([abs(t[2]) for t in g], dtype=float)
        bx = float(np.dot(w, [t[0] for t in g]) / w.sum())
        by = float(np.dot(w, [t[1] for t in g]) / w.sum())
        out.append((bx, by, sum(t[2] for t in g), min(t[3] for t in g)))
    return out


def _is_singular(p1, p2, b, c, cluster):
    if p1.a != 0 or p2.a != 0 or abs(c) >= cluster:
        return False
    eps = eps_sing(p1.h)
    _, v1 = p1.eval(np.array([b]), np.array([0.0]))
    _, v2 = p2.eval(np.array([b]), np.array([0.0]))
    return bool(abs(v1[0]) < eps and abs(v2[0]) < eps)


def multiplicity_at(p1, p2, center, radius) -> int:
    """Winding of the difference on circles of radius ``radius`` and ``radius / 2``."""
    b, c = center
    region = np.asarray(p1.region, dtype=float)
    if _distance_to_edges(region, b, c) <= radius:
        raise ValueError("circle must lie inside the region")
    d = difference(p1, p2)
    k1, _ = contour_winding(d, circle_path(center, radius))
    k2, _ = contour_winding(d, circle_path(center, radius / 2))
    if k1 != k2:
        raise Unstable(f"winding {k1} at radius {radius:g} but {k2} at {radius / 2:g}")
    if k1 == 0:
        raise NotAZero(f"no zero enclosed at {center}")
    return k1


@dataclass(frozen=True)
class LeadingOrderFit:
    k_fit: float
    C_fit: complex
    lam: float
    rms: float

    def __iter__(self):
        return iter((self.k_fit, self.C_fit, self.lam))


def leading_order_fit(p1, p2, zero, a=None, radius=None, rings=3, n=256, k_tol=0.2, rms_tol=0.25):
    """Fit ``lam (u1 - u2) + i (v1 - v2) ~ C (lam (x - b) + i (y - c))^k`` near a zero.

    Samples rings of radius ``rho`` in the rescaled variable, jointly fits
    ``log|D| = k log rho + log|C|`` and ``arg D = k t + arg C``, and checks
    the fitted power against the zero's multiplicity.
    """
    b, c = zero.location
    a = p1.a if a is None else a
    _, v1 = p1.eval(np.array([b]), np.array([c]))
    lam = float(np.sqrt(2.0) * (v1[0] ** 2 + c * c + a * a) ** 0.25)
    if lam < 1e-6:
        raise SingularZero(f"lambda = {lam:.3g} at ({b:.4g}, {c:.4g})")
    rho0 = (radius if radius is not None else (zero.radius or 2 * p1.h)) * min(lam, 1.0)
    rhos = rho0 * 2.0 ** (-0.5 * np.arange(rings))
    t = 2 * np.pi * np.arange(n) / n
    rows, rhs = [], []
    ncol = 2 + rings
    for r, rho in enumerate(rhos):
        x = b + rho * np.cos(t) / lam
        y = c + rho * np.sin(t)
        u1, v1 = p1.eval(x, y)
        u2, v2 = p2.eval(x, y)
        D = lam * (u1 - u2) + 1j * (v1 - v2)
        if np.any(D == 0):
            raise FitPoor("difference vanishes on a fitting ring")
        mag_row = np.zeros((n, ncol))
        mag_row[:, 0] = np.log(rho)
        mag_row[:, 1] = 1.0
        ph_row = np.zeros((n, ncol))
        ph_row[:, 0] = t
        ph_row[:, 2 + r] = 1.0
        rows += [mag_row, ph_row]
        rhs += [np.log(np.abs(D)), np.unwrap(np.angle(D))]
    A = np.vstack(rows)
    y = np.concatenate(rhs)
    sol, *_ = np.linalg.lstsq(A, y, rcond=None)
    rms = float(np.sqrt(np.mean((A @ sol - y) ** 2)))
    k_fit = float(sol[0])
    arg_c = float(np.angle(np.mean(np.exp(1j * sol[2:]))))
    C_fit = complex(np.exp(sol[1] + 1j * arg_c))
    if rms > rms_tol:
        raise FitPoor(f"fit residual {rms:.3g} above {rms_tol}")
    if abs(k_fit - zero.k) >= k_tol:
        raise FitPoor(f"fitted power {k_fit:.3f} differs from multiplicity {zero.k}")
    return LeadingOrderFit(k_fit, C_fit, lam, rms)
