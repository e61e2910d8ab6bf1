"""Small planar-polygon helpers (convex clipping, areas, arclength paths)."""

import numpy as np


def polygon_area(poly):
    """Signed shoelace area; positive for counter-clockwise vertex order."""
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _clip_halfplane(poly, normal, offset):
    # keep points with normal . p <= offset
    if len(poly) == 0:
        return poly
    d = poly @ normal - offset
    out = []
    n = len(poly)
    for k in range(n):
        p, q = poly[k], poly[(k + 1) % n]
        dp, dq = d[k], d[(k + 1) % n]
        if dp <= 0:
            out.append(p)
        if (dp < 0 < dq) or (dq < 0 < dp):
            t = dp / (dp - dq)
            out.append(p + t * (q - p))
    return np.array(out, dtype=float).reshape(-1, 2)


def clip_to_box(poly, x0, x1, y0, y1):
    """Sutherland-Hodgman clip of a convex CCW polygon by an axis-aligned box."""
    out = np.asarray(poly, dtype=float)
    for normal, offset in (
        (np.array([-1.0, 0.0]), -x0),
        (np.array([1.0, 0.0]), x1),
        (np.array([0.0, -1.0]), -y0),
        (np.array([0.0, 1.0]), y1),
    ):
        out = _clip_halfplane(out, normal, offset)
        if len(out) < 3:
            return np.empty((0, 2))
    return _dedupe(out)


def _dedupe(poly, tol=1e-14):
    if len(poly) < 2:
        return poly
    keep = [0]
    for k in range(1, len(poly)):
        if np.max(np.abs(poly[k] - poly[keep[-1]])) > tol:
            keep.append(k)
    if len(keep) > 1 and np.max(np.abs(poly[keep[-1]] - poly[keep[0]])) <= tol:
        keep.pop()
    return poly[keep]


def polygon_path(poly):
    """Return ``gamma(t)`` for t in [0, 1), tracing the closed polygon by arclength."""
    poly = np.asarray(poly, dtype=float)
    seg = np.roll(poly, -1, axis=0) - poly
    lengths = np.hypot(seg[:, 0], seg[:, 1])
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    total = cum[-1]

    def gamma(t):
        s = (np.asarray(t, dtype=float) % 1.0) * total
        k = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(poly) - 1)
        frac = (s - cum[k]) / np.where(lengths[k] > 0, lengths[k], 1.0)
        pts = poly[k] + frac[..., None] * seg[k]
        return pts[..., 0], pts[..., 1]

    # vertices as parameter values, so corners are always sampled
    gamma.breaks = cum[:-1] / total
    return gamma


def circle_path(center, radius):
    cx, cy = center

    def gamma(t):
        t = np.asarray(t, dtype=float)
        return cx + radius * np.cos(2 * np.pi * t), cy + radius * np.sin(2 * np.pi * t)

    gamma.breaks = np.zeros(0)
    return gamma
