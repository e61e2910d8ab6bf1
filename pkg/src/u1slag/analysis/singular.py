"""Singular points of singular solutions: detection, multiplicity, type and counting bounds."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..calculus import PairField, eps_sing
from ..errors import AmbiguousSign, FlatBoundary
from .zeros import ZeroSet, find_zeros

TYPES = ("increasing", "decreasing", "maximum", "minimum")
ODD_TYPES = ("increasing", "decreasing")


def reflect_solution(p):
    """``u'(x, y) = u(x, -y)``, ``v'(x, y) = -v(x, -y)``."""
    return p.reflected()


@dataclass(frozen=True)
class NonisolatedLine:
    """The whole x-axis is singular: the pair is fixed by the reflection."""

    symmetry_error: float
    v_axis_sup: float
    tolerance: float


@dataclass(frozen=True)
class SingularityRecord:
    location: tuple
    k: int
    type: str
    eps: float

    def __post_init__(self):
        if self.type not in TYPES:
            raise ValueError(f"unknown singularity type {self.type!r}")
        if self.k < 1:
            raise ValueError("multiplicity must be positive")

    @property
    def parity_ok(self):
        return (self.k % 2 == 1) == (self.type in ODD_TYPES)


def _axis_values(p, xs):
    _, v = p.eval(xs, np.zeros_like(xs))
    return v


def _symmetry_error(p):
    if isinstance(p, PairField):
        r = p.grid.reflect
        return float(max(np.max(np.abs(p.u.values - p.u.values[r])),
                         np.max(np.abs(p.v.values + p.v.values[r]))))
    q = reflect_solution(p)
    t = np.linspace(-0.95, 0.95, 41)
    X, Y = np.meshgrid(t, t)
    region = p.region
    keep = np.hypot(X, Y) < 0.95 * np.min(np.hypot(region[:, 0], region[:, 1]))
    u1, v1 = p.eval(X[keep], Y[keep])
    u2, v2 = q.eval(X[keep], Y[keep])
    return float(max(np.max(np.abs(u1 - u2)), np.max(np.abs(v1 - v2))))


def _axis_extent(p):
    region = np.asarray(p.region)
    # the region is convex and symmetric, so its x-axis chord runs between the extreme x values
    return float(region[:, 0].min()), float(region[:, 0].max())


def _refine_root(p, b, half_width, n=401):
    """Point of smallest ``|v(x, 0)|`` near ``b``, at the sign change when there is one."""
    xs = np.linspace(b - half_width, b + half_width, n)
    v = _axis_values(p, xs)
    change = np.flatnonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)
    if change.size:
        j = change[np.argmin(np.abs(xs[change] - b))]
        return float(xs[j] - v[j] * (xs[j + 1] - xs[j]) / (v[j + 1] - v[j]))
    return float(xs[np.argmin(np.abs(v))])


def find_singularities(p, sym_tol=None, eps=None, cluster=None):
    """Singular points of a singular solution ``p`` (``a = 0``).

    Returns :class:`NonisolatedLine` when ``p`` equals its reflection,
    otherwise the x-axis zeros of ``p - reflect(p)`` as singularity records.
    Off-axis zeros come in mirror pairs and are not singularities; they are
    counted in the returned list's ``stats``.
    """
    scale = 1.0 + max(np.max(np.abs(c)) for c in p.eval(*np.asarray(p.region).T))
    sym_tol = 1e-8 * scale if sym_tol is None else sym_tol
    err = _symmetry_error(p)
    if err <= sym_tol:
        lo, hi = _axis_extent(p)
        xs = np.linspace(lo, hi, 801)[1:-1]
        return NonisolatedLine(err, float(np.max(np.abs(_axis_values(p, xs)))), sym_tol)
    cluster = 4 * p.h if cluster is None else cluster
    zeros = find_zeros(p, reflect_solution(p), cluster=cluster)
    records = []
    off_axis = 0
    for z in zeros:
        b, c = z.location
        if abs(c) >= cluster / 2:
            off_axis += 1
            continue
        b = _refine_root(p, b, cluster)
        probe = cluster if eps is None else eps
        kind = classify_singularity_type(p, b, probe)
        records.append(SingularityRecord((b, 0.0), z.k, kind, probe))
    out = ZeroSet(records, zeros.boundary_winding, dict(zeros.stats, off_axis_zeros=off_axis))
    return out


def classify_singularity_type(p, b, eps, widen=4):
    """Type from the signs of ``v(x, 0)`` on ``[b - eps, b)`` and ``(b, b + eps]``.

    Signs are read at ``n`` points in the outer half of each side, where
    ``|v|`` must exceed the singular threshold.  If it does not, the probe is
    doubled (at most ``widen`` times, staying inside the axis chord) provided
    ``v`` keeps one sign along the whole punctured interval, so that no other
    singularity is swallowed.
    """
    thresh = eps_sing(p.h) if getattr(p, "h", None) else 0.0
    lo, hi = _axis_extent(p)
    reach = 0.95 * min(b - lo, hi - b)
    last = None
    for _ in range(widen + 1):
        e = min(eps, reach)
        inner = np.linspace(e / 64, e, 64)
        left = _axis_values(p, b - inner)
        right = _axis_values(p, b + inner)
        outer = inner >= e / 2
        ok = True
        for side, vals in (("left", left), ("right", right)):
            nz = np.sign(vals[np.abs(vals) > thresh])
            if len(set(nz)) > 1:
                raise AmbiguousSign(f"v(x, 0) changes sign on the {side} of x={b:.4g} within {e:.3g}")
            if np.any(np.abs(vals[outer]) <= thresh):
                ok = False
                last = (side, vals[outer])
        if ok:
            sl, sr = np.sign(left[-1]), np.sign(right[-1])
            if sl < 0 < sr:
                return "increasing"
            if sl > 0 > sr:
                return "decreasing"
            return "maximum" if sl < 0 else "minimum"
        if e >= reach:
            break
        eps *= 2
    side, vals = last
    raise AmbiguousSign(f"|v(x, 0)| on the {side} of x={b:.4g} stays below {thresh:.3g} "
                        f"(values {np.array2string(vals[::16], precision=3)})")


def count_boundary_extrema(psi, n=None, flat_tol=1e-12, plateau_tol=1e-9):
    """Number ``l`` of local maxima (equal to the number of minima) of ``psi`` around the boundary.

    Slopes below ``plateau_tol`` times the range are treated as flat, so a
    plateau between a rise and a fall counts once.
    """
    n = max(len(psi.theta), 1024) if n is None else n
    if n < 256:
        raise ValueError("need at least 256 samples")
    theta = 2 * np.pi * np.arange(n) / n
    vals = np.asarray(psi(theta), dtype=float)
    spread = float(vals.max() - vals.min())
    if spread <= flat_tol * (1.0 + float(np.max(np.abs(vals)))):
        raise FlatBoundary("boundary function is constant")
    slope = np.roll(vals, -1) - vals
    signs = np.sign(np.where(np.abs(slope) <= plateau_tol * spread, 0.0, slope))
    signs = signs[signs != 0]
    changes = int(np.count_nonzero(signs != np.roll(signs, -1)))
    return changes // 2


@dataclass(frozen=True)
class BoundReport:
    total_k: int
    l: int
    n: int
    passed: bool
    multiplicities: tuple = ()
    parity_ok: Optional[bool] = None
    notes: list = field(default_factory=list)

    def as_dict(self):
        return {"sum_k": self.total_k, "l": self.l, "n": self.n, "passed": self.passed,
                "multiplicities": list(self.multiplicities), "parity_ok": self.parity_ok,
                "notes": list(self.notes)}


def check_bounds(records, l) -> BoundReport:
    """Checks ``sum k_i <= l - 1`` and positivity (and type parity for singularities)."""
    if isinstance(records, NonisolatedLine):
        return BoundReport(0, l, 0, False, notes=["nonisolated line: multiplicity undefined"])
    ks = tuple(int(r.k) for r in records)
    total = sum(ks)
    notes = []
    positive = all(k >= 1 for k in ks)
    if not positive:
        notes.append("non-positive multiplicity")
    parity = None
    if records and all(isinstance(r, SingularityRecord) for r in records):
        parity = all(r.parity_ok for r in records)
        if not parity:
            notes.append("type parity mismatch")
    passed = total <= l - 1 and positive and parity is not False
    return BoundReport(total, int(l), len(ks), passed, ks, parity, notes)
