"""The explicit piecewise-smooth fibration of C^3 and families built from boundary data.

F(z1, z2, z3) = (a, b) with 2a = |z1|^2 - |z2|^2 and

    b = z3                          if a = z1 = z2 = 0,
    b = z3 + conj(z1 z2) / |z1|     if a >= 0 and z1 != 0,
    b = z3 + conj(z1 z2) / |z2|     if a < 0.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..domain import BoundaryFunction
from ..errors import ExtremumConditionFailed, RoundTripFailed
from ..solver import solve_family
from ..analysis.singular import count_boundary_extrema
from .examples import sampler_hl_arrays
from .lift import C3Point, lift_arrays


def _fibration_arrays(z1, z2, z3):
    z1, z2, z3 = np.broadcast_arrays(*(np.asarray(z, complex) for z in (z1, z2, z3)))
    m1, m2 = np.abs(z1), np.abs(z2)
    a = 0.5 * (m1 * m1 - m2 * m2)
    cz = np.conj(z1 * z2)
    with np.errstate(invalid="ignore", divide="ignore"):
        b = np.where(a >= 0, z3 + cz / np.where(m1 > 0, m1, 1.0), z3 + cz / np.where(m2 > 0, m2, 1.0))
    # a >= 0 with z1 = 0 forces z2 = 0: the cone-point case
    b = np.where((a >= 0) & (m1 == 0), z3, b)
    return a, b


def fibration_map_explicit(p, z2=None, z3=None):
    """``(a, b)`` for a :class:`C3Point`, or arrays ``(a, b)`` for coordinate arrays ``z1, z2, z3``."""
    if isinstance(p, C3Point):
        a, b = _fibration_arrays(p.z1, p.z2, p.z3)
        return float(a), complex(b)
    return _fibration_arrays(p, z2, z3)


def _sample_params(n, r_max, rng):
    # low-discrepancy lattice in (r, theta2, theta3); the first sample is r = 0
    k = np.arange(n)
    g1, g2 = 0.7548776662466927, 0.5698402909980532
    r = r_max * k / max(n - 1, 1)
    t2 = 2 * np.pi * ((k * g1) % 1.0)
    t3 = 2 * np.pi * ((k * g2) % 1.0)
    if rng is not None:
        t2 = t2 + rng.uniform(0, 2 * np.pi / n, n)
        t3 = t3 + rng.uniform(0, 2 * np.pi / n, n)
    return r, t2, t3


def fibre_arrays(a, b, r, t2, t3):
    """Fibre points ``F^{-1}(a, b)`` from level-``|a|`` sampler coordinates.

    With ``(w1, w2, w3)`` the sampler output, ``conj(w1 w2) / |w1| = w3``, so
    ``(w1, w2, b - w3)`` lies over ``(a, b)`` for ``a >= 0`` and
    ``(w2, w1, b - w3)`` lies over ``(a, b)`` for ``a < 0``.
    """
    w1, w2, w3 = sampler_hl_arrays(abs(a), r, t2, t3)
    if a >= 0:
        return w1, w2, b - w3
    return w2, w1, b - w3


def fibre_sample(a, b, n=64, r_max=2.0, rng=None, tol=1e-10):
    """``n`` points on the fibre over ``(a, b)``; the first one is at ``r = 0``.

    For ``a = 0`` that point is the cone point ``(0, 0, b)``.  Every point is
    mapped back through :func:`fibration_map_explicit` and must return
    ``(a, b)`` to ``tol``.
    """
    if n < 8:
        raise ValueError("n must be at least 8")
    b = complex(b)
    z1, z2, z3 = fibre_arrays(a, b, *_sample_params(n, r_max, rng))
    fa, fb = _fibration_arrays(z1, z2, z3)
    err_a = float(np.max(np.abs(fa - a)))
    err_b = float(np.max(np.abs(fb - b)))
    if err_a > tol * (1 + abs(a)) or err_b > tol * (1 + abs(b) + r_max):
        raise RoundTripFailed(f"fibre over (a={a}, b={b}): |da|={err_a:.3g}, |db|={err_b:.3g}")
    return [C3Point(complex(p), complex(q), complex(s)) for p, q, s in zip(z1, z2, z3)]


def fibre_patch(a, b, r_values, n_theta=16):
    """Structured fibre patch over ``(r, theta2, theta3)`` for SL residual checks."""
    from .lift import MeshPatch

    r = np.asarray(r_values, float)
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    R, T2, T3 = np.meshgrid(r, th, th, indexing="ij")
    pts = np.stack(fibre_arrays(a, complex(b), R, T2, T3), axis=-1)
    step = 2 * np.pi / n_theta
    return MeshPatch(pts, (r[1] - r[0], step, step), (False, True, True), (r, th, th),
                     {"a": float(a), "b": complex(b)})


@dataclass(frozen=True)
class SeamReport:
    gaps: tuple
    discrepancy: tuple
    order: float
    passed: bool

    def as_dict(self):
        return {"gaps": list(self.gaps), "discrepancy": list(self.discrepancy),
                "order": self.order, "passed": self.passed}


def seam_continuity(ks=range(2, 7), n_pairs=64, seed=0, min_order=1.0):
    """F on point pairs straddling ``|z1| = |z2|`` with relative gap ``10^-k``.

    Each pair shares phases and ``z3``; one member has ``|z1|`` larger by the
    gap, the other ``|z2|``.  The discrepancy is the largest ``|dF|`` over the
    pairs and its log-log slope against the gap is the observed order.
    """
    rng = np.random.default_rng(seed)
    rho = rng.uniform(0.2, 2.0, n_pairs)
    p1, p2 = rng.uniform(0, 2 * np.pi, (2, n_pairs))
    z3 = rng.normal(size=n_pairs) + 1j * rng.normal(size=n_pairs)
    gaps, disc = [], []
    for k in ks:
        g = 10.0 ** (-k)
        e1, e2 = np.exp(1j * p1), np.exp(1j * p2)
        a_hi, b_hi = _fibration_arrays(rho * (1 + g) * e1, rho * e2, z3)
        a_lo, b_lo = _fibration_arrays(rho * e1, rho * (1 + g) * e2, z3)
        gaps.append(g)
        disc.append(float(np.max(np.hypot(a_hi - a_lo, np.abs(b_hi - b_lo)))))
    order = float(np.polyfit(np.log(gaps), np.log(disc), 1)[0])
    mono = all(d2 < d1 for d1, d2 in zip(disc, disc[1:]))
    return SeamReport(tuple(gaps), tuple(disc), order, bool(mono and order >= min_order))


@dataclass(frozen=True, eq=False)
class FibrationFamily:
    grid: object
    phi: BoundaryFunction
    params: tuple
    solutions: tuple

    def Phi(self, alpha):
        """Boundary data ``phi + b x + c y`` of member ``alpha = (a, b, c)``."""
        _, b, c = alpha
        return self.phi.plus_linear(b, c)

    def __len__(self):
        return len(self.params)


def _check_extrema(phi, params):
    for (i, p), (j, q) in itertools.combinations(enumerate(params), 2):
        if p[0] != q[0]:
            continue
        db, dc = p[1] - q[1], p[2] - q[2]
        if db == 0 and dc == 0:
            raise ExtremumConditionFailed(f"members {i} and {j} coincide: {p}")
        diff = BoundaryFunction.trace(phi.domain, lambda x, y, db=db, dc=dc: db * x + dc * y)
        l = count_boundary_extrema(diff)
        if l != 1:
            raise ExtremumConditionFailed(f"members {i} and {j}: Phi difference has l={l}")


def build_fibration(grid, phi, a_values=(), b_values=(), c_values=(), opts=None, workers=None,
                    members=None) -> FibrationFamily:
    """Solve every member ``(a, b, c)`` of the product of the parameter lists.

    ``members`` gives explicit triples instead of the product.
    """
    if members is None:
        members = itertools.product(a_values, b_values, c_values)
    params = tuple((float(a), float(b), float(c)) for a, b, c in members)
    if not params:
        raise ValueError("empty parameter list")
    _check_extrema(phi, params)
    sols = solve_family(grid, lambda p: phi.plus_linear(p[1], p[2]), params, opts, workers)
    return FibrationFamily(grid, phi, params, tuple(sols))


@dataclass
class DisjointnessReport:
    pairs: list = field(default_factory=list)
    floor: float = 0.0

    @property
    def passed(self):
        return all(p["passed"] for p in self.pairs)

    def as_dict(self):
        return {"passed": self.passed, "floor": self.floor, "pairs": self.pairs}


def _moment_samples(sol, count):
    g = sol.grid
    n = g.n_int
    idx = np.unique(np.linspace(0, n - 1, min(count, n)).astype(int))
    pair = sol.pair
    x, y = g.xy[idx, 0], g.xy[idx, 1]
    th = np.linspace(0, 2 * np.pi, 8, endpoint=False)
    z1, z2, _ = lift_arrays(x[:, None], y[:, None], pair.u.values[idx, None], pair.v.values[idx, None],
                            pair.a, th[None, :])
    return 0.5 * (np.abs(z1) ** 2 - np.abs(z2) ** 2)


def check_disjointness(fam: FibrationFamily, sample_count=200, floor=None) -> DisjointnessReport:
    """Pairwise separation of family members.

    Different ``a``: the moment map of lifted samples, which must reproduce
    ``a`` to 1e-10, so the members sit on disjoint level sets.  Equal ``a``:
    the smallest ``|(u, v) - (u', v')|`` over all grid slots, which must
    exceed ``floor`` (default ``max(1e-3, h^2)``).
    """
    h = fam.grid.h
    floor = max(1e-3, h * h) if floor is None else floor
    rep = DisjointnessReport(floor=floor)
    moments = [_moment_samples(s, sample_count) for s in fam.solutions]
    for i, j in itertools.combinations(range(len(fam)), 2):
        (a1, *_), (a2, *_) = fam.params[i], fam.params[j]
        if a1 != a2:
            dev = max(float(np.max(np.abs(moments[i] - a1))), float(np.max(np.abs(moments[j] - a2))))
            sep = float(np.min(np.abs(moments[i].ravel()[:, None] - moments[j].ravel()[None, :])))
            rep.pairs.append({"i": i, "j": j, "kind": "moment", "separation": 2 * sep,
                              "expected": 2 * abs(a1 - a2), "moment_error": dev,
                              "passed": dev <= 1e-10 * (1 + abs(a1) + abs(a2)) and sep > 0})
        else:
            s1, s2 = fam.solutions[i], fam.solutions[j]
            d = np.hypot(s1.u.values - s2.u.values, s1.v.values - s2.v.values)
            m = float(np.min(d))
            rep.pairs.append({"i": i, "j": j, "kind": "pair", "min_difference": m,
                              "passed": m > floor})
    return rep
