"""Lifting planar pairs (u, v) to U(1)-invariant 3-folds in C^3 and checking the SL conditions.

A point (x, y) of the plane with orbit angle theta maps to

    z1 = r1 exp(i (theta + chi)),  z2 = r2 exp(-i theta),  z3 = x + i u,

where r1^2 - r2^2 = 2a, r1 r2 = |v + iy| and chi = arg(v + iy), so that
z1 z2 = v + iy.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateFrame


@dataclass(frozen=True)
class C3Point:
    z1: complex
    z2: complex
    z3: complex

    def __post_init__(self):
        if not all(np.isfinite(complex(z)) for z in (self.z1, self.z2, self.z3)):
            raise ValueError("C3Point coordinates must be finite")

    def as_array(self):
        return np.array([self.z1, self.z2, self.z3], dtype=complex)

    def rotate(self, sigma):
        """The U(1) action ``(e^{i s} z1, e^{-i s} z2, z3)``."""
        return C3Point(np.exp(1j * sigma) * self.z1, np.exp(-1j * sigma) * self.z2, self.z3)


def lift_radii(a, v, y):
    """``(r1, r2)`` with ``r1^2 - r2^2 = 2a`` and ``r1 r2 = |v + iy|``.

    The larger square is computed as ``|a| + sqrt(a^2 + rho^2)`` and the
    smaller as ``rho^2`` over it, which avoids cancellation.
    """
    a = np.asarray(a, dtype=float)
    rho2 = np.asarray(v, dtype=float) ** 2 + np.asarray(y, dtype=float) ** 2
    big = np.abs(a) + np.sqrt(a * a + rho2)
    with np.errstate(invalid="ignore", divide="ignore"):
        small = np.where(big > 0, rho2 / np.where(big > 0, big, 1.0), 0.0)
    r1sq = np.where(a >= 0, big, small)
    r2sq = np.where(a >= 0, small, big)
    r1, r2 = np.sqrt(r1sq), np.sqrt(r2sq)
    if r1.ndim == 0:
        return float(r1), float(r2)
    return r1, r2


def lift_arrays(x, y, u, v, a, theta):
    """Vectorized lift; returns ``(z1, z2, z3)`` broadcast over all inputs."""
    x, y, u, v, theta = np.broadcast_arrays(*(np.asarray(t, dtype=float) for t in (x, y, u, v, theta)))
    r1, r2 = lift_radii(a, v, y)
    # np.angle(0) == 0 gives the chi = 0 gauge on the degenerate orbit
    chi = np.angle(v + 1j * y)
    z1 = r1 * np.exp(1j * (theta + chi))
    z2 = r2 * np.exp(-1j * theta)
    z3 = x + 1j * u
    return z1, z2, z3


def mesh_angles(a, v, y, theta):
    """Orbit angles at which a mesh samples each node.

    For a > 0 the zeros of v + iy are points where r2 = 0 but r1 does not
    vanish, and chi winds around them, so samples at fixed theta jump there.
    Sampling at theta - chi instead gives z1 = r1 e^{i theta},
    z2 = r2 e^{i (chi - theta)}, which is smooth; every sample is still an
    exact lift.  For a <= 0 the phase already sits on a vanishing radius.
    """
    if a > 0:
        return theta - np.angle(np.asarray(v) + 1j * np.asarray(y))
    return theta + 0 * np.asarray(v)


def lift_point(x, y, u_val, v_val, a, theta) -> C3Point:
    z1, z2, z3 = lift_arrays(x, y, u_val, v_val, a, theta)
    p = C3Point(complex(z1), complex(z2), complex(z3))
    if abs(p.z1 * p.z2) > 0:
        err = abs(p.z1 * p.z2 - complex(v_val, y))
        assert err <= 1e-12 * (1 + abs(complex(v_val, y))), err
    return p


@dataclass(frozen=True, eq=False)
class MeshPatch:
    """Structured samples of a 3-fold: ``points[i, j, k] = (z1, z2, z3)``.

    Axis ``d`` is sampled with spacing ``steps[d]``; ``periodic[d]`` marks an
    angle axis that wraps around.  Missing samples are NaN.
    """

    points: np.ndarray
    steps: tuple
    periodic: tuple = (False, False, True)
    axes: tuple = ()
    meta: dict = field(default_factory=dict)

    @property
    def shape(self):
        return self.points.shape[:3]

    @property
    def valid(self):
        return np.all(np.isfinite(self.points), axis=-1)

    def flat(self):
        """All valid samples, shape ``(m, 3)``."""
        return self.points[self.valid]

    def moment(self):
        pts = self.flat()
        return np.abs(pts[:, 0]) ** 2 - np.abs(pts[:, 1]) ** 2


def lift_mesh(sol, theta_count=16):
    """Lift every interior node of a solution (or pair) at ``theta_count`` orbit angles."""
    if theta_count < 8:
        raise ValueError("theta_count must be at least 8")
    pair = sol.pair if hasattr(sol, "pair") else sol
    grid = pair.grid
    ij = grid.ij
    i0, j0 = ij.min(axis=0)
    nx, ny = ij.max(axis=0) - ij.min(axis=0) + 1
    thetas = 2 * np.pi * np.arange(theta_count) / theta_count
    n = grid.n_int
    x, y = grid.xy[:, 0], grid.xy[:, 1]
    u, v = pair.u.values[:n], pair.v.values[:n]
    ang = mesh_angles(pair.a, v[:, None], y[:n, None], thetas[None, :])
    z1, z2, z3 = lift_arrays(x[:n, None], y[:n, None], u[:, None], v[:, None], pair.a, ang)
    pts = np.full((nx, ny, theta_count, 3), np.nan + 0j)
    ii, jj = ij[:, 0] - i0, ij[:, 1] - j0
    pts[ii, jj, :, 0] = z1
    pts[ii, jj, :, 1] = z2
    pts[ii, jj, :, 2] = z3
    axes = ((np.arange(nx) + i0) * grid.h, (np.arange(ny) + j0) * grid.h, thetas)
    meta = {"a": float(pair.a), "h": grid.h, "theta_count": theta_count,
            "solution": getattr(sol, "log", {}).get("a", None)}
    return MeshPatch(pts, (grid.h, grid.h, 2 * np.pi / theta_count), (False, False, True), axes, meta)


def lift_functions(u_fn, v_fn, a, xs, ys, theta_count=16, keep=None):
    """Lift closed-form ``u, v`` on the tensor lattice ``xs x ys``; ``keep(x, y)`` masks samples."""
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    thetas = 2 * np.pi * np.arange(theta_count) / theta_count
    X, Y, T = np.meshgrid(xs, ys, thetas, indexing="ij")
    V = v_fn(X, Y)
    z1, z2, z3 = lift_arrays(X, Y, u_fn(X, Y), V, a, mesh_angles(a, V, Y, T))
    pts = np.stack([z1, z2, z3], axis=-1)
    if keep is not None:
        pts[~keep(X, Y)] = np.nan
    steps = (xs[1] - xs[0], ys[1] - ys[0], 2 * np.pi / theta_count)
    return MeshPatch(pts, steps, (False, False, True), (xs, ys, thetas), {"a": float(a)})


def _tangents(patch):
    P = patch.points
    T = []
    for d in range(3):
        if patch.periodic[d]:
            fwd, bwd = np.roll(P, -1, axis=d), np.roll(P, 1, axis=d)
        else:
            fwd = np.full_like(P, np.nan)
            bwd = np.full_like(P, np.nan)
            sl_in = [slice(None)] * 4
            sl_out = [slice(None)] * 4
            sl_in[d], sl_out[d] = slice(2, None), slice(1, -1)
            fwd[tuple(sl_out)] = P[tuple(sl_in)]
            sl_in[d] = slice(None, -2)
            bwd[tuple(sl_out)] = P[tuple(sl_in)]
        T.append((fwd - bwd) / (2 * patch.steps[d]))
    return T


def omega(X, Y):
    """Kahler form ``sum_j Im(conj(X_j) Y_j)`` on complex 3-vectors (last axis)."""
    return np.sum(np.imag(np.conj(X) * Y), axis=-1)


def _area(X, Y):
    xx = np.sum(np.abs(X) ** 2, -1)
    yy = np.sum(np.abs(Y) ** 2, -1)
    xy = np.sum(np.real(np.conj(X) * Y), -1)
    return np.sqrt(np.maximum(xx * yy - xy * xy, 0.0))


def frame_forms(t1, t2, t3):
    """Normalized ``|omega(ti, tj)|`` (three pairs) and ``|Im Omega(t1, t2, t3)|`` per frame.

    Returns ``(om, im, vol)``; frames with vol below 1e-14 give NaN.
    """
    M = np.stack([t1, t2, t3], axis=-2)
    G = np.real(np.einsum("...ak,...bk->...ab", np.conj(M), M))
    vol = np.sqrt(np.maximum(np.linalg.det(G), 0.0))
    with np.errstate(invalid="ignore", divide="ignore"):
        om = np.stack([np.abs(omega(t1, t2)) / _area(t1, t2), np.abs(omega(t1, t3)) / _area(t1, t3),
                       np.abs(omega(t2, t3)) / _area(t2, t3)], axis=-1)
        im = np.abs(np.imag(np.linalg.det(M))) / vol
    bad = ~(vol >= 1e-14)
    om[bad] = np.nan
    im = np.where(bad, np.nan, im)
    return om, im, vol


@dataclass(frozen=True)
class CalibrationEval:
    omega: np.ndarray
    im_omega: np.ndarray
    n_samples: int
    n_degenerate: int

    @property
    def max_omega(self):
        return float(np.max(self.omega)) if self.omega.size else 0.0

    @property
    def mean_omega(self):
        return float(np.mean(self.omega)) if self.omega.size else 0.0

    @property
    def max_im(self):
        return float(np.max(self.im_omega)) if self.im_omega.size else 0.0

    @property
    def mean_im(self):
        return float(np.mean(self.im_omega)) if self.im_omega.size else 0.0

    @property
    def max_residual(self):
        return max(self.max_omega, self.max_im)

    def summary(self):
        return {"max_omega": self.max_omega, "mean_omega": self.mean_omega, "max_im_Omega": self.max_im,
                "mean_im_Omega": self.mean_im, "samples": self.n_samples, "degenerate": self.n_degenerate}


def sl_residual(patch: MeshPatch, keep=None) -> CalibrationEval:
    """Pullbacks of omega and Im Omega to centred-difference tangent frames of a patch.

    Frames whose Gram volume is below 1e-14 (for instance on an orbit that
    collapses to a point) are skipped and counted.  ``keep`` optionally
    restricts evaluation to a boolean mask over the patch lattice.
    """
    t1, t2, t3 = _tangents(patch)
    ok = np.all(np.isfinite(t1) & np.isfinite(t2) & np.isfinite(t3), axis=-1)
    if keep is not None:
        ok &= keep
    om, im, vol = frame_forms(t1[ok], t2[ok], t3[ok])
    degenerate = ~np.isfinite(im)
    return CalibrationEval(om[~degenerate], im[~degenerate], int(ok.sum()), int(degenerate.sum()))


def frame_check(t1, t2, t3):
    """Single frame; raises :class:`DegenerateFrame` when it spans less than a 3-plane."""
    om, im, vol = frame_forms(*(np.asarray(t, complex)[None] for t in (t1, t2, t3)))
    if not vol[0] >= 1e-14:
        raise DegenerateFrame(f"frame volume {vol[0]:.3g}")
    return om[0], float(im[0])


def plane_patch(e1, e2, e3, n=5, step=0.1):
    """Patch sampling the real span of three complex 3-vectors (a flat test 3-plane)."""
    e = [np.asarray(v, dtype=complex) for v in (e1, e2, e3)]
    s = step * (np.arange(n) - n // 2)
    A, B, C = np.meshgrid(s, s, s, indexing="ij")
    pts = A[..., None] * e[0] + B[..., None] * e[1] + C[..., None] * e[2]
    return MeshPatch(pts, (step, step, step), (False, False, False), (s, s, s), {})
