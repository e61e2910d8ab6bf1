"""Dirichlet solver for the potential equation and the a -> 0+ continuation.

The unknown is the potential ``f`` on interior nodes; boundary slots hold the
Dirichlet data.  At fixed ``a != 0`` the discrete equation

    (f_x^2 + y^2 + a^2)^(-1/2) f_xx + 2 f_yy = 0

is solved by damped Newton with a sparse direct factorization.  Singular
(``a = 0``) solutions are never solved for directly: a geometric ladder of
``a`` values is walked down to ``a_floor`` with warm starts, and the C1
increments between rungs are logged as evidence of convergence.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .calculus import GridField, PairField, operators, potential_coefficient
from .domain import BoundaryFunction, Grid
from .errors import FamilySolveError, NewtonDiverged, NotCauchy, SingularParameter

log = logging.getLogger(__name__)

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SolveOptions:
    newton_tol: float = 1e-10
    max_newton_iters: int = 50
    max_halvings: int = 20
    factor: float = 0.5
    a_start: float = 1.0
    a_floor: float = 1e-4
    cauchy_tol: float = 1e-5
    cauchy_slack: float = 1.5

    def __post_init__(self):
        for name in ("newton_tol", "max_newton_iters", "factor", "a_start", "a_floor",
                     "cauchy_tol", "cauchy_slack"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_halvings < 0:
            raise ValueError("max_halvings must be non-negative")
        if not self.factor < 1:
            raise ValueError("continuation factor must be below 1")
        if not self.a_floor < self.a_start * self.factor:
            raise ValueError("a_floor must lie below the first continuation step")

    def ladder(self):
        """Continuation values ``a_start * factor**k`` down to, and ending at, ``a_floor``."""
        out = []
        a = self.a_start
        while a > self.a_floor * (1 + 1e-12):
            out.append(a)
            a *= self.factor
        out.append(self.a_floor)
        return out


@dataclass(frozen=True, eq=False)
class SolutionTriple:
    grid: Grid
    f: GridField
    u: GridField
    v: GridField
    a: float
    phi: BoundaryFunction
    log: dict = field(default_factory=dict)
    singular: bool = False

    @property
    def pair(self):
        """``(u, v)`` as a pair; singular solutions are reported at ``a = 0``."""
        return PairField(self.u, self.v, 0.0 if self.singular else self.a, self.singular)


def boundary_values(grid, phi):
    return np.asarray(phi.at(grid.bxy[:, 0], grid.bxy[:, 1]), dtype=float)


class _Problem:
    """Interior-restricted operators and the nonlinear residual for one grid."""

    def __init__(self, grid, a):
        ops = operators(grid)
        n = grid.n_int
        self.grid, self.a = grid, float(a)
        self.dx_all, self.dy_all = ops.dx, ops.dy
        self.dx = ops.dx[:n]
        self.dxx = ops.dxx[:n]
        self.dyy = ops.dyy[:n]
        self.y = grid.xy[:, 1]

    def parts(self, full):
        fx = self.dx @ full
        c, dc = potential_coefficient(fx, self.y, self.a, self.grid.h)
        return fx, c, dc

    def residual(self, full):
        _, c, _ = self.parts(full)
        return c * (self.dxx @ full) + 2.0 * (self.dyy @ full)

    def jacobian(self, full):
        n = self.grid.n_int
        _, c, dc = self.parts(full)
        fxx = self.dxx @ full
        J = sp.diags(c) @ self.dxx + sp.diags(fxx * dc) @ self.dx + 2.0 * self.dyy
        return J[:, :n].tocsc()

    def floor(self, full):
        # attainable residual given roundoff in second differences
        _, c, _ = self.parts(full)
        scale = float(np.max(c)) + 2.0
        return 64 * _EPS * scale * (1.0 + np.max(np.abs(full))) / self.grid.h**2


def _frozen_guess(grid, a, bvals):
    ops = operators(grid)
    n = grid.n_int
    L = ((1.0 + a * a) ** -0.5 * ops.dxx[:n] + 2.0 * ops.dyy[:n]).tocsc()
    rhs = -(L[:, n:] @ bvals)
    return spla.splu(L[:, :n]).solve(rhs)


def _newton(prob, full, opts, tol, record):
    n = prob.grid.n_int
    R = prob.residual(full)
    res = float(np.max(np.abs(R)))
    record.append(res)
    for it in range(opts.max_newton_iters):
        if res <= tol:
            return full, res, "tol"
        try:
            step = spla.splu(prob.jacobian(full)).solve(-R)
        except RuntimeError as exc:
            raise NewtonDiverged(f"singular Newton matrix at iteration {it}") from exc
        t = 1.0
        for _ in range(opts.max_halvings + 1):
            trial = full.copy()
            trial[:n] += t * step
            Rt = prob.residual(trial)
            rt = float(np.max(np.abs(Rt))) if np.all(np.isfinite(Rt)) else np.inf
            if rt < res:
                break
            t *= 0.5
        else:
            if res <= max(tol, prob.floor(full)):
                return full, res, "roundoff"
            raise NewtonDiverged(f"residual {res:.3e} not reduced after "
                                 f"{opts.max_halvings} halvings (iteration {it})")
        full, R, res = trial, Rt, rt
        record.append(res)
        if np.max(np.abs(t * step)) <= 4 * _EPS * (1.0 + np.max(np.abs(full))) and \
                res <= max(tol, prob.floor(full)):
            return full, res, "roundoff"
    if res <= max(tol, prob.floor(full)):
        return full, res, "roundoff" if res > tol else "tol"
    raise NewtonDiverged(f"no convergence in {opts.max_newton_iters} iterations "
                         f"(residual {res:.3e})")


def _assemble(grid, full, a, phi, logd, singular=False):
    ops = operators(grid)
    f = GridField(grid, full)
    u = GridField(grid, ops.dy @ full)
    v = GridField(grid, ops.dx @ full)
    return SolutionTriple(grid, f, u, v, float(a), phi, logd, singular)


def solve_dirichlet_fixed_a(grid, phi, a, opts=None, initial_guess=None) -> SolutionTriple:
    """Newton solve of the Dirichlet problem at a fixed nonzero ``a``."""
    opts = opts or SolveOptions()
    a = float(a)
    if a == 0:
        raise SingularParameter("a = 0 is reached by solve_continuation, not solved directly")
    bvals = boundary_values(grid, phi)
    tol = opts.newton_tol * (1.0 + phi.sup())
    prob = _Problem(grid, a)
    full = np.empty(grid.n)
    full[grid.n_int:] = bvals
    record = []
    if initial_guess is not None:
        guess = initial_guess.values if isinstance(initial_guess, GridField) else initial_guess
        full[: grid.n_int] = np.asarray(guess, dtype=float)[: grid.n_int]
        full, res, how = _newton(prob, full, opts, tol, record)
        start = "warm"
    else:
        try:
            full[: grid.n_int] = _frozen_guess(grid, a, bvals)
            full, res, how = _newton(prob, full, opts, tol, record)
            start = "frozen"
        except NewtonDiverged:
            log.info("frozen-coefficient start failed at a=%g, retrying from zero", a)
            full[: grid.n_int] = 0.0
            record.clear()
            full, res, how = _newton(prob, full, opts, tol, record)
            start = "zero"
    logd = {"a": a, "newton_residuals": record, "iterations": len(record) - 1,
            "final_residual": res, "stop": how, "start": start, "tol": tol}
    log.debug("a=%g: %d Newton steps, residual %.3e (%s)", a, len(record) - 1, res, how)
    return _assemble(grid, full, a, phi, logd)


def c1_increment(s1, s2):
    """``||f' - f||_inf + ||grad f' - grad f||_inf`` over all slots."""
    df = np.max(np.abs(s1.f.values - s2.f.values))
    dg = max(np.max(np.abs(s1.u.values - s2.u.values)), np.max(np.abs(s1.v.values - s2.v.values)))
    return float(df + dg)


def solve_continuation(grid, phi, opts=None) -> SolutionTriple:
    """Walk ``a`` down the geometric ladder; the ``a_floor`` solve is the singular solution."""
    opts = opts or SolveOptions()
    ladder = opts.ladder()
    steps = []
    prev = None
    increments = []
    for a in ladder:
        sol = solve_dirichlet_fixed_a(grid, phi, a, opts,
                                      initial_guess=None if prev is None else prev.f)
        steps.append({k: sol.log[k] for k in ("a", "iterations", "final_residual", "stop")})
        if prev is not None:
            increments.append(c1_increment(prev, sol))
        prev = sol
    for k in range(1, len(increments)):
        # increments below the Cauchy tolerance count as converged, whatever their order
        if increments[k] > opts.cauchy_slack * increments[k - 1] and increments[k] > opts.cauchy_tol:
            raise NotCauchy(f"C1 increment grew from {increments[k - 1]:.3e} to "
                            f"{increments[k]:.3e} at a={ladder[k + 1]:g}")
    logd = dict(prev.log)
    logd.update(ladder=ladder, steps=steps, increments=increments)
    return replace(prev, log=logd, singular=True)


def solve(grid, phi, a, opts=None):
    """Fixed-``a`` solve for ``a != 0``, continuation for ``a == 0``."""
    if a == 0:
        return solve_continuation(grid, phi, opts)
    return solve_dirichlet_fixed_a(grid, phi, a, opts)


def solve_family(grid, family, params, opts=None, workers: Optional[int] = None):
    """Solve every member of a boundary-data family.

    ``family(param)`` returns the boundary function for ``param``, whose first
    entry is ``a``.  Results keep the order of ``params``.  Failed members do
    not stop the batch; a :class:`FamilySolveError` carrying the partial
    results is raised at the end.
    """
    params = list(params)

    def one(param):
        try:
            return solve(grid, family(param), float(param[0]), opts), None
        except Exception as exc:  # aggregated below
            return None, exc

    if workers and workers > 1 and len(params) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(one, params))
    else:
        out = [one(p) for p in params]
    results = [r for r, _ in out]
    errors = {i: e for i, (_, e) in enumerate(out) if e is not None}
    if errors:
        raise FamilySolveError(results, errors)
    return results
