"""Boundary data producing singular solutions with prescribed singularity structure.

Data even in y (cosine terms only) give solutions with u(x, 0) = 0, so
singular points are exactly the zeros of v(x, 0).  A one-parameter family is
bisected to the value where simple zeros of v(x, 0) coalesce at the origin,
producing a singularity of higher multiplicity.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .domain import BoundaryFunction
from .solver import SolutionTriple, SolveOptions, solve_continuation

# family: multiplicity -> (cos coefficients as a function of the parameter, bracket, zero count)
_FAMILIES = {
    2: (lambda A: (0.0, A, 0.0, 1.0), (-0.5, 0.0), 2),
    3: (lambda B: (0.0, 0.0, B, 0.0, 1.0), (-1.0, 0.0), 3),
}


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    phi: BoundaryFunction
    expected_k: Optional[int]
    param: Optional[float] = None
    solution: Optional[SolutionTriple] = None


def axis_sign_changes(sol):
    """Sign changes of ``v`` along the interior x-axis nodes (exact zeros skipped)."""
    g = sol.grid
    ax = g.axis_nodes[np.argsort(g.xy[g.axis_nodes, 0])]
    s = np.sign(sol.v.values[ax])
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def odd_data(domain):
    """``phi(x, -y) = -phi(x, y)``: sine terms only."""
    return BoundaryFunction.trig(domain, sin=(0.0, 1.0, 0.5, 0.3))


def simple_data(domain):
    """``cos 2 theta``: one increasing-type singularity of multiplicity 1 at the origin."""
    return BoundaryFunction.trig(domain, cos=(0.0, 0.0, 1.0))


def tuned(grid, k, opts=None, xtol=1e-6, max_iter=60) -> Scenario:
    """Bisect the family for multiplicity ``k`` (2 or 3) to the coalescence value.

    Returns the solution on the side where the simple zeros still exist, so
    they lie within a grid cell or two of each other and are read as one
    singularity.
    """
    if k == 1:
        phi = simple_data(grid.domain)
        return Scenario("simple", phi, 1, None, solve_continuation(grid, phi, opts))
    if k not in _FAMILIES:
        raise ValueError(f"no tuned family for multiplicity {k}")
    coeffs, (lo, hi), need = _FAMILIES[k]
    opts = opts or SolveOptions()

    def run(t):
        phi = BoundaryFunction.trig(grid.domain, cos=coeffs(t))
        sol = solve_continuation(grid, phi, opts)
        return phi, sol, axis_sign_changes(sol) >= need

    best = run(lo)
    if not best[2] or run(hi)[2]:
        raise ValueError(f"bracket [{lo}, {hi}] does not isolate the coalescence for k={k}")
    for _ in range(max_iter):
        if hi - lo <= xtol:
            break
        mid = 0.5 * (lo + hi)
        out = run(mid)
        if out[2]:
            lo, best = mid, out
        else:
            hi = mid
    phi, sol, _ = best
    return Scenario(f"tuned-k{k}", phi, k, lo, sol)
