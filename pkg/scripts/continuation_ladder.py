"""C^1 increments of the continuation a -> 0 for several boundary data."""

import argparse

from u1slag.domain import BoundaryFunction, build_grid, unit_disc
from u1slag.solver import SolveOptions, solve_continuation

DATA = {
    "cos2": dict(cos=(0.0, 0.0, 1.0)),
    "cos2+sin2": dict(cos=(0.0, 0.0, 1.0), sin=(0.0, 0.0, 0.4)),
    "odd": dict(sin=(0.0, 1.0, 0.5, 0.3)),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--h", type=float, default=0.05)
    ap.add_argument("--a-floor", type=float, default=1e-4)
    args = ap.parse_args()
    g = build_grid(unit_disc(), args.h)
    for name, coeffs in DATA.items():
        sol = solve_continuation(g, BoundaryFunction.trig(g.domain, **coeffs), SolveOptions(a_floor=args.a_floor))
        print(f"{name}:")
        for a, inc in zip(sol.log["ladder"][1:], sol.log["increments"]):
            print(f"  a={a:<10.4g} increment={inc:.3e}")


if __name__ == "__main__":
    main()
