"""Singular solutions with prescribed multiplicity, their singular points and the counting bound."""

import argparse

from u1slag.analysis import check_bounds, count_boundary_extrema, find_singularities
from u1slag.domain import build_grid, unit_disc
from u1slag.scenarios import tuned


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--h", type=float, default=0.05)
    ap.add_argument("--k", type=int, nargs="+", default=[1, 2, 3])
    args = ap.parse_args()
    g = build_grid(unit_disc(), args.h)
    for k in args.k:
        sc = tuned(g, k)
        recs = find_singularities(sc.solution.pair)
        l = count_boundary_extrema(sc.phi - sc.phi.reflected())
        rep = check_bounds(recs, l)
        param = "" if sc.param is None else f" (parameter {sc.param:.6f})"
        print(f"{sc.name}{param}: l={l}, bound {'ok' if rep.passed else 'VIOLATED'}")
        for r in recs:
            print(f"  x={r.location[0]:+.4f}  k={r.k}  type={r.type}  parity {'ok' if r.parity_ok else 'bad'}")


if __name__ == "__main__":
    main()
