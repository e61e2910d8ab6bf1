"""Command-line entry point.

Exit codes: 0 all checks passed, 1 a check failed, 2 configuration error,
3 numerical failure.
"""

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import io
from .analysis import NonisolatedLine, check_bounds, count_boundary_extrema, find_singularities
from .clift import (build_fibration, check_disjointness, fibre_patch, fibre_sample, lift_mesh,
                    seam_continuity, sl_residual)
from .config import RunConfig, maybe_load
from .domain import build_grid
from .errors import AnalysisError, ConfigError, DomainError, FamilySolveError, SolverError, U1SlagError
from .solver import solve
from .validation import CHECKS, INJECTIONS, run_checks

log = logging.getLogger("u1slag")

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class Run:
    """Output directory plus the list of artifacts written into it."""

    def __init__(self, cfg: RunConfig, command):
        self.cfg = cfg
        self.command = command
        self.out = Path(cfg.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.artifacts = []
        self.t0 = time.time()

    def path(self, name):
        self.artifacts.append(name)
        return self.out / name

    def meta(self):
        return {"command": self.command, "config_hash": self.cfg.digest(), "config": self.cfg.as_dict()}

    def report(self, body, name="report.json"):
        rep = dict(body, meta=self.meta(), artifacts=sorted(set(self.artifacts)))
        io.write_json(self.path(name), rep)
        # wall-clock data stays out of the JSON so reruns are byte-identical
        with (self.out / "run.log").open("a") as fh:
            fh.write(f"{time.strftime('%Y-%m-%dT%H:%M:%S')} {self.command} {self.cfg.digest()} "
                     f"{time.time() - self.t0:.2f}s\n")
        return rep


def _config(args):
    cfg = maybe_load(args.config)
    over = {"h": args.h, "out": args.out, "theta_count": args.theta_count}
    if args.a is not None:
        over["a"] = float(args.a)
    cfg = cfg.replace(**over)
    if args.a_floor is not None:
        cfg = cfg.replace(solve=dict(cfg.solve, a_floor=args.a_floor))
    if getattr(args, "mode", None):
        cfg.fibration.mode = args.mode
    # re-run validation after overrides
    return RunConfig(**{k: getattr(cfg, k) for k in cfg.__dataclass_fields__})


def _solution_artifacts(run, sol, prefix=""):
    g = sol.grid
    for name in ("f", "u", "v"):
        io.write_field_csv(run.path(f"{prefix}{name}.csv"), g, getattr(sol, name))
    logd = dict(sol.log, a=sol.a, singular=sol.singular, h=g.h, n_interior=g.n_int, n_boundary=g.n_bnd)
    io.write_json(run.path(f"{prefix}convergence.json"), logd)
    return logd


def _setup(cfg):
    domain = cfg.make_domain()
    try:
        grid = build_grid(domain, cfg.h)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    return grid, cfg.make_phi(domain)


def cmd_validate(args):
    if args.list:
        for name, fn in CHECKS:
            print(name)
        return EXIT_OK
    results = run_checks(h=args.h or 0.05, inject=args.inject)
    failed = [r for r in results if not r[1]]
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    if failed:
        print(f"first failing check: {failed[0][0]}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def cmd_solve(args):
    cfg = _config(args)
    run = Run(cfg, "solve")
    grid, phi = _setup(cfg)
    try:
        sol = solve(grid, phi, cfg.a, cfg.options())
    except SolverError as exc:
        io.write_json(run.path("error.json"), {"error": type(exc).__name__, "message": str(exc),
                                               "log": getattr(exc, "log", None)})
        raise
    logd = _solution_artifacts(run, sol)
    run.report({"solve": {k: logd[k] for k in ("a", "singular", "h") if k in logd},
                "ladder": logd.get("ladder")}, "solve_report.json")
    print(f"solved a={cfg.a:g} on {grid.n_int} nodes -> {run.out}")
    return EXIT_OK


def analyze_solution(sol, phi):
    """Singularities (a = 0) and bound verdicts as a JSON-ready dict."""
    body = {"a": sol.a}
    psi = phi - phi.reflected()
    if not sol.singular:
        body["singularities"] = []
        body["note"] = "a != 0: solutions are nonsingular"
        return body, True
    res = find_singularities(sol.pair)
    if isinstance(res, NonisolatedLine):
        body["result"] = "NonisolatedLine"
        body["nonisolated_line"] = {"symmetry_error": res.symmetry_error, "v_axis_sup": res.v_axis_sup,
                                    "tolerance": res.tolerance}
        body["singularities"] = None
        return body, True
    l = count_boundary_extrema(psi)
    rep = check_bounds(res, l)
    body["result"] = "isolated"
    body["singularities"] = [{"location": list(r.location), "k": r.k, "type": r.type,
                              "parity_ok": r.parity_ok, "source": ["u.csv", "v.csv"]} for r in res]
    body["boundary_winding"] = res.boundary_winding
    body["l"] = l
    body["bounds"] = rep.as_dict()
    return body, rep.passed or not list(res)


def cmd_analyze(args):
    cfg = _config(args)
    run = Run(cfg, "analyze")
    grid, phi = _setup(cfg)
    sol = solve(grid, phi, cfg.a, cfg.options())
    _solution_artifacts(run, sol)
    body, ok = analyze_solution(sol, phi)
    run.report({"analysis": body, "passed": ok})
    print(f"analysis: {body.get('result', 'nonsingular')}, "
          f"{len(body['singularities'] or [])} singular point(s) -> {run.out}")
    return EXIT_OK if ok else EXIT_CHECK


def cmd_fibrate(args):
    cfg = _config(args)
    fc = cfg.fibration
    run = Run(cfg, "fibrate")
    if fc.mode == "explicit":
        return _fibrate_explicit(cfg, run)
    if not (fc.a_values and fc.b_values and fc.c_values):
        raise ConfigError("empty fibration parameter list")
    grid, phi = _setup(cfg)
    fam = build_fibration(grid, phi, fc.a_values, fc.b_values, fc.c_values, cfg.options())
    members = []
    for i, (alpha, sol) in enumerate(zip(fam.params, fam.solutions)):
        _solution_artifacts(run, sol, prefix=f"member{i:02d}_")
        members.append({"index": i, "alpha": list(alpha), "prefix": f"member{i:02d}_"})
        if args.theta_count:
            mesh = lift_mesh(sol, cfg.theta_count)
            io.write_obj(run.path(f"member{i:02d}.obj"), mesh)
            members[-1]["sl_residual"] = sl_residual(mesh).summary()
    rep = check_disjointness(fam)
    run.report({"members": members, "disjointness": rep.as_dict(), "passed": rep.passed})
    print(f"{len(fam)} members, disjointness {'pass' if rep.passed else 'FAIL'} -> {run.out}")
    return EXIT_OK if rep.passed else EXIT_CHECK


def _fibrate_explicit(cfg, run):
    fc = cfg.fibration
    if not fc.points:
        raise ConfigError("empty fibre point list")
    fibres = []
    rng = np.random.default_rng(cfg.seed)
    for i, (a, br, bi) in enumerate(fc.points):
        b = complex(br, bi)
        fibre_sample(a, b, fc.samples, rng=rng)
        patch = fibre_patch(a, b, np.linspace(0.0, fc.r_max, fc.radii), cfg.theta_count)
        io.write_obj(run.path(f"fibre{i:02d}.obj"), patch)
        io.write_patch_csv(run.path(f"fibre{i:02d}.csv"), patch)
        pts = patch.flat()
        cone = bool(np.any(np.all(np.abs(pts - np.array([0, 0, b])) == 0, axis=1)))
        fibres.append({"a": a, "b": b, "samples_round_trip": fc.samples, "contains_cone_point": cone,
                       "sl_residual": sl_residual(patch).summary(), "mesh": f"fibre{i:02d}.obj"})
    seam = seam_continuity(seed=cfg.seed)
    run.report({"fibres": fibres, "seam": seam.as_dict(), "passed": seam.passed})
    print(f"{len(fibres)} fibre(s), seam order {seam.order:.3f} -> {run.out}")
    return EXIT_OK if seam.passed else EXIT_CHECK


def cmd_export(args):
    cfg = _config(args)
    run = Run(cfg, "export")
    grid, phi = _setup(cfg)
    sol = solve(grid, phi, cfg.a, cfg.options())
    _solution_artifacts(run, sol)
    mesh = lift_mesh(sol, cfg.theta_count)
    io.write_obj(run.path("mesh.obj"), mesh)
    io.write_patch_csv(run.path("mesh.csv"), mesh)
    ev = sl_residual(mesh)
    run.report({"sl_residual": ev.summary()}, "export_report.json")
    print(f"lifted {grid.n_int} nodes x {cfg.theta_count} angles -> {run.out}")
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="u1slag", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", metavar="PATH")
        p.add_argument("--out", metavar="DIR")
        p.add_argument("--h", type=float)
        p.add_argument("--a", type=float)
        p.add_argument("--a-floor", type=float, dest="a_floor")
        p.add_argument("--theta-count", type=int, dest="theta_count")
        p.add_argument("--mode", choices=("family", "explicit"))
        return p

    p = common(sub.add_parser("validate", help="run the closed-form fixture suite"))
    p.add_argument("--list", action="store_true", help="print check names without running")
    p.add_argument("--inject", choices=INJECTIONS, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_validate)
    for name, fn, text in (("solve", cmd_solve, "solve the Dirichlet problem"),
                           ("analyze", cmd_analyze, "solve and locate singular points"),
                           ("fibrate", cmd_fibrate, "build a fibration family or explicit fibres"),
                           ("export", cmd_export, "lift a solution and write OBJ/CSV meshes")):
        p = common(sub.add_parser(name, help=text))
        p.add_argument("--list", action="store_true", help=argparse.SUPPRESS)
        p.set_defaults(func=fn)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, FamilySolveError, AnalysisError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except U1SlagError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
