"""Command-line front end.

Every command prints a short summary on stdout.  File outputs are either CSV
(15 significant digits) with a ``<output>.json`` metadata sidecar, or a single
JSON document holding both data and metadata.  Exit status: 0 on success, 1
when a solver does not converge, 2 on bad arguments or I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from importlib import metadata as _metadata
from pathlib import Path
from typing import Sequence

import numpy as np

from . import continuation, elsolver, hessian, model, perturbation

EXIT_OK, EXIT_NONCONVERGED, EXIT_USAGE = 0, 1, 2


class NonConvergence(RuntimeError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits with 2 by default; keep it but raise instead
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _version() -> str:
    try:
        return _metadata.version("artifact")
    except _metadata.PackageNotFoundError:
        return "unknown"


def _clean(obj):
    """Make numpy scalars/arrays JSON-serialisable and map non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _dump_json(obj, path: Path) -> None:
    # float repr is the shortest string that round-trips, i.e. at most 17 digits
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    v = float(v)
    return "nan" if math.isnan(v) else f"{v:.15g}"


def _write_table(
    path: Path, header: list[str], rows: list[list], fmt: str, meta: dict
) -> Path | None:
    """Write rows as CSV plus sidecar, or as one JSON document. Returns the sidecar path."""
    if fmt == "json":
        _dump_json({"metadata": meta, "columns": header, "rows": rows}, path)
        return None
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    side = path.with_name(path.name + ".json")
    _dump_json(meta, side)
    return side


def _meta(args: argparse.Namespace, **extra) -> dict:
    params = {k: v for k, v in vars(args).items() if k != "func"}
    return {"command": args.command, "parameters": params, "version": _version(), **extra}


def _solver_meta() -> dict:
    return {
        "slope_mesh": {"n": 64, "lo": 0.05, "hi": 50.0,
                       "identity_offsets": list(elsolver.IDENTITY_OFFSETS)},
        "eps": elsolver.EPS,
        "rtol": elsolver.RTOL,
        "atol": elsolver.ATOL,
        "polish_rtol": elsolver.POLISH_RTOL,
        "polish_atol": elsolver.POLISH_ATOL,
        "quadrature": {"nodes": model.DEFAULT_QUAD_NODES, "order": model.DEFAULT_QUAD_ORDER},
    }


def _lowest(L: float, Q: int, tol: float, grid: int) -> elsolver.ShootingResult:
    sols = elsolver.solve_bvp(L, Q, tol, grid_size=grid)
    if not sols:
        raise NonConvergence(f"no solution with charge {Q} found at L={L} (tol={tol})")
    return min(sols, key=lambda r: (r.energy, r.slope0))


def _skyrmion(L: float, tol: float, grid: int) -> elsolver.ShootingResult:
    sols = [r for r in elsolver.solve_bvp(L, 1, tol, grid_size=grid)
            if abs(r.slope0 - 1) > continuation.IDENTITY_SLOPE_TOL]
    if not sols:
        raise NonConvergence(f"no skyrmion found at L={L}")
    return min(sols, key=lambda r: (r.energy, r.slope0))


# ---------------------------------------------------------------------------
# commands


def cmd_solve(args) -> int:
    r = _lowest(args.radius, args.charge, args.tol, args.grid)
    p = r.profile
    summary = {
        "L": r.L, "Q": r.charge, "slope0": r.slope0,
        "residual_norm": r.residual_norm, "energy": r.energy,
    }
    meta = _meta(args, result=summary, right_slope=r.right_slope,
                 identity_energy=model.identity_energy(r.L), solver=_solver_meta())
    out = Path(args.output)
    _write_table(out, ["psi", "F"], [[a, b] for a, b in zip(p.psi, p.F)], args.format, meta)
    print(f"L={r.L:.15g} Q={r.charge} slope0={r.slope0:.15g} "
          f"energy={r.energy:.15g} residual={r.residual_norm:.3g}")
    print(f"identity energy {model.identity_energy(r.L):.15g}; profile -> {out}")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    if args.about == "identity":
        about, label = None, "identity"
    else:
        about, label = _skyrmion(args.radius, args.tol, args.grid).profile, "skyrmion"
    K = max(args.basis, args.modes + 8)
    res = hessian.spectrum(about, args.radius, K=K, n_modes=args.modes, method=args.method, label=label)
    rows = []
    for n, lam in enumerate(res.eigenvalues):
        if label == "identity":
            ref = hessian.analytic_lambda(n, args.radius)
            rows.append([n, lam, ref, abs(lam - ref)])
        else:
            rows.append([n, lam, math.nan, math.nan])
    meta = _meta(args, basis_size=K, background=label)
    if args.output:
        _write_table(Path(args.output), ["n", "lambda", "analytic_lambda", "abs_error"], rows, args.format, meta)
    if args.eigenvectors:
        hessian.write_eigenvectors_csv(res, args.eigenvectors)
    for n, lam, ref, _ in rows:
        tail = f"  (closed form {ref:.15g})" if label == "identity" else ""
        print(f"lambda_{n} = {lam:.15g}{tail}")
    return EXIT_OK


def cmd_branch(args) -> int:
    table = continuation.sweep(args.radius_min, args.radius_max, args.steps, tol=args.tol,
                               K=args.basis, grid_size=args.grid, refine=not args.no_refine,
                               workers=args.workers)
    meta = _meta(args, sweep=table.metadata, solver=_solver_meta())
    header = ["L", "branch", "slope0", "energy", "lambda0", "x_meas"]
    rows = [[p.L, p.branch, p.slope0, p.energy, p.lambda0, p.x_meas] for p in table.points]
    out = Path(args.output)
    if args.format == "csv":
        out.write_text(table.to_csv())
        _dump_json(meta, out.with_name(out.name + ".json"))
    else:
        _write_table(out, header, rows, "json", meta)
    counts = {b: len(table.branch(b)) for b in continuation.BRANCH_ORDER}
    print(f"{len(table.radii())} radii, " + ", ".join(f"{k}: {v}" for k, v in counts.items() if v))
    if table.metadata["failures"]:
        print(f"failures: {table.metadata['failures']}")
    print(f"branch table -> {out}")
    return EXIT_OK


def cmd_critical(args) -> int:
    res = continuation.critical_radius(tol=args.tol, K=args.basis)
    closed = continuation.critical_radius_closed_form()
    print(f"critical radius (numerical spectrum) {res.numerical:.12f}")
    print(f"critical radius (closed form)        {closed:.12f}")
    print(f"analytic sqrt(2)                     {res.analytic:.12f}")
    if args.output:
        meta = _meta(args, iterations=res.iterations)
        _write_table(Path(args.output), ["numerical", "closed_form", "analytic"],
                     [[res.numerical, closed, res.analytic]], args.format, meta)
    return EXIT_OK


def cmd_perturb(args) -> int:
    rows = []
    for x in np.linspace(0.0, args.amplitude_max, args.steps):
        x = float(x)
        L_ad = perturbation.radius_from_amplitude(x, "adopted")
        L_lit = perturbation.radius_from_amplitude(x, "literal")
        L = L_ad if args.relation == "adopted" else L_lit
        e_series = perturbation.perturbative_energy(x, guard=math.inf)
        e_num, x_meas = math.nan, math.nan
        sols = elsolver.solve_bvp(L, 1, args.tol, grid_size=args.grid)
        if x == 0.0:
            ident = [r for r in sols if abs(r.slope0 - 1) <= continuation.IDENTITY_SLOPE_TOL]
            if ident:
                e_num, x_meas = ident[0].energy, perturbation.measure_amplitude(ident[0].profile)
        else:
            best = None
            for r in sols:
                if abs(r.slope0 - 1) <= continuation.IDENTITY_SLOPE_TOL:
                    continue
                xm = perturbation.measure_amplitude(r.profile)
                if xm > 0 and (best is None or abs(xm - x) < abs(best[1] - x)):
                    best = (r, xm)
            if best is not None:
                e_num, x_meas = best[0].energy, best[1]
        rows.append([x, L_ad, L_lit, e_series, e_num, x_meas])
    meta = _meta(args, solver=_solver_meta(),
                 note="energy_numeric and x_meas come from the positive-amplitude skyrmion "
                      "solved at the radius given by --relation; nan where none exists")
    out = Path(args.output)
    _write_table(out, ["x", "L_adopted", "L_literal", "energy_series", "energy_numeric", "x_meas"],
                 rows, args.format, meta)
    for x, _, _, es, en, xm in rows:
        print(f"x={x:.4f}  E_series={es:.10g}  E_numeric={en:.10g}  x_meas={xm:.6g}")
    print(f"table -> {out}")
    return EXIT_OK


def cmd_energy(args) -> int:
    if args.input:
        p = model.read_profile_csv(args.input)
    else:
        p = model.identity_profile(args.grid)
    e = model.energy(p, args.radius)
    print(f"sigma term  {e.sigma_term:.15g}")
    print(f"Skyrme term {e.skyrme_term:.15g}")
    print(f"total       {e.total:.15g}")
    print(f"identity    {model.identity_energy(args.radius):.15g}")
    if args.output:
        meta = _meta(args, charge=p.charge)
        _write_table(Path(args.output), ["sigma_term", "skyrme_term", "total"],
                     [[e.sigma_term, e.skyrme_term, e.total]], args.format, meta)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _positive(s: str) -> float:
    v = float(s)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {s}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="skyrme-s3", description="Hedgehog skyrmions on the three-sphere.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, output=None):
        p.add_argument("--output", default=output, help="output file")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    def solver(p):
        p.add_argument("--tol", type=_positive, default=elsolver.DEFAULT_TOL,
                       help="maximum interior residual of an accepted solution")
        p.add_argument("--grid", type=int, default=elsolver.DEFAULT_GRID,
                       help="number of output nodes on [0, pi]")

    p = sub.add_parser("solve", help="solve the hedgehog boundary-value problem")
    p.add_argument("--radius", type=_positive, required=True)
    p.add_argument("--charge", type=int, default=1)
    solver(p)
    common(p, "profile.csv")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("spectrum", help="second-variation spectrum")
    p.add_argument("--radius", type=_positive, required=True)
    p.add_argument("--modes", type=int, default=8)
    p.add_argument("--method", choices=("galerkin", "fd"), default="galerkin")
    p.add_argument("--about", choices=("identity", "skyrmion"), default="identity")
    p.add_argument("--basis", type=int, default=64, help="number of sine modes")
    p.add_argument("--eigenvectors", default=None, help="also write sine coefficients here")
    solver(p)
    common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("branch", help="sweep the radius and classify Q=1 solutions")
    p.add_argument("--radius-min", type=_positive, required=True)
    p.add_argument("--radius-max", type=_positive, required=True)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--basis", type=int, default=64)
    p.add_argument("--no-refine", action="store_true", help="skip the near-critical samples")
    p.add_argument("--workers", type=int, default=1)
    solver(p)
    common(p, "branch.csv")
    p.set_defaults(func=cmd_branch)

    p = sub.add_parser("critical", help="locate the critical radius")
    p.add_argument("--tol", type=_positive, default=1e-10)
    p.add_argument("--basis", type=int, default=16)
    common(p)
    p.set_defaults(func=cmd_critical)

    p = sub.add_parser("perturb", help="small-amplitude series against numerics")
    p.add_argument("--relation", choices=("adopted", "literal"), default="adopted")
    p.add_argument("--amplitude-max", type=_positive, default=0.3)
    p.add_argument("--steps", type=int, default=7)
    solver(p)
    common(p, "perturb.csv")
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("energy", help="energy of a profile (identity by default)")
    p.add_argument("--radius", type=_positive, required=True)
    p.add_argument("--input", default=None, help="profile CSV with header psi,F")
    p.add_argument("--grid", type=int, default=elsolver.DEFAULT_GRID)
    common(p)
    p.set_defaults(func=cmd_energy)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except NonConvergence as exc:
        print(f"not converged: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except RuntimeError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())
