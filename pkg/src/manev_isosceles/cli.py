"""Command-line entry point ``manev``.

Exit status: 0 on success, 1 on domain errors (invalid parameters, empty
windows, inconsistent starts, I/O failures), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import coords, homographic, manifold, sweep
from . import potentials as pot
from .dynamics import integrate
from .errors import IoFailure, ManevError
from .formatting import SCHEMA_VERSION, csv_text, dumps, jsonable
from .params import PARAM_KEYS, IntegrationSettings, resolve

TRAJECTORY_COLUMNS = ["sigma", "t_phys", "r", "v", "theta", "w", "residual"]
TRANSFORM_COLUMNS = ["R", "Z", "P_R", "P_Z", "C", "r", "v", "theta", "w", "h",
                     "residual", "residual_scale"]
START_SIZES = {"regularized": 4, "cylindrical": 4, "manifold": 3, "homographic": 2}


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _positive_int(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def _params_parent() -> argparse.ArgumentParser:
    par = argparse.ArgumentParser(add_help=False)
    g = par.add_argument_group("physical parameters (default: G=1 M=10 m=1 gamma0=1 gamma=3)")
    for k in PARAM_KEYS:
        g.add_argument(f"--{k}", type=float, default=None)
    g.add_argument("--config", help="JSON file with any of the five parameter keys")
    par.add_argument("--out", help="output file (default: stdout)")
    return par


def _settings_parent() -> argparse.ArgumentParser:
    par = argparse.ArgumentParser(add_help=False)
    g = par.add_argument_group("integration settings")
    d = IntegrationSettings()
    g.add_argument("--rtol", type=float, default=d.rel_tol)
    g.add_argument("--atol", type=float, default=d.abs_tol)
    g.add_argument("--theta-guard", type=float, default=d.theta_guard)
    g.add_argument("--r-floor", type=float, default=d.r_floor)
    g.add_argument("--escape-radius", type=float, default=d.escape_radius)
    g.add_argument("--max-steps", type=_positive_int, default=d.max_steps)
    return par


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="manev", description="Isosceles three-body problem with Manev interactions.")
    sub = ap.add_subparsers(dest="command", metavar="COMMAND")
    pp, sp = _params_parent(), _settings_parent()

    c = sub.add_parser("potentials", parents=[pp], help="tabulate the shape potentials")
    c.add_argument("--theta-grid", type=_positive_int, default=181, metavar="N")

    c = sub.add_parser("transform", parents=[pp], help="cylindrical CSV to McGehee CSV")
    c.add_argument("--input", default="-", help="CSV with columns R,Z,P_R,P_Z[,C] (default: stdin)")
    c.add_argument("--C", type=float, default=0.0, help="angular momentum for rows without a C column")
    c.add_argument("--h", type=float, default=None,
                   help="energy level for the residual (default: each row's own energy)")

    c = sub.add_parser("integrate", parents=[pp, sp], help="integrate one of the vector fields")
    c.add_argument("--field", required=True, choices=list(START_SIZES))
    c.add_argument("--start", required=True, type=_floats,
                   help="comma-separated start; use --start=-1,... for a leading minus")
    c.add_argument("--h", type=float, default=-1.0)
    c.add_argument("--C", type=float, default=0.0)
    c.add_argument("--sigma-max", type=float, required=True)
    c.add_argument("--solve-w", action="store_true", help="start omits w; solve it from the energy level")
    c.add_argument("--w-sign", type=float, default=1.0)

    c = sub.add_parser("classify", parents=[pp], help="topology of the collision manifold")
    c.add_argument("--C", type=float, required=True)

    c = sub.add_parser("equilibria", parents=[pp], help="equilibria and spectra on the collision manifold")
    c.add_argument("--C", type=float, required=True)
    c.add_argument("--h", type=float, default=-1.0)

    c = sub.add_parser("section", parents=[pp], help="level curve v = v0 of the collision manifold")
    c.add_argument("--v0", type=float, required=True)
    c.add_argument("--C", type=float, required=True)
    c.add_argument("-n", "--n", type=_positive_int, default=400)

    c = sub.add_parser("homographic", parents=[pp, sp], help="homographic motions at (h, C)")
    c.add_argument("--h", type=float, required=True)
    c.add_argument("--C", type=float, required=True)
    c.add_argument("--r-start", type=float, default=None)
    c.add_argument("--v-sign", type=float, default=1.0)
    c.add_argument("--orbit-csv", default=None, help="also write the orbit through r-start")
    c.add_argument("--sigma-max", type=float, default=None, help="orbit length (default: one period)")

    c = sub.add_parser("sweep", help="batch analyses over a parameter grid")
    c.add_argument("--config", required=True, help="sweep plan (JSON)")
    c.add_argument("--out", default=None, help="results CSV (default: the plan's 'out', else stdout)")
    c.add_argument("--workers", type=_positive_int, default=None)
    return ap


def _params(args):
    return resolve({k: getattr(args, k) for k in PARAM_KEYS}, args.config)


def _settings(args) -> IntegrationSettings:
    return IntegrationSettings(rel_tol=args.rtol, abs_tol=args.atol, theta_guard=args.theta_guard,
                               r_floor=args.r_floor, escape_radius=args.escape_radius,
                               max_steps=args.max_steps)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {out}: {exc}") from exc


def _report(payload: dict) -> str:
    return dumps({"schema_version": SCHEMA_VERSION, **payload})


# --- subcommands ------------------------------------------------------------------

def cmd_potentials(args) -> str:
    p = _params(args)
    return csv_text(["theta", "V", "W", "U", "dV", "dW", "dU"], pot.table(p, args.theta_grid))


def cmd_transform(args) -> str:
    p = _params(args)
    try:
        text = sys.stdin.read() if args.input == "-" else Path(args.input).read_text()
    except OSError as exc:
        raise IoFailure(f"cannot read {args.input}: {exc}") from exc
    reader = csv.DictReader(line for line in io.StringIO(text) if not line.startswith("#"))
    missing = {"R", "Z", "P_R", "P_Z"} - set(reader.fieldnames or ())
    if missing:
        raise ManevError(f"input CSV lacks columns {sorted(missing)}")
    rows = []
    for n, rec in enumerate(reader, start=1):
        try:
            vals = [float(rec[k]) for k in ("R", "Z", "P_R", "P_Z")]
            C = float(rec["C"]) if rec.get("C") not in (None, "") else args.C
        except ValueError as exc:
            raise ManevError(f"row {n}: {exc}") from None
        st = coords.CylState(*vals, C)
        try:
            m = coords.to_mcgehee(p, st)
            h = coords.reduced_energy(p, st) if args.h is None else args.h
        except ManevError as exc:
            raise type(exc)(f"row {n}: {exc}") from None
        rows.append([*vals, C, m.r, m.v, m.theta, m.w, h,
                     coords.energy_residual(p, m, h, C), coords.residual_scale(p, m, h, C)])
    return csv_text(TRANSFORM_COLUMNS, rows)


def cmd_integrate(args) -> str:
    p = _params(args)
    start = list(args.start)
    need = START_SIZES[args.field] - (1 if args.solve_w else 0)
    if args.solve_w and args.field not in ("regularized", "manifold"):
        raise ManevError("--solve-w applies to the regularized and manifold fields only")
    if len(start) != need:
        raise ManevError(f"--start for the {args.field} field needs {need} values, got {len(start)}")
    if args.solve_w:
        r, v, th = (start if args.field == "regularized" else [0.0, *start])
        w = coords.solve_w(p, r, v, th, args.h, args.C, args.w_sign)
        start = [*start, w]
    if args.field == "cylindrical":
        start = coords.CylState(*start, args.C)
    tr = integrate(p, args.field, start, args.h, args.C, args.sigma_max, _settings(args))
    footer = jsonable({
        "schema_version": SCHEMA_VERSION, "field": args.field, "h": tr.h, "C": args.C,
        "termination": tr.termination, "message": tr.message or None,
        "max_residual": tr.max_residual, "residual_scale": tr.residual_scale,
        "max_relative_residual": tr.max_relative_residual, "samples": len(tr),
    })
    return csv_text(TRAJECTORY_COLUMNS, tr.table()) + "# " + json.dumps(footer) + "\n"


def cmd_classify(args) -> str:
    p = _params(args)
    rep = manifold.classify(p, args.C)
    return _report({"C": args.C, "class": rep.cls,
                    "thresholds": {"lower": rep.lower, "upper": rep.upper}})


def _equilibrium_entry(p, eq, h, C) -> dict:
    if eq.location is None:
        return {"kind": eq.kind, "location": None,
                "note": "lines of degenerate equilibria at theta = +-pi/2"}
    rep = manifold.restricted_spectrum(p, eq, h, C)
    return {"kind": eq.kind, "location": dict(zip(("r", "v", "theta", "w"), eq.location)),
            "spectrum_closed": rep.spectrum_closed, "spectrum_numeric": rep.spectrum_numeric,
            "manifold_dims": dict(zip(("unstable", "stable", "center"), rep.manifold_dims)),
            "lambda1_numeric": rep.lambda1_numeric, "lambda1_forms": rep.lambda1_forms,
            "lambda1_match": rep.lambda1_match, "max_deviation": rep.max_deviation,
            "notes": rep.notes}


def cmd_equilibria(args) -> str:
    p = _params(args)
    eqs = manifold.equilibria(p, args.C)
    payload = {"C": args.C, "h": args.h,
               "n_interior": sum(e.location is not None for e in eqs),
               "equilibria": [_equilibrium_entry(p, e, args.h, args.C) for e in eqs]}
    if math.isclose(abs(args.C), manifold.thresholds(p)[1], rel_tol=manifold.EDGE_RTOL):
        sp = manifold.special_point_spectrum(p, args.h)
        payload["merged_point"] = {"spectrum_closed": sp.spectrum_closed,
                                   "spectrum_numeric": sp.spectrum_numeric,
                                   "max_deviation": sp.max_deviation}
    return _report(payload)


def cmd_section(args) -> str:
    p = _params(args)
    return csv_text(["theta", "w"], manifold.section_curve(p, args.v0, args.C, args.n))


def cmd_homographic(args) -> str:
    p = _params(args)
    st = _settings(args)
    rep = homographic.analyze(p, args.h, args.C, settings=st)
    payload = jsonable(rep)
    payload["classification"] = rep.classification.value
    if args.r_start is not None and rep.classification is homographic.HomographicClass.PERIODIC:
        per = homographic.find_period(p, args.h, args.C, args.r_start, args.v_sign, st)
        payload["period_from_r_start"] = {"r_start": args.r_start, "sigma": per.sigma_period,
                                          "t": per.t_period, "closure": per.closure}
    if args.orbit_csv:
        r0 = args.r_start if args.r_start is not None else rep.r_range[0]
        tr = homographic.orbit(p, args.h, args.C, r0, args.v_sign, args.sigma_max, st)
        _emit(csv_text(TRAJECTORY_COLUMNS, tr.table()), args.orbit_csv)
    return _report(payload)


def cmd_sweep(args) -> str | None:
    defaults = resolve().as_dict()
    plan = sweep.load_plan(args.config, defaults)
    out = args.out or plan.out
    recs = sweep.run_sweep(plan, out, args.workers)
    if out is None:
        return sweep.table_text(plan, {int(r["index"]): {k: r[k] for k in sweep.COLUMNS[1:]} for r in recs})
    return None


COMMANDS = {
    "potentials": cmd_potentials, "transform": cmd_transform, "integrate": cmd_integrate,
    "classify": cmd_classify, "equilibria": cmd_equilibria, "section": cmd_section,
    "homographic": cmd_homographic, "sweep": cmd_sweep,
}


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        ap.print_usage(sys.stderr)
        return 2
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        ap.print_usage(sys.stderr)
        return 2
    try:
        with np.errstate(all="ignore"):
            text = COMMANDS[args.command](args)
        if text is not None:
            _emit(text, getattr(args, "out", None) if args.command != "sweep" else None)
    except ManevError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
