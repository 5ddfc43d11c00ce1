"""Command-line front end: ``qbox <subcommand> ...``.

Structured data is JSON on stdin/stdout (or files); point clouds are CSV.
Errors in the input exit with status 3 and a message on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import certifier, gpmodel, moments, qmodel, region, truncation
from .seqcore import DEFAULT_TOL, InadmissibleTableError, ProbabilityTable, TableStructureError

EXIT_ERROR = 3
CERTIFY_EXIT = {certifier.CONSISTENT: 0, certifier.VIOLATION: 1, certifier.INCONCLUSIVE: 2}


class CLIError(Exception):
    pass


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, default=_default) + "\n"


def _read_json(path):
    name = "stdin" if path in (None, "-") else path
    try:
        if path in (None, "-"):
            text = sys.stdin.read()
        else:
            with open(path) as fh:
                text = fh.read()
        return json.loads(text)
    except OSError as exc:
        raise CLIError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CLIError(f"{name}: invalid JSON: {exc}") from exc


def _write(text: str, path=None):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _K(value):
    if value in (None, "auto"):
        return None
    try:
        k = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"K must be an integer or 'auto', got {value!r}")
    if k < 1:
        raise argparse.ArgumentTypeError("K must be >= 1")
    return k


def _tol(value):
    tol = float(value)
    if not tol > 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return tol


def _floats(text):
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args):
    if (args.model is None) == (args.atomic is None):
        raise CLIError("give exactly one of --model or --atomic")
    if args.atomic is not None:
        table = qmodel.atomic_to_table(qmodel.AtomicState.from_json(_read_json(args.atomic)), args.depth)
    else:
        model = qmodel.FiniteDimModel.from_json(_read_json(args.model))
        table = qmodel.simulate_table(model, args.depth)
    _write(dumps(table.to_json()), args.out)
    return 0


def cmd_certify(args):
    table = ProbabilityTable.from_json(_read_json(args.probs))
    verdict = certifier.certify(table, args.tol, args.K)
    report = verdict.to_json()
    if args.report:
        _write(dumps(report), args.report)
    print(verdict.status)
    for w in verdict.witnesses:
        print(f"  {w.check} at {json.dumps(w.indices, default=_default)}: "
              f"value {w.value:.6g}, bound {w.bound:.6g}, margin {w.margin:.3g}")
    return CERTIFY_EXIT[verdict.status]


def cmd_gp_check(args):
    table = ProbabilityTable.from_json(_read_json(args.probs))
    try:
        f = gpmodel.gp_from_table(table, args.tol)
    except InadmissibleTableError as exc:
        _write(dumps({"ok": False, "error": str(exc)}), args.report)
        return 1
    report = gpmodel.gp_verify(f, args.depth, args.exact_tol)
    _write(dumps(report.to_json()), args.report)
    return 0 if report.ok else 1


def cmd_region(args):
    p = region.RegionPoint(*args.point)
    if region.in_region_clauses(p, args.tol):
        x, y = region.anchor_point(p)
        print(f"MEMBER anchor {x!r} {y!r}")
        return 0
    print("NONMEMBER")
    return 1


def cmd_moments_convert(args):
    data = _read_json(args.input)
    if args.dir == "int2half":
        out = moments.half_from_int(moments.IntMomentTable.from_json(data), args.K)
    else:
        if args.anchor is None:
            raise CLIError("half2int needs --anchor MX00 MZ00")
        out = moments.int_from_half(moments.HalfMomentTable.from_json(data), tuple(args.anchor), args.K)
    _write(dumps(out.to_json()), args.out)
    return 0


def cmd_bernstein(args):
    if (args.moments is None) == (args.atomic is None):
        raise CLIError("give exactly one of --moments or --atomic")
    p = moments.MatrixPolynomial(args.p1, args.px, args.pz)
    out = {"n": args.n}
    if args.atomic is not None:
        state = qmodel.AtomicState.from_json(_read_json(args.atomic))
        m = moments.int_moments_of(state, args.n)
        p1, px, pz = p(state.ts)
        b = state.blochs
        out["exact"] = float(np.sum(state.weights * (p1 + px * b[:, 0] + pz * b[:, 2])))
    else:
        m = moments.IntMomentTable.from_json(_read_json(args.moments))
    out["rho_n"] = moments.bernstein_rho_n(m, p, args.n)
    if "exact" in out:
        out["error"] = abs(out["rho_n"] - out["exact"])
    _write(dumps(out))
    return 0


def cmd_scan(args):
    coords = [c.strip() for c in args.coords.split(",") if c.strip()]
    if args.grid:
        cloud = truncation.scan(coords, "grid", args.mixtures, args.seed, args.samples)
    else:
        cloud = truncation.scan(coords, "random", args.mixtures, args.seed, args.samples)
    hull = None
    if args.hull or args.svg:
        if len(coords) < 2:
            raise CLIError("hull and SVG output need at least two coordinates")
        hull = truncation.hull2d(cloud.rows[:, :2]) if args.hull else None
    csv_bytes = truncation.emit(cloud, format="csv")
    if args.out in (None, "-"):
        sys.stdout.write(csv_bytes.decode())
    else:
        with open(args.out, "wb") as fh:
            fh.write(csv_bytes)
    if args.svg:
        truncation.emit(cloud, hull, "svg", args.svg)
    if hull is not None:
        print(f"hull: {len(hull)} vertices", file=sys.stderr)
    return 0


def cmd_demo(args):
    report = qmodel.three_box_demo()
    if args.json:
        _write(dumps(report))
        return 0
    print(f"pre/post overlap |<psi_f|psi_i>|^2 = {report['overlap']:.6f}")
    for box in report["boxes"]:
        print(f"box {box['box']}: P(found | pre, post) = {box['probability']:.12f}")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qbox", description="Sequential two-measurement probability tables: "
                                     "simulation, quantum certification, moments and sampling.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="model or atomic state JSON -> probability table JSON")
    p.add_argument("--model", help="FiniteDimModel JSON file")
    p.add_argument("--atomic", help="AtomicState JSON file")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("certify", help="decide quantum realisability of a table")
    p.add_argument("--probs", default="-", help="probability table JSON (default stdin)")
    p.add_argument("--tol", type=_tol, default=DEFAULT_TOL)
    p.add_argument("--K", type=_K, default=None, help="series terms or 'auto'")
    p.add_argument("--report", help="write the full verdict JSON here")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("gp-check", help="verify the general-probabilistic model of a table")
    p.add_argument("--probs", default="-")
    p.add_argument("--depth", type=int)
    p.add_argument("--tol", type=_tol, default=DEFAULT_TOL, help="admissibility tolerance")
    p.add_argument("--exact-tol", type=_tol, default=1e-14, help="tolerance for the axiom checks")
    p.add_argument("--report", help="report file (default stdout)")
    p.set_defaults(func=cmd_gp_check)

    p = sub.add_parser("region", help="membership of a rectangle in the disc-meeting region")
    p.add_argument("--point", type=float, nargs=4, required=True, metavar=("X0", "Y0", "X1", "Y1"))
    p.add_argument("--tol", type=float, default=0.0)
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("moments", help="moment table utilities")
    msub = p.add_subparsers(dest="moments_command", required=True)
    c = msub.add_parser("convert", help="convert between integer and half-integer moment tables")
    c.add_argument("--dir", choices=("int2half", "half2int"), required=True)
    c.add_argument("--input", default="-")
    c.add_argument("--K", type=int, default=30)
    c.add_argument("--anchor", type=float, nargs=2, metavar=("MX00", "MZ00"))
    c.add_argument("--out")
    c.set_defaults(func=cmd_moments_convert)

    p = sub.add_parser("bernstein", help="Bernstein approximant of a matrix polynomial")
    p.add_argument("--moments", help="integer moment table JSON")
    p.add_argument("--atomic", help="AtomicState JSON; moments computed in closed form")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p1", type=_floats, default=(0.0,), help="coefficients, increasing powers")
    p.add_argument("--px", type=_floats, default=(0.0,))
    p.add_argument("--pz", type=_floats, default=(0.0,))
    p.set_defaults(func=cmd_bernstein)

    p = sub.add_parser("scan", help="sample quantum points in a finite projection")
    p.add_argument("--coords", required=True, help="e.g. a:00,b:01")
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mixtures", type=int, default=1)
    p.add_argument("--grid", action="store_true", help="use the fixed (t0, theta, lambda) grid")
    p.add_argument("--hull", action="store_true", help="compute the hull of the first two coordinates")
    p.add_argument("--out", help="CSV output (default stdout)")
    p.add_argument("--svg", help="optional SVG scatter")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("demo", help="worked examples")
    dsub = p.add_subparsers(dest="demo", required=True)
    d = dsub.add_parser("three-box", help="the three-box pre/post-selection example")
    d.add_argument("--json", action="store_true")
    d.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors, which would collide with INCONCLUSIVE
        return 0 if exc.code == 0 else EXIT_ERROR
    try:
        return args.func(args)
    except (CLIError, TableStructureError, InadmissibleTableError, qmodel.ModelError,
            region.InfeasibleRegionError, ValueError, KeyError, IndexError, TypeError) as exc:
        print(f"qbox: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
