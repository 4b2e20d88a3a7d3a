"""Command line interface.

Subcommands: trace, squares, sosc, conserve, constants, experiment, render.
Exit codes: 0 ok, 1 invalid input, 2 theorem-floor violation (FAILED run),
3 resolution insufficient.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import conservation, corner_trace, curve, harness, sosc, square_finder, svg
from .errors import InvalidInputError, ResolutionInsufficientError

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_FLOOR = 2
EXIT_RESOLUTION = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InvalidInputError(message)


def _write(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_input(path: str):
    """Load a curve-pair or polyline JSON file, detected by its keys."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from exc
    if isinstance(data, dict) and "points" in data:
        return sosc.polyline_from_dict(data)
    return curve.pair_from_dict(data)


def _require_pair(obj):
    if not isinstance(obj, curve.LipschitzPair):
        raise InvalidInputError("this subcommand needs a curve-pair JSON input")
    return obj


def _require_polyline(obj):
    if not isinstance(obj, sosc.ParametricPolyline):
        raise InvalidInputError("this subcommand needs a polyline JSON input")
    return obj


def cmd_trace(args) -> int:
    pair = _require_pair(_load_input(args.input))
    tr = corner_trace.trace(pair, args.grid, args.family, args.tol)
    if args.format == "csv":
        _write(corner_trace.trace_to_csv(tr), args.out)
    else:
        q = tr.q_points
        payload = {
            "family": tr.family,
            "t": tr.grid.tolist(),
            "u": tr.u.tolist(),
            "a": tr.a.tolist(),
            "b": tr.b.tolist(),
            "Q": q.tolist(),
        }
        _write(json.dumps(payload, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_squares(args) -> int:
    pair = _require_pair(_load_input(args.input))
    families = tuple(int(f) for f in args.families.split(","))
    squares = square_finder.find_squares(pair, args.grid, families, args.tol)
    payload = square_finder.squares_to_json(squares)
    if args.format == "csv":
        lines = ["family,t,sidelength,ratio"]
        for s in squares:
            lines.append(f"{s.family},{s.t!r},{s.sidelength!r},{s.sidelength / pair.M!r}")
        _write("\n".join(lines) + "\n", args.out)
    else:
        _write(json.dumps(payload, indent=2) + "\n", args.out)
    if not squares:
        print("no squares found at this resolution", file=sys.stderr)
        return EXIT_RESOLUTION
    return EXIT_OK


def cmd_sosc(args) -> int:
    poly = _require_polyline(_load_input(args.input))
    if args.squares:
        squares = sosc.inscribed_squares_general(poly, args.anchors, args.tol)
        _write(json.dumps(square_finder.squares_to_json(squares), indent=2) + "\n", args.out)
        if not squares:
            print("no inscribed squares found at this resolution", file=sys.stderr)
            return EXIT_RESOLUTION
        return EXIT_OK
    cloud = sosc.sosc_cloud(poly, args.anchors)
    if args.format == "json":
        payload = {
            "n_anchors": cloud.n_anchors,
            "t_index": cloud.t_index.tolist(),
            "u_index": cloud.u_index.tolist(),
            "Q": cloud.q.tolist(),
        }
        _write(json.dumps(payload, indent=2) + "\n", args.out)
    else:
        _write(sosc.cloud_to_csv(cloud), args.out)
    if len(cloud) == 0:
        return EXIT_RESOLUTION
    return EXIT_OK


def cmd_conserve(args) -> int:
    pair = _require_pair(_load_input(args.input))
    tr = corner_trace.trace(pair, args.grid, 1)
    t_lo = args.t if args.t is not None else pair.T0 + 0.25 * (pair.T1 - pair.T0)
    t_hi = args.tp if args.tp is not None else pair.T0 + 0.75 * (pair.T1 - pair.T0)
    quad = conservation.quadruple_from_trace(tr, t_lo, t_hi)
    payload = {
        "t": t_lo,
        "t_prime": t_hi,
        "grid": args.grid,
        "M": pair.M,
        "conservation_residual": conservation.conservation_residual(quad),
        "graph_identity_residual": conservation.lem2_residual(pair, tr, t_lo, t_hi),
    }
    _write(json.dumps(payload, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_constants(args) -> int:
    if args.rho_steps == 1:
        rhos = [args.rho_min]
    else:
        rhos = np.linspace(args.rho_min, args.rho_max, args.rho_steps).tolist()
    if args.b_steps == 1:
        bs = [args.b_min]
    else:
        bs = np.linspace(args.b_min, args.b_max, args.b_steps).tolist()
    rows = conservation.constants_table(rhos, bs)
    if args.format == "json":
        _write(json.dumps(rows, indent=2) + "\n", args.out)
    else:
        lines = ["rho,B,D,F,G,cond1,cond2,feasible"]
        for r in rows:
            lines.append(
                f"{r['rho']!r},{r['B']!r},{r['D']!r},{r['F']!r},{r['G']!r},"
                f"{r['cond1']!r},{r['cond2']!r},{int(r['feasible'])}"
            )
        _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_experiment(args) -> int:
    config = harness.ExperimentConfig(
        seed=args.seed,
        trials=args.trials,
        depth=args.depth,
        lip=args.lip,
        epsilon=args.epsilon,
        grid_n=args.grid,
        tol=args.tol,
    )
    report = harness.run_experiment(config)
    text = report.to_csv() if args.format == "csv" else report.to_json() + "\n"
    _write(text, args.out)
    print(
        f"status={report.status} trials={config.trials} min_ratio={report.min_ratio:.6f} "
        f"below_half={report.below_half_count}",
        file=sys.stderr,
    )
    return EXIT_FLOOR if report.status == "FAILED" else EXIT_OK


def cmd_render(args) -> int:
    obj = _load_input(args.input)
    kwargs = {}
    if isinstance(obj, curve.LipschitzPair):
        kwargs["pair"] = obj
        if args.families:
            fams = tuple(int(f) for f in args.families.split(","))
            kwargs["traces"] = [corner_trace.trace(obj, args.grid, f) for f in fams]
        if args.squares:
            kwargs["squares"] = square_finder.find_squares(obj, args.grid)
    else:
        kwargs["polyline"] = obj
        if args.cloud:
            kwargs["cloud"] = sosc.sosc_cloud(obj, args.anchors)
        if args.squares:
            kwargs["squares"] = sosc.inscribed_squares_general(obj, args.anchors, args.tol)
    svg.emit_svg(args.out, **kwargs)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="squarepeg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt_default="csv"):
        p.add_argument("--input", required=True, help="input JSON file (curve pair or polyline)")
        p.add_argument("--grid", type=int, default=8193, help="grid resolution")
        p.add_argument("--tol", type=float, default=1e-9, help="refinement tolerance")
        p.add_argument("--out", default=None, help="output path (stdout when omitted)")
        p.add_argument("--format", choices=("csv", "json"), default=fmt_default)

    p = sub.add_parser("trace", help="trace a corner-curve family to CSV/JSON")
    common(p)
    p.add_argument("--family", type=int, default=1, choices=(1, 2, 3, 4))
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("squares", help="find inscribed squares of a graph pair")
    common(p, fmt_default="json")
    p.add_argument("--families", default="1,2,3,4")
    p.set_defaults(func=cmd_squares)

    p = sub.add_parser("sosc", help="sample the opposite-square-corner cloud of a polyline")
    common(p)
    p.add_argument("--anchors", type=int, default=256)
    p.add_argument("--squares", action="store_true", help="emit inscribed squares instead of the cloud")
    p.set_defaults(func=cmd_sosc)

    p = sub.add_parser("conserve", help="conservation/graph identity residuals on a window")
    common(p, fmt_default="json")
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--tp", type=float, default=None)
    p.set_defaults(func=cmd_conserve)

    p = sub.add_parser("constants", help="feasibility table for the universal constant")
    p.add_argument("--rho-min", type=float, default=0.001)
    p.add_argument("--rho-max", type=float, default=0.12)
    p.add_argument("--rho-steps", type=int, default=24)
    p.add_argument("--b-min", type=float, default=4.0)
    p.add_argument("--b-max", type=float, default=4.0)
    p.add_argument("--b-steps", type=int, default=1)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("experiment", help="randomized inscribed-square experiment")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--lip", type=float, default=0.99)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--grid", type=int, default=8193)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("render", help="render an SVG figure")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--grid", type=int, default=4097)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--anchors", type=int, default=256)
    p.add_argument("--families", default="", help="comma list of trace families to draw")
    p.add_argument("--squares", action="store_true")
    p.add_argument("--cloud", action="store_true")
    p.set_defaults(func=cmd_render)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ResolutionInsufficientError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOLUTION


if __name__ == "__main__":
    raise SystemExit(main())
