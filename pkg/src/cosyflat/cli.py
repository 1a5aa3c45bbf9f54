"""Command line entry point: ``cosyflat verify | curvature | solve-ode``.

Exit status: 0 all checks pass, 1 some check failed, 2 bad configuration,
3 the structure could not be built.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .curvature import curvature_at
from .errors import BuildError, ConfigError, CosyflatError, LeftAdmissibleRegion
from .exprlang import GRAMMAR
from .ode import solve_t_ode
from .report import emit_jsonl, emit_summary, to_json
from .runner import CHECKS, build_structure, load_config, run

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_BUILD = 0, 1, 2, 3


def _point(text: str) -> tuple[float, float, float]:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        vals = ()
    if len(vals) != 3:
        raise argparse.ArgumentTypeError(f"expected x,y,z, got {text!r}")
    return vals


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cosyflat",
        description="Build almost cosymplectic structures on a chart and verify their identities.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="expression grammar for f, u and killing_field components:\n\n" + GRAMMAR,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser(
        "verify",
        help="sweep a grid and run residual checks",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="checks: " + ", ".join(CHECKS) + "\n\nexpression grammar:\n\n" + GRAMMAR,
    )
    v.add_argument("--config", required=True, help="JSON run configuration")
    v.add_argument("--output", help="jsonl destination (overrides the config; '-' for stdout)")
    v.add_argument("--summary-json", help="also write the summary object to this path")

    c = sub.add_parser("curvature", help="dump connection and curvature at one point as JSON")
    c.add_argument("--config", required=True)
    c.add_argument("--point", required=True, type=_point, help="x,y,z")

    o = sub.add_parser("solve-ode", help="integrate t'' = -kappa t^3/(2 C^2) and print samples as jsonl")
    o.add_argument("--kappa", type=float, required=True)
    o.add_argument("--C", type=float, required=True)
    o.add_argument("--D", type=float, required=True)
    o.add_argument("--t0", type=float, default=1.0)
    o.add_argument("--h", type=float, default=1e-3)
    o.add_argument("--z0", type=float, default=0.0)
    o.add_argument("--zmax", type=float, default=1.0)
    o.add_argument("--sign", type=int, choices=(1, -1), default=1)
    return parser


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_verify(args) -> int:
    config = load_config(args.config)
    result = run(config)
    out = args.output if args.output is not None else config.output
    _write(out, emit_jsonl(result.reports))
    summary = emit_summary(result.summary)
    # keep stdout pure jsonl when it carries the report
    (sys.stderr if out in (None, "-") else sys.stdout).write(summary)
    if args.summary_json:
        Path(args.summary_json).write_text(to_json(result.summary.as_dict()) + "\n")
    return EXIT_OK if result.passed else EXIT_CHECK


def cmd_curvature(args) -> int:
    config = load_config(args.config)
    S = build_structure(config)
    if not config.domain.admissible(args.point):
        raise ConfigError(f"point {args.point} lies outside the admissible domain")
    curv = curvature_at(S.metric, args.point)
    conn = curv.connection
    doc = {
        "point": list(args.point),
        "metric": conn.metric.value,
        "inverse": conn.inverse.value,
        "christoffel": conn.christoffel,
        "dchristoffel": conn.dchristoffel,
        "riemann": curv.riemann,
        "ricci": curv.ricci,
        "scalar": curv.scalar,
        "ricci_operator": curv.ricci_operator,
        "schouten": curv.schouten,
        "nabla_schouten": curv.nabla_schouten,
        "cotton": S.at(args.point).geometry.cotton.normalized,
    }
    sys.stdout.write(to_json(doc) + "\n")
    return EXIT_OK


def cmd_solve_ode(args) -> int:
    try:
        sol = solve_t_ode(args.kappa, args.C, args.D, args.t0, args.sign, (args.z0, args.zmax), args.h)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    except LeftAdmissibleRegion as exc:
        raise BuildError(str(exc)) from exc
    fi = sol.first_integral()
    lines = [
        to_json({"z": z, "t": t, "dt": dt, "first_integral": e})
        for z, t, dt, e in zip(sol.z, sol.t, sol.dt, fi)
    ]
    sys.stdout.write("\n".join(lines) + "\n")
    sys.stderr.write(f"{len(lines)} samples, first-integral drift {sol.drift():.3e}\n")
    return EXIT_OK


COMMANDS = {"verify": cmd_verify, "curvature": cmd_curvature, "solve-ode": cmd_solve_ode}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BuildError as exc:
        print(f"build error: {exc}", file=sys.stderr)
        return EXIT_BUILD
    except CosyflatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
