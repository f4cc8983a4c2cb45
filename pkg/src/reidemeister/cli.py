"""Command-line front end.

Subcommands: rnumber, spectrum, decide, tables, oracle.  Results go to
stdout wrapped in an envelope (result payload, derivation trace, tool
version, search bound); diagnostics go to stderr.  Exit codes: 0 for a
decided result, 2 when a bounded search ends undecided, 1 on input
errors.  The environment variable TWISTED_BOUND overrides the default
search bound; --bound overrides both.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .exactlin import IntMatrix, MatrixParseError, parse_matrix, parse_vector
from .groups import (
    AutomorphismSpec,
    FreeAbelian,
    Heisenberg,
    HeisenbergTimesZ,
    HnSemidirectZ,
    Z2MinusIExt,
    ZnSemidirectZ,
    label_classes,
    rnumber_with_trace,
    verify_automorphism,
    witness,
)
from dataclasses import replace as _dc_replace
from .spectra import (
    HypothesisError,
    SpectrumResult,
    THREE_STEP,
    classify_hn_semidirect,
    classify_nilpotent,
    classify_z2_minusI_ext,
    classify_z2_semidirect,
    classify_z3_semidirect,
    conclusion_tables,
    decide_system2,
)

DEFAULT_BOUND = 10_000

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNDECIDED = 2


class CliError(ValueError):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reidemeister",
        description="Exact Reidemeister numbers and spectra for solvmanifold fundamental groups",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--bound", type=int, default=None, help="search bound (default: TWISTED_BOUND or %d)" % DEFAULT_BOUND)

    fam = argparse.ArgumentParser(add_help=False)
    fam.add_argument("--family", help="family slug (see README); not needed with --spec-json")
    fam.add_argument("--matrix", help="acting matrix, rows separated by ';', entries by ','")
    fam.add_argument("--n0", help="inner twist vector for the double extension, e.g. '1,0'")
    fam.add_argument("--n", type=int, help="rank / Heisenberg parameter")
    fam.add_argument("--k", type=int, help="central twist of x for hn-semidirect")
    fam.add_argument("--l", type=int, help="central twist of y for hn-semidirect")
    fam.add_argument("--twists", help="central twists 'cx,cy' for a matrix action on hn-semidirect")

    p = sub.add_parser("rnumber", parents=[common, fam], help="Reidemeister number of one automorphism")
    p.add_argument("--witness", help="witness id (phi_m, M_m, phi_alpha, M_r, phi_eight, target, negation)")
    p.add_argument("--param", type=int, help="witness parameter")
    p.add_argument("--spec-json", help="path to an automorphism JSON file ('-' for stdin)")

    sub.add_parser("spectrum", parents=[common, fam], help="Reidemeister spectrum of a group")

    p = sub.add_parser("decide", parents=[common], help="decide the quadratic system for a 2x2 matrix")
    p.add_argument("--matrix", required=True)

    sub.add_parser("tables", parents=[common], help="emit the classification tables")

    p = sub.add_parser("oracle", parents=[common, fam], help="twisted-conjugacy labeling over a bounded ball")
    p.add_argument("--witness", help="witness id")
    p.add_argument("--param", type=int, help="witness parameter")
    p.add_argument("--spec-json", help="path to an automorphism JSON file ('-' for stdin)")
    p.add_argument("--radius", type=int, required=True)
    return parser


def _resolve_bound(args) -> int:
    if getattr(args, "bound", None) is not None:
        if args.bound < 1:
            raise CliError("bound must be >= 1")
        return args.bound
    env = os.environ.get("TWISTED_BOUND")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise CliError("TWISTED_BOUND is not an integer: %r" % env) from None
        if value < 1:
            raise CliError("TWISTED_BOUND must be >= 1")
        return value
    return DEFAULT_BOUND


def _need(args, attr, message):
    value = getattr(args, attr, None)
    if value is None:
        raise CliError(message)
    return value


def _matrix_arg(args, dim=None) -> IntMatrix:
    text = _need(args, "matrix", "--matrix is required for this family")
    m = parse_matrix(text)
    if dim is not None and (m.rows, m.cols) != (dim, dim):
        raise CliError("expected a %dx%d matrix, got %dx%d" % (dim, dim, m.rows, m.cols))
    return m


def _family_for_automorphism(args):
    slug = _need(args, "family", "--family is required without --spec-json")
    if slug == "z2-semidirect":
        return ZnSemidirectZ(_matrix_arg(args, 2))
    if slug == "z3-semidirect":
        return ZnSemidirectZ(_matrix_arg(args, 3))
    if slug == "double-ext":
        n0 = parse_vector(_need(args, "n0", "--n0 is required for double-ext"))
        return Z2MinusIExt(_matrix_arg(args, 2), n0)
    if slug == "hn-semidirect":
        n = _need(args, "n", "--n is required for hn-semidirect")
        k = args.k if args.k is not None else 0
        l = args.l if args.l is not None else 0
        return HnSemidirectZ(n, k, l)
    if slug == "free-abelian":
        return FreeAbelian(_need(args, "n", "--n is required for free-abelian"))
    if slug == "heisenberg":
        return Heisenberg(_need(args, "n", "--n is required for heisenberg"))
    if slug == "heisenberg-times-z":
        return HeisenbergTimesZ(_need(args, "n", "--n is required for heisenberg-times-z"))
    raise CliError("unknown family %r" % slug)


def _spec_from_args(args) -> AutomorphismSpec:
    if getattr(args, "spec_json", None):
        if args.spec_json == "-":
            data = json.load(sys.stdin)
        else:
            with open(args.spec_json) as handle:
                data = json.load(handle)
        spec = AutomorphismSpec.from_json_dict(data)
        report = verify_automorphism(spec)
        if not report:
            raise CliError("automorphism verification failed: %s" % report.failure)
        return _dc_replace(spec, verified=True)
    name = _need(args, "witness", "either --spec-json or --witness/--param is required")
    param = _need(args, "param", "--param is required with --witness")
    return witness(_family_for_automorphism(args), name, param)


def _spectrum_result(args, bound) -> SpectrumResult:
    slug = _need(args, "family", "--family is required")
    if slug == "z2-semidirect":
        return classify_z2_semidirect(_matrix_arg(args, 2), bound)
    if slug == "z3-semidirect":
        return classify_z3_semidirect(_matrix_arg(args, 3), bound)
    if slug == "double-ext":
        n0 = parse_vector(_need(args, "n0", "--n0 is required for double-ext"))
        return classify_z2_minusI_ext(_matrix_arg(args, 2), n0, bound)
    if slug == "hn-semidirect":
        n = _need(args, "n", "--n is required for hn-semidirect")
        if args.matrix is not None:
            twists = (0, 0)
            if args.twists:
                twists = parse_vector(args.twists)
            return classify_hn_semidirect(n, _matrix_arg(args, 2), bound, tuple(twists))
        k = _need(args, "k", "--k/--l or --matrix is required for hn-semidirect")
        l = _need(args, "l", "--k/--l or --matrix is required for hn-semidirect")
        return classify_hn_semidirect(n, (k, l), bound)
    if slug == "free-abelian":
        return classify_nilpotent(FreeAbelian(_need(args, "n", "--n is required")))
    if slug == "heisenberg":
        return classify_nilpotent(Heisenberg(_need(args, "n", "--n is required")))
    if slug == "heisenberg-times-z":
        return classify_nilpotent(HeisenbergTimesZ(_need(args, "n", "--n is required")))
    if slug == "three-step":
        return classify_nilpotent(THREE_STEP)
    raise CliError("unknown family %r" % slug)


def _envelope(result, trace, bound) -> dict:
    return {"result": result, "trace": list(trace), "version": __version__, "bound": bound}


def _emit(envelope: dict, fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(envelope, sort_keys=True, separators=(",", ":")))
        out.write("\n")
        return
    out.write(_render_text(envelope))


def _render_text(envelope: dict) -> str:
    lines = []
    result = envelope["result"]
    if "tables" in result:
        for table_name in sorted(result["tables"]):
            lines.append("== %s ==" % table_name)
            for row in result["tables"][table_name]:
                cell = " or ".join(_render_descriptor(d) for d in row["spectrum"])
                lines.append("  %-48s %s" % (row["case"], cell))
            lines.append("")
    else:
        for key in sorted(result):
            value = result[key]
            if key == "spectrum" and isinstance(value, dict):
                value = _render_descriptor(value)
            lines.append("%s: %s" % (key, _plain(value)))
    lines.append("trace: %s" % " > ".join(envelope["trace"]))
    lines.append("bound: %s" % envelope["bound"])
    return "\n".join(lines) + "\n"


def _plain(value) -> str:
    if isinstance(value, dict):
        return json.dumps(value, sort_keys=True, separators=(",", ":"))
    return str(value)


def _render_descriptor(d: dict) -> str:
    kind = d["kind"]
    if kind == "r_infinity":
        return "{oo}"
    if kind == "finite":
        return "{%s,oo}" % ",".join(str(v) for v in d["values"])
    if kind == "multiples":
        return "%dN u {oo}" % d["c"]
    if kind == "full":
        return "N u {oo}"
    if kind == "undecided":
        return "undecided(%s, bound %d)" % (
            " | ".join(_render_descriptor(c) for c in d["candidates"]),
            d["bound"],
        )
    return json.dumps(d, sort_keys=True)


def run(argv, stdout=None, stderr=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code not in (0, None) else EXIT_OK
    try:
        bound = _resolve_bound(args)
        if args.command == "rnumber":
            spec = _spec_from_args(args)
            value, trace = rnumber_with_trace(spec)
            _emit(_envelope({"rnumber": value.to_json()}, trace, bound), args.format, stdout)
            return EXIT_OK
        if args.command == "spectrum":
            res = _spectrum_result(args, bound)
            payload = {"spectrum": res.spectrum.to_json_dict()}
            if res.evidence:
                payload["evidence"] = dict(res.evidence)
            _emit(_envelope(payload, res.trace, bound), args.format, stdout)
            return EXIT_UNDECIDED if res.spectrum.kind == "undecided" else EXIT_OK
        if args.command == "decide":
            m = parse_matrix(args.matrix)
            decision = decide_system2(m, bound)
            payload = {"outcome": decision.outcome}
            trace = ["system2:%s" % decision.outcome]
            if decision.witness is not None:
                payload["witness"] = decision.witness.to_json_dict()
            _emit(_envelope(payload, trace, bound), args.format, stdout)
            return EXIT_UNDECIDED if decision.outcome == "none-up-to-bound" else EXIT_OK
        if args.command == "tables":
            tables = {
                name: [
                    {"case": row["case"], "spectrum": [d.to_json_dict() for d in row["spectrum"]]}
                    for row in rows
                ]
                for name, rows in conclusion_tables().items()
            }
            _emit(_envelope({"tables": tables}, ["tables:classification"], bound), args.format, stdout)
            return EXIT_OK
        if args.command == "oracle":
            spec = _spec_from_args(args)
            labeling = label_classes(spec, args.radius)
            value, _ = rnumber_with_trace(spec)
            payload = {
                "classes": labeling.class_count,
                "complete": labeling.complete,
                "radius": labeling.ball_radius,
                "formula": value.to_json(),
            }
            _emit(_envelope(payload, ["oracle:ball-saturation"], bound), args.format, stdout)
            return EXIT_OK if labeling.complete else EXIT_UNDECIDED
        raise CliError("unknown command %r" % args.command)
    except (CliError, MatrixParseError, HypothesisError, ValueError, OSError) as exc:
        stderr.write("error: %s\n" % exc)
        return EXIT_ERROR


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
