"""Command line front end: ``leibniz <subcommand> ...``.

Results go to stdout, diagnostics to stderr.  Exit status is 0 on
success, 2 for malformed input and 3 for domain errors.  ``--json``
prints one object per run, described by ``docs/cli-output.schema.json``.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import expr as ex
from .differentiation import differential, nth_differential
from .errors import LeibnizError
from .expr import Assumptions, Equation
from .hyperreal import DEFAULT_ORDER, LimitResult, limit, slope_at
from .parser import ParseError, format_equation, format_expr, parse, parse_equation, parse_expr, to_json
from .solver import RatioTarget, partial_ratio, second_derivative, solve
from .summation import DEFAULT_TOLERANCE, SumSpec, antidifferential, infinite_sum, total_difference

EXIT_OK, EXIT_INPUT, EXIT_DOMAIN = 0, 2, 3


class UsageError(ValueError):
    """Flag values that are well-formed for argparse but wrong for the command."""


def _names(values) -> list:
    out = []
    for v in values or []:
        out.extend(p.strip() for p in v.split(",") if p.strip())
    return out


def _assumptions(args) -> Assumptions:
    return Assumptions(independent=_names(args.independent), positive=_names(args.positive))


def _fmt_number(v) -> str:
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return repr(float(v))


def _point(text: str) -> dict:
    out = {}
    for part in text.split(","):
        if "=" not in part:
            raise UsageError(f"expected name=value pairs, got {part!r}")
        name, value = part.split("=", 1)
        out[name.strip()] = ex.exact_value(parse_expr(value))
    return out


def _expr_payload(e, style: str) -> dict:
    if isinstance(e, Equation):
        return {"result": format_equation(e), "latex": format_equation(e, "latex"),
                "tree": {"lhs": to_json(e.lhs), "rhs": to_json(e.rhs)}}
    return {"result": format_expr(e), "latex": format_expr(e, "latex"), "tree": to_json(e)}


def _limit_payload(r: LimitResult) -> dict:
    return {
        "result": str(r),
        "kind": r.kind.value,
        "value": None if r.value is None else _fmt_number(r.value),
        "reason": r.reason,
        "series": None if r.series is None else str(r.series),
        "inexact": r.inexact or bool(r.series is not None and r.series.inexact),
    }


# ---------------------------------------------------------------------------
# subcommands; each returns (payload, plain lines, stderr notes)


def cmd_parse(args):
    e = parse(args.expression)
    return _expr_payload(e, "plain"), [], []


def cmd_diff(args):
    e = differential(parse(args.expression), _assumptions(args))
    return _expr_payload(e, "plain"), [], []


def cmd_nthdiff(args):
    if args.order < 1:
        raise UsageError("--order must be at least 1")
    e = nth_differential(parse(args.expression), args.order, _assumptions(args))
    payload = _expr_payload(e, "plain")
    payload["order"] = args.order
    return payload, [], []


def cmd_derive(args):
    target = RatioTarget.parse(args.target)
    sol = solve([parse_equation(t) for t in args.equations], target, _assumptions(args))
    payload = _expr_payload(sol.expr, "plain")
    payload.update(target=str(target), side_conditions=list(sol.side_conditions))
    notes = [f"assuming {c}" for c in sol.side_conditions]
    return payload, [], notes


def cmd_partial(args):
    target = RatioTarget.parse(args.target)
    held = _names(args.hold)
    if not held:
        raise UsageError("partial needs at least one --hold variable")
    e = partial_ratio([parse_equation(t) for t in args.equations], target, held, _assumptions(args))
    payload = _expr_payload(e, "plain")
    payload.update(target=str(target), held=sorted(held))
    return payload, [], []


def cmd_second(args):
    target = RatioTarget.parse(args.target)
    y, x = target.numerator.base, target.denominator.base
    e = second_derivative(
        [parse_equation(t) for t in args.equations], y, x, _assumptions(args), resolve=not args.unresolved
    )
    payload = _expr_payload(e, "plain")
    payload.update(target=f"d2{y}/d{x}^2", resolved=not args.unresolved)
    return payload, [], []


def _order(args) -> int:
    if args.order < 1:
        raise UsageError("--order must be at least 1")
    return args.order


def cmd_limit(args):
    r = limit(parse_expr(args.expression), args.var, args.at, args.side, _order(args))
    notes = [f"undefined: {r.reason}"] if r.reason else []
    return _limit_payload(r), [], notes


def cmd_slope(args):
    r = slope_at(parse_expr(args.expression), args.var, args.at, _order(args))
    notes = [f"undefined: {r.reason}"] if r.reason else []
    return _limit_payload(r), [], notes


def cmd_integrate(args):
    if (args.frm is None) != (args.to is None):
        raise UsageError("--from and --to must be given together")
    p = antidifferential(parse_expr(args.expression), _assumptions(args))
    payload = {
        "result": str(p),
        "latex": format_expr(p.expr, "latex") + " + C",
        "tree": to_json(p.expr),
        "total": None,
    }
    lines = []
    if args.frm is not None:
        total = total_difference(p, _point(args.frm), _point(args.to))
        payload["total"] = _fmt_number(total)
        lines.append(payload["total"])
    return payload, lines, []


def cmd_sum(args):
    lo, hi = (float(ex.numeric(parse_expr(v))) for v in args.range)
    if not args.tol > 0:
        raise UsageError("--tol must be positive")
    spec = SumSpec(parse_expr(args.expression), args.var, lo, hi, parse_equation(args.curve) if args.curve else None)
    res = infinite_sum(spec, args.tol, full_output=True)
    payload = {"result": repr(res.value), "value": res.value, "n": res.slices, "error_estimate": res.error_estimate}
    return payload, [], []


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="leibniz", description="Calculus with differentials.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help_text, expression="expression"):
        p = sub.add_parser(name, help=help_text, description=help_text)
        if expression == "equations":
            p.add_argument("equations", nargs="+", metavar="EQUATION")
        else:
            p.add_argument("expression")
        p.add_argument("--independent", action="append", metavar="X", help="symbols with d2x = 0 (comma separated)")
        p.add_argument("--positive", action="append", metavar="U", help="symbols known to be positive")
        out = p.add_mutually_exclusive_group()
        out.add_argument("--json", action="store_true", help="print a JSON object")
        out.add_argument("--latex", action="store_true", help="print LaTeX")
        p.set_defaults(func=func)
        return p

    add("parse", cmd_parse, "parse and print in canonical form")
    add("diff", cmd_diff, "total differential of an expression or equation")
    p = add("nthdiff", cmd_nthdiff, "n-th differential")
    p.add_argument("--order", type=int, required=True)
    p = add("derive", cmd_derive, "solve the differentiated equations for a ratio", "equations")
    p.add_argument("--target", required=True, help="ratio such as dy/dx")
    p = add("partial", cmd_partial, "ratio with held variables' differentials set to 0", "equations")
    p.add_argument("--target", required=True)
    p.add_argument("--hold", action="append", required=True, metavar="X")
    p = add("second", cmd_second, "second derivative d2y/dx^2 for --target dy/dx", "equations")
    p.add_argument("--target", required=True)
    p.add_argument("--unresolved", action="store_true", help="keep d2y and d2x as ratios")
    for name, func, text in (("limit", cmd_limit, "limit by eps substitution"),
                             ("slope", cmd_slope, "slope as the standard part of a difference quotient")):
        p = add(name, func, text)
        p.add_argument("--var", required=True)
        p.add_argument("--at", required=True, help="a rational, or oo / -oo for limits")
        if name == "limit":
            p.add_argument("--side", choices=("left", "right", "both"), default="both")
        p.add_argument("--order", type=int, default=DEFAULT_ORDER, help="truncation order of the eps-series")
    p = add("integrate", cmd_integrate, "potential of an exact form, and its total along a path")
    p.add_argument("--from", dest="frm", metavar="POINT", help="e.g. x=2,y=3")
    p.add_argument("--to", metavar="POINT")
    p = add("sum", cmd_sum, "numeric infinite sum of slices")
    p.add_argument("--var", required=True)
    p.add_argument("--range", nargs=2, required=True, metavar=("A", "B"))
    p.add_argument("--curve", help="explicit curve such as 'y = x^2'")
    p.add_argument("--tol", type=float, default=DEFAULT_TOLERANCE)
    return parser


def _emit_error(args, code: str, message: str, span=None, rendered=None) -> None:
    if getattr(args, "json", False):
        err = {"code": code, "message": message}
        if span is not None:
            err["span"] = {"start": span.start, "end": span.end}
        print(json.dumps({"command": args.command, "ok": False, "error": err}, sort_keys=True))
    else:
        print(rendered or f"error [{code}]: {message}", file=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        payload, extra, notes = args.func(args)
    except ParseError as err:
        _emit_error(args, err.code, err.message, err.span, err.render())
        return EXIT_INPUT
    except LeibnizError as err:
        _emit_error(args, err.code, str(err))
        return EXIT_DOMAIN
    except ValueError as err:
        _emit_error(args, "UsageError", str(err))
        return EXIT_INPUT

    if args.json:
        print(json.dumps({"command": args.command, "ok": True, **payload}, sort_keys=True))
    else:
        first = payload["latex"] if args.latex and "latex" in payload else payload["result"]
        print(first)
        for line in extra:
            print(line)
        for note in notes:
            print(note, file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
