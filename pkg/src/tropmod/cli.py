"""Command-line front end: one JSON request in, one JSON certificate out.

Exit status is 0 when the answer is a positive verdict, 1 for a negative one
(degenerate, not projective, not a homomorphism, a rejected certificate...)
and 2 when the input cannot be understood.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any, Sequence

from .certify import COMMANDS, Request, run
from .jsonio import MalformedInput
from .quiver import DEFAULT_VERTEX_CAP
from .semilattice import SizeError

EXIT_MALFORMED = 2

HELP = {
    "classify-semilattice": "projectivity, freeness or primitives of a finite join semilattice",
    "classify-quiver": "projectivity of a quiver-presented po-module (scalar or affine weights)",
    "closure": "max-plus closure of a quiver, or CPA closure of a family",
    "polyhedron": "weight polyhedron of a scalar quiver",
    "separate": "monotone functional separating F from G",
    "fiber": "fiber of a family over a rational point",
    "family-check": "projectivity of a family over its base",
    "hom-check": "does an assignment of generators define a module map",
    "dualize": "order dual of a scalar quiver",
    "cpa": "reduce, join, add, compare or evaluate CPA functions",
    "verify": "re-check a certificate against its request",
    "batch": "a JSON list of requests, answered in order",
}


def _emit(obj: Any, out) -> None:
    out.write(json.dumps(obj, sort_keys=True) + "\n")


def _error(msg: str) -> dict:
    return {"verdict": "malformed", "error": msg}


def _answer(req: Request) -> tuple[dict, int]:
    try:
        cert = run(req)
    except (MalformedInput, SizeError) as exc:
        return _error(str(exc)), EXIT_MALFORMED
    return cert.to_json(), cert.exit_code


def _read(path: str | None) -> Any:
    text = sys.stdin.read() if path in (None, "-") else open(path, encoding="utf-8").read()
    return json.loads(text, parse_float=_no_float)


def _no_float(s: str):
    raise MalformedInput(f"floating-point literal {s} is not allowed; use integers or p/q")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tropmod", description="Projectivity and duality for tropical modules.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in [*COMMANDS, "batch"]:
        p = sub.add_parser(name, help=HELP[name])
        p.add_argument("--in", dest="infile", metavar="FILE", help="read the request from FILE instead of stdin")
        p.add_argument("--seed", type=int, default=0, help="recorded for reproducibility; the analyses are deterministic")
        p.add_argument("--cap-n", type=int, default=DEFAULT_VERTEX_CAP, help="largest vertex count accepted")
    return parser


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    options = {"seed": args.seed, "cap_n": args.cap_n}
    try:
        payload = _read(args.infile)
    except (OSError, ValueError) as exc:
        _emit(_error(str(exc)), out)
        return EXIT_MALFORMED
    if args.command != "batch":
        result, code = _answer(Request(args.command, payload, options))
        _emit(result, out)
        return code
    if not isinstance(payload, list):
        _emit(_error("batch input must be a JSON list of requests"), out)
        return EXIT_MALFORMED
    results, code = [], 0
    for item in payload:
        try:
            req = Request.from_json(item)
            req = Request(req.command, req.payload, {**options, **req.options})
            res, c = _answer(req)
        except MalformedInput as exc:
            res, c = _error(str(exc)), EXIT_MALFORMED
        results.append(res)
        code = max(code, c)
    _emit(results, out)
    return code


if __name__ == "__main__":
    sys.exit(main())
