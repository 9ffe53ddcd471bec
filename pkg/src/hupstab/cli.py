"""Command-line front end.

Exit codes: 0 when everything ran and all checks passed, 1 when a check
failed, 2 on usage or input errors.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import constants as cst
from . import verify as vf
from .functionals import deficits
from .manifold import dist_grad_norm_matched, dist_grad_to_shup, dist_l2_to_hup, dist_vector_cfhup
from .polygauss import PolyGaussFn

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DIM_RANGE = (2, cst.MAX_SECTOR_DIM)
DISPLAY_FLOOR = 1e-12  # table output shows |x| <= 1e-12 * scale as 0


class UsageError(Exception):
    pass


def parse_dims(text: str) -> list[int]:
    """``"A..B"`` (inclusive) or a single integer."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError:
        raise UsageError(f"bad dimension range {text!r}; expected A..B") from None
    if lo > hi:
        raise UsageError(f"empty dimension range {text!r}")
    _check_dim(lo)
    _check_dim(hi)
    return list(range(lo, hi + 1))


def _check_dim(N: int):
    if not DIM_RANGE[0] <= N <= DIM_RANGE[1]:
        raise UsageError(f"dimension {N} outside [{DIM_RANGE[0]}, {DIM_RANGE[1]}]")


def parse_fn_spec(text: str) -> PolyGaussFn:
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed function spec at line {exc.lineno} column {exc.colno} "
                         f"(char {exc.pos}): {exc.msg}") from None
    try:
        return PolyGaussFn.from_spec(spec)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid function spec: {exc}") from None


def _fmt(x, scale: float = 0.0) -> str:
    if x is None:
        return "undefined"
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        if math.isfinite(x) and abs(x) <= DISPLAY_FLOOR * scale:
            x = 0.0
        return f"{x:.12g}"
    return str(x)


def _table(rows: Sequence[dict], columns: Sequence[str]) -> str:
    cells = [[_fmt(r.get(c)) for c in columns] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) if cells else len(c) for i, c in enumerate(columns)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(columns, widths))]
    lines += ["  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


def _emit(text: str, out_path: Optional[str]):
    if out_path:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


# -- commands -----------------------------------------------------------------
def cmd_constants(args) -> int:
    dims = parse_dims(args.dims)
    if args.kmax < 0:
        raise UsageError("--kmax must be nonnegative")
    if args.basis < 3:
        raise UsageError("--basis must be at least 3")
    ests = cst.sweep(dims, args.kmax, basis=args.basis)
    if args.out == "json":
        text = cst.to_json(ests) + "\n"
    elif args.out == "csv":
        text = cst.to_csv(ests)
    else:
        text = _table([e.to_dict() for e in ests], cst.CSV_COLUMNS)
    _emit(text, args.out_path)
    return EXIT_OK if all(e.respects_sandwich() for e in ests if e.converged) else EXIT_FAIL


def cmd_verify(args) -> int:
    _check_dim(args.dim)
    if args.tol <= 0:
        raise UsageError("--tol must be positive")
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    if args.suite == "identities":
        if args.mc and args.dim not in (2, 3):
            raise UsageError("--mc supports --dim 2 or 3")
        checks = vf.run_identity_suite(args.dim, tol=args.tol, corpus_size=args.trials,
                                       seed=args.seed, mc=args.mc)
    else:
        checks = vf.run_inequality_suite(args.dim, trials=args.trials, seed=args.seed, tol=args.tol)
    if args.out == "csv":
        text = vf.report_csv(args.suite, args.dim, args.seed, checks)
    elif args.out == "table":
        text = _table([c.to_dict() for c in checks], ("name", "kind", "residual", "tolerance", "passed"))
    else:
        text = vf.report_json(args.suite, args.dim, args.seed, checks) + "\n"
    _emit(text, args.out_path)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


def cmd_deficit(args) -> int:
    u = parse_fn_spec(args.fn)
    if args.emit_spec:
        sys.stdout.write(u.to_json() + "\n")
        return EXIT_OK
    _check_dim(args.dim)
    try:
        rep = deficits(u, args.dim)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    e = rep.energies
    if args.order == 1:
        fields = {"theta1": rep.theta1, "theta2": rep.theta2, "theta3": rep.theta3,
                  "lambda": rep.lambda_first}
    else:
        fields = {"delta1": rep.delta1, "delta2": rep.delta2, "lambda": rep.lambda_second}
    if args.out == "json":
        out = {k: getattr(e, k) for k in ("l2", "grad", "lap", "x2_l2", "x2_grad")}
        out.update(fields)
        sys.stdout.write(json.dumps(out) + "\n")
    else:
        scale = max(e.scale, e.scale**2) if args.order == 1 else e.scale
        for k, v in fields.items():
            sys.stdout.write(f"{k} = {_fmt(v, scale)}\n")
    return EXIT_OK


def cmd_distance(args) -> int:
    u = parse_fn_spec(args.fn)
    _check_dim(args.dim)
    try:
        if args.set == "hup":
            if args.match_norm:
                raise UsageError("--match-norm applies to shup and cfhup only")
            res = dist_l2_to_hup(u, args.dim)
        elif args.set == "shup":
            res = dist_grad_norm_matched(u, args.dim) if args.match_norm else dist_grad_to_shup(u, args.dim)
        else:
            res = dist_vector_cfhup(u, args.dim, "norm_matched" if args.match_norm else "l2")
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.out == "json":
        sys.stdout.write(res.to_json() + "\n")
    else:
        for k, v in res.to_dict().items():
            sys.stdout.write(f"{k} = {_fmt(v)}\n")
    return EXIT_OK if res.converged else EXIT_FAIL


def cmd_report(args) -> int:
    dims = parse_dims(args.dims)
    if args.kmax < 0:
        raise UsageError("--kmax must be nonnegative")
    ests = cst.sweep(dims, args.kmax, basis=args.basis)
    text = cst.to_json(ests) + "\n" if args.out.endswith(".json") else cst.to_csv(ests)
    Path(args.out).write_text(text)
    return EXIT_OK if all(e.respects_sandwich() for e in ests if e.converged) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hupstab", description="Stability of the second-order uncertainty principle.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("constants", help="numeric stability constants C(N,k) with bounds")
    c.add_argument("--dims", required=True, help="dimension range A..B")
    c.add_argument("--kmax", type=int, required=True)
    c.add_argument("--basis", type=int, default=cst.DEFAULT_M_LIST[-1], help="largest basis size")
    c.add_argument("--out", choices=("json", "csv", "table"), default="table")
    c.add_argument("--out-path", default=None)
    c.set_defaults(func=cmd_constants)

    v = sub.add_parser("verify", help="identity or inequality suite")
    v.add_argument("suite", choices=("identities", "inequalities"))
    v.add_argument("--dim", type=int, required=True)
    v.add_argument("--trials", type=int, default=None, help="corpus size (100 identities, 200 inequalities)")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--tol", type=float, default=vf.IDENTITY_TOL)
    v.add_argument("--mc", action="store_true", help="add the Monte-Carlo sector cross-check")
    v.add_argument("--out", choices=("json", "csv", "table"), default="json")
    v.add_argument("--out-path", default=None)
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("deficit", help="uncertainty deficits of one function")
    d.add_argument("--fn", required=True, help='JSON, e.g. {"terms":[{"coeffs":[1],"beta":1}]}')
    d.add_argument("--dim", type=int, default=2)
    d.add_argument("--order", type=int, choices=(1, 2), default=2)
    d.add_argument("--emit-spec", action="store_true", help="print the canonical spec and exit")
    d.add_argument("--out", choices=("json", "table"), default="table")
    d.set_defaults(func=cmd_deficit)

    t = sub.add_parser("distance", help="distance to an optimizer manifold")
    t.add_argument("--fn", required=True)
    t.add_argument("--dim", type=int, required=True)
    t.add_argument("--set", choices=("hup", "shup", "cfhup"), required=True)
    t.add_argument("--match-norm", action="store_true")
    t.add_argument("--out", choices=("json", "table"), default="table")
    t.set_defaults(func=cmd_distance)

    r = sub.add_parser("report", help="write the constants sweep to a file")
    r.add_argument("--dims", required=True)
    r.add_argument("--kmax", type=int, required=True)
    r.add_argument("--basis", type=int, default=cst.DEFAULT_M_LIST[-1])
    r.add_argument("--out", required=True, help="output path (.json for JSON, otherwise CSV)")
    r.set_defaults(func=cmd_report)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    if getattr(args, "trials", 0) is None:
        args.trials = 100 if args.suite == "identities" else 200
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"hupstab: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
