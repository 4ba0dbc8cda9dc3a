"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a check fails, 2 for usage,
parse and parameter errors.  ``KGRAPH_THREADS`` caps the BLAS/OpenMP thread
count; it is applied before numpy is imported.
"""

from __future__ import annotations

import argparse
import os
import sys

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DEFAULT_NNZ_CAP = 10_000_000
THREAD_ENV = "KGRAPH_THREADS"
CSV_HEADER = "check,q,K,residual"


def _apply_thread_limit() -> None:
    value = os.environ.get(THREAD_ENV)
    if not value:
        return
    if not value.isdigit() or int(value) < 1:
        raise SystemExit(f"error: {THREAD_ENV} must be a positive integer, got {value!r}")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = value


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _degree(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a degree like 1,1, got {text!r}") from None


def _which(text: str):
    if text == "all":
        return "all"
    pair = _degree(text)
    if len(pair) != 2 or pair[0] not in (1, 2) or pair[1] not in (1, 2, 3):
        raise argparse.ArgumentTypeError(f"--which takes 'all' or i,j with i in 1..2 and j in 1..3, got {text!r}")
    return pair


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kgraph", description="Rank-k graphs and the q -> 0 limit of SU_q(3).")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a k-graph text file")
    p.add_argument("file")
    p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("paths", help="list normal-form paths of a given degree")
    p.add_argument("file")
    p.add_argument("--from", dest="source", metavar="L")
    p.add_argument("--to", dest="target", metavar="L")
    p.add_argument("--degree", type=_degree, required=True, metavar="m,n")

    p = sub.add_parser("su3-verify", help="run every operator check on the truncated Fock space")
    p.add_argument("--dim", type=int, default=10, metavar="N")
    p.add_argument("--depth", type=int, default=6, metavar="d")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out", metavar="FILE", help="JSON report path (default: stdout)")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--max-nnz", type=float, default=DEFAULT_NNZ_CAP, help="resource cap on stored nonzeros")

    p = sub.add_parser("qlimit", help="q -> 0 limit residuals, slopes and series errors as CSV")
    p.add_argument("--q", type=_float_list, default=None, metavar="a,b,c")
    p.add_argument("--dim", type=int, default=10, metavar="N")
    p.add_argument("--depth", type=int, default=6, metavar="d")
    p.add_argument("--which", type=_which, default="all", metavar="all|i,j")
    p.add_argument("--series-q", type=float, default=0.5)
    p.add_argument("--series-K", type=int, default=8)
    p.add_argument("--no-series", action="store_true")
    p.add_argument("--out", metavar="FILE", help="CSV path (default: stdout)")

    p = sub.add_parser("export-su3", help="write the built-in SU(3) 2-graph in the text format")
    p.add_argument("file", help="output path, or - for stdout")
    return parser


def _emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_validate(args) -> int:
    from . import core, textio
    from .errors import KGraphError
    from .report import VerificationReport

    skeleton, table = textio.load(args.file)
    report = VerificationReport()
    report.extend(core.validate_skeleton(skeleton))
    comm = core.check_commuting(skeleton)
    report.extend(comm)
    error = None
    if comm.ok:
        try:
            g = core.validate_factorization(skeleton, table)
            report.flag("factorization/table", True, squares=len(g.table))
        except KGraphError as exc:
            error = f"{type(exc).__name__}: {exc}"
            report.flag("factorization/table", False, error=error)
    else:
        report.flag("factorization/table", False, error="skipped: transition matrices do not commute")
    if args.format == "json":
        _emit(report.to_json(file=os.path.basename(args.file)), None)
    else:
        print(report.summary())
        for c in report.failures:
            detail = c.params.get("mismatch") or c.params.get("vertices") or c.params.get("error")
            print(f"failed: {c.name}: {detail}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_paths(args) -> int:
    from . import core, textio

    skeleton, table = textio.load(args.file)
    g = core.validate_factorization(skeleton, table)
    if len(args.degree) != g.k:
        raise ValueError(f"degree {args.degree} does not have {g.k} entries")
    for v in (args.source, args.target):
        if v is not None:
            skeleton.vertex(v)
    if args.target is not None:
        paths = g.enumerate_paths(args.target, args.degree, "range")
        if args.source is not None:
            paths = [p for p in paths if p.source == args.source]
    elif args.source is not None:
        paths = g.enumerate_paths(args.source, args.degree, "source")
    else:
        paths = [p for v in skeleton.labels for p in g.enumerate_paths(v, args.degree, "range")]
    for p in paths:
        print(f"{p.source} -> {p.range}: {p}")
    print(f"count: {len(paths)}")
    return EXIT_OK


def cmd_su3_verify(args) -> int:
    from . import ck
    from .graded import TruncationParams

    TruncationParams(N=args.dim, f=3, c=2, d=args.depth)
    estimate = 6 * args.dim**3
    if estimate > args.max_nnz:
        print(
            f"error: about {estimate:.3g} stored nonzeros for N={args.dim} exceeds the cap {args.max_nnz:.3g}; "
            "lower --dim or raise --max-nnz",
            file=sys.stderr,
        )
        return EXIT_USAGE
    report = ck.verify_all(args.dim, args.depth, args.tol)
    if args.format == "json":
        _emit(report.to_json(N=args.dim, d=args.depth, tol=args.tol), args.out)
    else:
        _emit(report.summary() + "\n", args.out)
    if report.warnings:
        print(f"{len(report.warnings)} check(s) within rounding of the tolerance (warn)", file=sys.stderr)
    for c in report.failures:
        print(f"failed: {c.name} residual={c.residual:.3e} tol={c.tolerance:.1e}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_qlimit(args) -> int:
    from . import qdeform

    qs = args.q if args.q is not None else list(qdeform.DEFAULT_Q_GRID)
    for q in qs + [args.series_q]:
        if not 0.0 < q < 1.0:
            raise ValueError(f"q values must lie in (0, 1), got {q}")
    pairs = [(i, j) for i in (1, 2) for j in (1, 2, 3)] if args.which == "all" else [args.which]
    rows = [CSV_HEADER]
    ok = True
    for i, j in pairs:
        fit = qdeform.limit_rate(i, j, qs, args.dim, args.depth)
        for q, r in zip(fit.qs, fit.residuals):
            rows.append(f"limit/{i},{j}/{fit.label},{q!r},,{r!r}")
        rows.append(f"slope/{i},{j}/{fit.label},,,{fit.slope!r}")
        ok &= fit.monotone
    if not args.no_series:
        for fid in (1, 2, 3):
            errors = qdeform.series_check(fid, args.series_q, args.series_K)
            for K, err in enumerate(errors, start=1):
                rows.append(f"series/{fid},{args.series_q!r},{K},{err!r}")
    _emit("\n".join(rows) + "\n", args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_export_su3(args) -> int:
    from . import su3

    _emit(su3.export(), args.file)
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "paths": cmd_paths,
    "su3-verify": cmd_su3_verify,
    "qlimit": cmd_qlimit,
    "export-su3": cmd_export_su3,
}


def main(argv: list[str] | None = None) -> int:
    _apply_thread_limit()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    from .errors import KGraphError, ParseError

    try:
        return COMMANDS[args.command](args)
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KGraphError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
