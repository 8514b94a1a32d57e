"""Command line entry point: ``starkwell {spectrum,eigfn,table,splitting}``.

Exit codes: 0 success, 1 solver non-convergence, 2 non-unitary boundary
matrix, 3 bad request parameters, 4 table entries outside tolerance.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from contextlib import contextmanager

from .airy import AiryDomainError
from .eigenfunctions import eigenfunctions, sample_grid
from .extension import NonUnitaryError, StarkProblem, parse_bc
from .solver import ConvergenceError, SpectrumRequest, solve_spectrum
from .tables import TABLE_CASES, reproduce_table

EXIT_OK = 0
EXIT_CONVERGENCE = 1
EXIT_NONUNITARY = 2
EXIT_BAD_REQUEST = 3
EXIT_TABLE_MISMATCH = 4

log = logging.getLogger("starkwell")


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; 2 is reserved for bad U here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_BAD_REQUEST, f"{self.prog}: error: {message}\n")


class BadRequest(ValueError):
    pass


def sig(x: float) -> str:
    """Nine significant digits."""
    return f"{x + 0.0:.9g}"


def _num(x: float):
    # round-trip through the 9-digit string so json and csv agree
    v = float(sig(x))
    return 0.0 if v == 0 else v


def _render(records: list[dict], fields: list[str], fmt: str) -> str:
    if fmt == "json":
        data = [{k: (_num(r[k]) if isinstance(r[k], float) else r[k]) for k in fields} for r in records]
        return json.dumps(data, indent=2) + "\n"
    cells = [[sig(r[k]) if isinstance(r[k], float) else str(r[k]) for k in fields] for r in records]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(fields)
        w.writerows(cells)
        return buf.getvalue()
    widths = [max([len(f)] + [len(c[i]) for c in cells]) for i, f in enumerate(fields)]
    lines = ["  ".join(f.rjust(w) for f, w in zip(fields, widths))]
    lines += ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


@contextmanager
def _sink(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="\n") as fh:
            yield fh


def _problem(args) -> StarkProblem:
    try:
        return StarkProblem(args.L, args.F)
    except ValueError as exc:
        raise BadRequest(str(exc)) from exc


def _request(args) -> SpectrumRequest:
    window = tuple(args.window) if args.window else None
    count = args.count
    if window is None and count is None:
        count = 4
    try:
        return SpectrumRequest(_problem(args), parse_bc(args.bc), window, count, args.scan_step)
    except NonUnitaryError:
        raise
    except ValueError as exc:
        raise BadRequest(str(exc)) from exc


def cmd_spectrum(args) -> int:
    req = _request(args)
    levels = solve_spectrum(req)
    records = [
        {"index": i, "energy": e.energy, "residual": e.residual, "multiplicity": e.multiplicity}
        for i, e in enumerate(levels, start=1)
    ]
    with _sink(args.out) as fh:
        fh.write(_render(records, ["index", "energy", "residual", "multiplicity"], args.format))
    return EXIT_OK


def cmd_eigfn(args) -> int:
    if args.index < 1:
        raise BadRequest("--index counts from 1")
    if args.samples < 2:
        raise BadRequest("--samples must be >= 2")
    args.count = max(args.count or 0, args.index) if not args.window else args.count
    req = _request(args)
    levels = solve_spectrum(req)
    if args.index > len(levels):
        raise BadRequest(f"index {args.index} beyond the {len(levels)} levels found")
    ev = levels[args.index - 1]
    funcs = eigenfunctions(ev.energy, req.problem, req.bc)
    if args.member >= len(funcs):
        raise BadRequest(f"level {args.index} has multiplicity {len(funcs)}; --member {args.member} is out of range")
    phi = funcs[args.member]
    records = [{"x": x, "phi_re": v.real, "phi_im": v.imag} for x, v in sample_grid(phi, args.samples)]
    with _sink(args.out) as fh:
        fh.write(_render(records, ["x", "phi_re", "phi_im"], args.format))
    return EXIT_OK


def cmd_table(args) -> int:
    rows = reproduce_table(args.table_id)
    records = [
        {
            "L": r.entry.half_width,
            "F": r.entry.field,
            "index": r.entry.index,
            "reference": r.entry.energy,
            "computed": r.computed,
            "difference": r.difference,
            "ok": "yes" if r.ok else "NO",
        }
        for r in rows
    ]
    with _sink(args.out) as fh:
        fh.write(_render(records, list(records[0]), args.format))
    bad = [r for r in rows if not r.ok]
    for r in bad:
        log.warning(
            "table %d entry L=%g F=%g index %d: computed %s, reference %s, |diff| %.3g > %.0e",
            args.table_id, r.entry.half_width, r.entry.field, r.entry.index,
            sig(r.computed), r.entry.energy, r.difference, r.tolerance,
        )
    return EXIT_TABLE_MISMATCH if bad else EXIT_OK


def _parse_fields(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise BadRequest(f"cannot parse field list {text!r}") from exc
    if not vals:
        raise BadRequest("empty field list")
    return vals


def cmd_splitting(args) -> int:
    fields = _parse_fields(args.fields)
    if args.levels < 1:
        raise BadRequest("--levels must be >= 1")
    L = args.L
    records = []
    for F in sorted(set([0.0] + fields)):
        try:
            p = StarkProblem(L, F)
        except ValueError as exc:
            raise BadRequest(str(exc)) from exc
        if p.is_free:
            levels = solve_spectrum(SpectrumRequest(p, "periodic", count=args.levels + 1))[1:]
            for n, ev in enumerate(levels, start=1):
                records.append(
                    {"F": F, "level": n, "reference": (n * math.pi / L) ** 2, "lower": ev.energy,
                     "upper": ev.energy, "gap": 0.0, "multiplicity": ev.multiplicity}
                )
            continue
        levels = solve_spectrum(SpectrumRequest(p, "periodic", count=2 * args.levels + 1))[1:]
        for n in range(1, args.levels + 1):
            lo, hi = levels[2 * n - 2], levels[2 * n - 1]
            records.append(
                {"F": F, "level": n, "reference": (n * math.pi / L) ** 2, "lower": lo.energy,
                 "upper": hi.energy, "gap": hi.energy - lo.energy, "multiplicity": 1}
            )
    fields_out = ["F", "level", "reference", "lower", "upper", "gap", "multiplicity"]
    with _sink(args.out) as fh:
        fh.write(_render(records, fields_out, args.format))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="starkwell", description="Stark operator on [-L, L] under self-adjoint boundary conditions.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver diagnostics")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, needs_bc=True):
        sp.add_argument("--L", type=float, required=True, help="half-width of the interval")
        if needs_bc:
            sp.add_argument("--F", type=float, required=True, help="field strength (>= 0)")
            sp.add_argument("--bc", default="dirichlet",
                            help="preset (dirichlet, neumann, mixed, periodic) or 'a,b;c,d' with entries re+imi")
            sp.add_argument("--count", type=int, help="first N levels (default 4 when no window)")
            sp.add_argument("--window", type=float, nargs=2, metavar=("E_LO", "E_HI"))
            sp.add_argument("--scan-step", type=float, help="coarse bracketing step")
        sp.add_argument("--format", choices=("csv", "json", "text"), default="csv")
        sp.add_argument("--out", help="output path (default stdout)")

    sp = sub.add_parser("spectrum", help="eigenvalues")
    common(sp)
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("eigfn", help="sampled normalized eigenfunction")
    common(sp)
    sp.add_argument("--index", type=int, required=True, help="level number, from 1")
    sp.add_argument("--samples", type=int, default=201)
    sp.add_argument("--member", type=int, default=0, help="which function of a degenerate level (0 even, 1 odd)")
    sp.set_defaults(func=cmd_eigfn)

    sp = sub.add_parser("table", help="recompute a reference table")
    sp.add_argument("table_id", type=int, choices=sorted(TABLE_CASES))
    sp.add_argument("--format", choices=("csv", "json", "text"), default="text")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_table)

    sp = sub.add_parser("splitting", help="periodic level splitting versus field")
    common(sp, needs_bc=False)
    sp.add_argument("--fields", default="0.01", help="comma-separated F values; F = 0 is always included")
    sp.add_argument("--levels", type=int, default=2, help="number of degenerate levels to follow")
    sp.set_defaults(func=cmd_splitting)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except NonUnitaryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(f"|U*U - I| = {exc.deviation:.3e}", file=sys.stderr)
        return EXIT_NONUNITARY
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (BadRequest, AiryDomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_REQUEST


if __name__ == "__main__":
    sys.exit(main())
