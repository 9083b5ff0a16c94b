"""Command-line front end.

Exit codes: 0 success, 2 usage or configuration error, 3 insufficient
precision, 4 internal assertion failure (including any failed check in
``verify`` or ``characters``).  Artifacts are deterministic: the
same flags always produce byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

import mpmath
import numpy as np
from mpmath.libmp import to_str

from . import fsc, oracle, qseries
from .diagrams import TwoColumnDiagram, iter_diagrams, parity_of, sector_dimension
from .errors import BudgetError, DomainError, PrecisionError
from .spectrum import LatticeParams, eigenvalue, energy, sector_labels, sector_spectrum

SCHEMA_VERSION = 1
VERIFY_BUDGET = 10

EXIT_OK, EXIT_USAGE, EXIT_PRECISION, EXIT_INTERNAL = 0, 2, 3, 4


def fmt_real(x, digits: int) -> str:
    if not isinstance(x, mpmath.mpf):
        # convert at the requested precision, not the global default
        with mpmath.workdps(digits):
            x = mpmath.mpf(x)
    return to_str(x._mpf_, digits, strip_zeros=False, min_fixed=0, max_fixed=0, show_zero_exponent=True)


def fmt_rational(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _fraction_arg(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not an exact rational: {text!r}") from None


def _alpha_arg(text: str) -> Fraction:
    value = _fraction_arg(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"alpha must be nonnegative: {text!r}")
    return value


def _digits_arg(text: str) -> int:
    try:
        d = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if d < 15:
        raise argparse.ArgumentTypeError("--digits must be >= 15")
    return d


def _resolved_config(args: argparse.Namespace) -> dict:
    out = {}
    for key, value in sorted(vars(args).items()):
        if key in ("func", "out", "format"):
            continue
        if isinstance(value, Fraction):
            value = fmt_rational(value)
        elif isinstance(value, list):
            value = [fmt_rational(v) if isinstance(v, Fraction) else v for v in value]
        out[key] = value
    out["format"] = args.format
    return out


def _emit(args: argparse.Namespace, key: str, payload, columns: list[str], rows: list[dict]) -> None:
    if args.format == "json":
        doc = {"schema_version": SCHEMA_VERSION, "config": _resolved_config(args), key: payload}
        text = json.dumps(doc, indent=2) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({c: (";".join(map(str, row[c])) if isinstance(row.get(c), list) else row.get(c)) for c in columns})
        text = buf.getvalue()
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _diagram_arg(text: str, L: int) -> TwoColumnDiagram:
    return TwoColumnDiagram.parse(text, L)


# --- commands -------------------------------------------------------------


SPECTRUM_COLUMNS = ["N", "alpha", "v", "diagram", "lambda", "energy"]


def run_spectrum(args: argparse.Namespace) -> int:
    params = LatticeParams(args.n, args.alpha, args.digits)
    labels = [args.v] if args.v is not None else sector_labels(args.n)
    rows = []
    for v in labels:
        for p in sector_spectrum(params, v):
            rows.append(
                {
                    "N": args.n,
                    "alpha": fmt_rational(params.alpha),
                    "v": fmt_rational(v),
                    "diagram": str(p.diagram),
                    "lambda": fmt_real(p.lam, args.digits),
                    "energy": fmt_real(p.energy, args.digits),
                }
            )
    _emit(args, "rows", rows, SPECTRUM_COLUMNS, rows)
    return EXIT_OK


FSC_COLUMNS = ["N", "alpha", "diagram", "l_max", "energy", "fsc_energy", "residual", "iom"]


def run_fsc(args: argparse.Namespace) -> int:
    params = LatticeParams(args.n, args.alpha, args.digits)
    if args.l_max > fsc.TABLE_LIMIT:
        raise DomainError(f"--l-max must be <= {fsc.TABLE_LIMIT}")
    texts = args.diagram or ["(-|-)"]
    rows = []
    for text in texts:
        D = _diagram_arg(text, params.L)
        e = energy(params, D)
        f = fsc.fsc_energy(params, D, args.l_max)
        with mpmath.workdps(args.digits):
            res = e - f
        iom = fsc.iom_vector(D, args.l_max, parity_of(args.n))
        rows.append(
            {
                "N": args.n,
                "alpha": fmt_rational(params.alpha),
                "diagram": str(D),
                "l_max": args.l_max,
                "energy": fmt_real(e, args.digits),
                "fsc_energy": fmt_real(f, args.digits),
                "residual": fmt_real(res, args.digits),
                "iom": [fmt_rational(x) for x in iom.values],
            }
        )
    _emit(args, "rows", rows, FSC_COLUMNS, rows)
    return EXIT_OK


FIT_COLUMNS = ["N", "residual", "slope", "expected_slope"]


def run_fit(args: argparse.Namespace) -> int:
    if args.l_max > fsc.TABLE_LIMIT:
        raise DomainError(f"--l-max must be <= {fsc.TABLE_LIMIT}")
    D = TwoColumnDiagram.parse(args.diagram, max(max(args.n) // 2, 1))
    result = fsc.residual_order_fit(args.n, D, args.alpha, args.l_max, args.digits)
    per_n = [{"N": n, "residual": fmt_real(r, 20)} for n, r in zip(result.sizes, result.residuals)]
    report = {
        "slope": f"{result.slope:.6f}",
        "expected_slope": result.expected_slope,
        "digits": result.digits,
        "diagram": str(D),
        "residuals": per_n,
    }
    csv_rows = [dict(row, slope=report["slope"], expected_slope=result.expected_slope) for row in per_n]
    _emit(args, "report", report, FIT_COLUMNS, csv_rows)
    return EXIT_OK


VERIFY_COLUMNS = ["check", "N", "M", "passed", "delta"]


def _verify_items(n_max: int, ms: list[int], traces: bool, alpha: Fraction) -> list[dict]:
    items = []

    def add(check: str, N: int, M, passed: bool, delta: str) -> None:
        items.append({"check": check, "N": N, "M": M, "passed": bool(passed), "delta": delta})

    for N in range(1, n_max + 1):
        T = oracle.transfer_matrix(N)
        V1 = oracle.build_V1(N, "poly")
        V3 = oracle.build_V3(N)
        Vop = oracle.variation_operator(N, "poly")
        for M in ms:
            if N * M <= oracle.MATCHING_BUDGET:
                tr = oracle.trace_power(T, M)
                z = oracle.brute_force_Z(oracle.CylinderInstance(N, M))
                add("trace_equals_matchings", N, M, tr == z, "exact" if tr == z else f"{tr} vs {z}")
        for name, op in (
            ("anticommutes_V_T", oracle.anticommutator(Vop, T)),
            ("commutes_V_V3", oracle.commutator(Vop, V3)),
            ("anticommutes_V_V1", oracle.anticommutator(Vop, V1)),
            ("V3_order_independent", V3 - oracle.build_V3(N, order="descending")),
        ):
            add(name, N, None, op.is_zero(), "exact")
        T2 = T @ T
        groups = oracle.sector_states(N)
        leak = 0
        for v, rows in groups.items():
            others = [s for w, st in groups.items() if w != v for s in st]
            if others:
                leak += int(np.count_nonzero(T2.block(rows, others)))
        add("T2_sector_invariance", N, None, leak == 0, f"{leak} off-block entries")
        dims_ok = all(len(st) == sector_dimension(N, v) for v, st in groups.items())
        add("sector_dimensions", N, None, dims_ok, "exact")
        if traces:
            params = LatticeParams(N, alpha)
            lams = [float(eigenvalue(params, D)) for D in iter_diagrams(N // 2)]
            Tf = oracle.transfer_matrix(N, float(alpha))
            mult = 1 if N % 2 == 0 else 2
            for k in (1, 2, 3):
                exact = oracle.trace_power(Tf, 2 * k)
                pred = mult * sum(x**k for x in lams)
                rel = abs(pred - exact) / abs(exact)
                add(f"trace_sum_rule_k{k}", N, 2 * k, rel < 1e-9, f"{rel:.3e}")
    return items


def run_verify(args: argparse.Namespace) -> int:
    if args.n_max < 1 or args.n_max > VERIFY_BUDGET:
        raise BudgetError(f"--n-max must be in 1..{VERIFY_BUDGET}")
    items = _verify_items(args.n_max, args.m, args.traces, args.alpha)
    all_pass = all(i["passed"] for i in items)
    _emit(args, "report", {"all_pass": all_pass, "items": items}, VERIFY_COLUMNS, items)
    return EXIT_OK if all_pass else EXIT_INTERNAL


CHARACTER_COLUMNS = ["L", "v", "parity", "holds", "r_values"]
LIMIT_COLUMNS = ["v", "parity", "L", "order", "all_match", "first_mismatch"]


def run_characters(args: argparse.Namespace) -> int:
    if args.limit:
        v = args.v if args.v is not None else Fraction(0)
        parity = args.parity or ("even" if v.denominator == 1 else "odd")
        rep = qseries.continuum_limit_check(v, args.order, args.l, parity)
        row = {
            "v": fmt_rational(v),
            "parity": parity,
            "L": args.l,
            "order": args.order,
            "all_match": rep.all_match,
            "first_mismatch": "all match" if rep.all_match else fmt_rational(rep.first_mismatch),
        }
        _emit(args, "report", row, LIMIT_COLUMNS, [row])
        return EXIT_OK
    if args.l > 8:
        raise BudgetError("exhaustive identity checks are limited to --l <= 8")
    rows = []
    for L in range(0, args.l + 1):
        if L >= 1:
            for v in range(-L, L + 1):
                rows.append(_identity_row(L, Fraction(v), "even"))
        for k in range(-L - 1, L + 1):
            rows.append(_identity_row(L, Fraction(2 * k + 1, 2), "odd"))
    all_true = all(r["holds"] for r in rows)
    _emit(args, "report", {"all_hold": all_true, "identities": rows}, CHARACTER_COLUMNS, rows)
    return EXIT_OK if all_true else EXIT_INTERNAL


def _identity_row(L: int, v: Fraction, parity: str) -> dict:
    w = qseries.character_sum_identity(L, v, parity)
    return {"L": L, "v": fmt_rational(v), "parity": parity, "holds": w.holds, "r_values": list(w.r_values)}


# --- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dimerfsc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, digits: int) -> None:
        p.add_argument("--format", choices=["json", "csv"], default="json")
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--digits", type=_digits_arg, default=digits, help="working precision in decimal digits")

    p = sub.add_parser("spectrum", help="eigenvalues and energies by sector")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=_alpha_arg, default=Fraction(1))
    p.add_argument("--v", type=_fraction_arg, default=None, help="sector label (half-integer for odd N)")
    common(p, 15)
    p.set_defaults(func=run_spectrum)

    p = sub.add_parser("fsc", help="finite-size expansion against exact energies")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=_alpha_arg, default=Fraction(1))
    p.add_argument("--l-max", type=int, default=2)
    p.add_argument("--diagram", action="append", help='e.g. "(1|-)"; repeatable; default vacuum')
    common(p, fsc.FSC_DIGITS)
    p.set_defaults(func=run_fsc)

    p = sub.add_parser("fit", help="residual decay order over an N grid")
    p.add_argument("--n", type=int, nargs="+", required=True)
    p.add_argument("--alpha", type=_alpha_arg, default=Fraction(1))
    p.add_argument("--l-max", type=int, default=0)
    p.add_argument("--diagram", default="(-|-)")
    common(p, fsc.FSC_DIGITS)
    p.set_defaults(func=run_fit)

    p = sub.add_parser("verify", help="brute-force oracle cross-checks")
    p.add_argument("--n-max", type=int, default=5)
    p.add_argument("--m", type=int, nargs="+", default=[2, 4])
    p.add_argument("--traces", action="store_true", help="also check trace sum rules in double precision")
    p.add_argument("--alpha", type=_alpha_arg, default=Fraction(1), help="weight for the trace sum rules")
    common(p, 15)
    p.set_defaults(func=run_verify)

    p = sub.add_parser("characters", help="finitized character identities and continuum limit")
    p.add_argument("--l", type=int, default=4)
    p.add_argument("--limit", action="store_true", help="compare Z_v with q^(v^2/2)/eta instead")
    p.add_argument("--v", type=_fraction_arg, default=None)
    p.add_argument("--order", type=int, default=10)
    p.add_argument("--parity", choices=["even", "odd"], default=None)
    common(p, 15)
    p.set_defaults(func=run_characters)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except PrecisionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except (DomainError, BudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AssertionError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
