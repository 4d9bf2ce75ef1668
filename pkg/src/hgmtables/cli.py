"""Command-line interface, problem-file format and decimal rendering.

Problem files are UTF-8 ``key: value`` lines with keys ``rows``, ``cols``,
``p`` and ``u``.  Grids separate rows with ``;`` and entries with whitespace;
``#`` starts a comment.  ``p`` defaults to all ones; ``rows``/``cols`` may be
omitted when ``u`` is given.

Exit codes: 0 success, 2 input error, 3 computation failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from functools import partial

from .cmle import cmle_fit, z_evaluator
from .driver import hgm_2x2, reduce_2x2, z_hgm
from .errors import ComputationError, InputError, ParseError
from .exact import format_rational, parse_rational
from .gauss2f1 import f21_poly_oracle, gauss_manin_2f1, gauss_manin_2f1_float
from .matfac import STRATEGIES, matfac
from .ratfun import parse_matrix_file
from .tables import MarginalSums, enumerate_fiber, expectations_from_z, expectations_naive, ones, z_dp
from .zeros import expectation_with_zeros

EXIT_OK, EXIT_INPUT, EXIT_COMPUTATION = 0, 2, 3

# Huge exact values are printed in full.
if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(0)


# -- problem files ------------------------------------------------------------

@dataclass(frozen=True)
class ProblemFile:
    rows: tuple
    cols: tuple
    p: tuple
    u: tuple | None = None

    @property
    def beta(self) -> MarginalSums:
        return MarginalSums(self.rows, self.cols)


_KEYS = ("rows", "cols", "p", "u")


def _grid(text, lineno, conv):
    out = []
    for chunk in text.split(";"):
        tokens = chunk.split()
        if not tokens:
            raise ParseError("empty grid row", line=lineno)
        try:
            out.append(tuple(conv(t) for t in tokens))
        except (ParseError, ValueError):
            raise ParseError(f"bad grid entry in {chunk.strip()!r}", line=lineno) from None
    if len({len(r) for r in out}) != 1:
        raise ParseError("grid rows have different lengths", line=lineno)
    return tuple(out)


def _count(token):
    v = int(token)
    if v < 0:
        raise ValueError(token)
    return v


def parse_problem_file(text: str) -> ProblemFile:
    fields = {}
    where = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition(":")
        key = key.strip()
        if not sep:
            raise ParseError("expected 'key: value'", line=lineno)
        if key not in _KEYS:
            raise ParseError(f"unknown key {key!r}; expected one of {', '.join(_KEYS)}", line=lineno)
        if key in fields:
            raise ParseError(f"duplicate key {key!r}", line=lineno)
        where[key] = lineno
        if key in ("rows", "cols"):
            tokens = value.split()
            if not tokens:
                raise ParseError(f"{key} is empty", line=lineno)
            try:
                fields[key] = tuple(_count(t) for t in tokens)
            except ValueError:
                raise ParseError(f"{key} must be nonnegative integers", line=lineno) from None
        elif key == "p":
            fields[key] = _grid(value, lineno, parse_rational)
        else:
            fields[key] = _grid(value, lineno, _count)

    u = fields.get("u")
    if u is not None:
        derived = MarginalSums.of(u)
        for key, got in (("rows", derived.rows), ("cols", derived.cols)):
            if key in fields and fields[key] != got:
                raise InputError(f"line {where[key]}: {key} disagree with the sums of u")
            fields.setdefault(key, got)
    for key in ("rows", "cols"):
        if key not in fields:
            raise InputError(f"missing '{key}' (or give u)")
    rows, cols = fields["rows"], fields["cols"]
    if sum(rows) != sum(cols):
        raise InputError(f"inconsistent marginals: rows sum to {sum(rows)}, cols to {sum(cols)}")
    shape = (len(rows), len(cols))
    p = fields.get("p", ones(shape))
    if len(p) != shape[0] or len(p[0]) != shape[1]:
        raise InputError(f"line {where['p']}: p is {len(p)}x{len(p[0])}, expected {shape[0]}x{shape[1]}")
    if any(v < 0 for row in p for v in row):
        raise InputError(f"line {where['p']}: p entries must be nonnegative")
    if u is not None and (len(u), len(u[0])) != shape:
        raise InputError(f"line {where['u']}: u has the wrong shape")
    return ProblemFile(rows, cols, p, u)


# -- rendering ----------------------------------------------------------------

def render_decimal(q, sig_digits: int) -> str:
    """Round-half-even scientific notation ``d.ddd...e+NN``."""
    if sig_digits < 1:
        raise InputError("need at least one significant digit")
    q = Fraction(q)
    if not q:
        return "0"
    if q.denominator == 1 and abs(q) < 10**6:
        return str(q.numerator)
    sign = "-" if q < 0 else ""
    a = abs(q)
    e = int((a.numerator.bit_length() - a.denominator.bit_length()) * math.log10(2))
    while Fraction(10) ** e > a:
        e -= 1
    while Fraction(10) ** (e + 1) <= a:
        e += 1
    m = round(a * Fraction(10) ** (sig_digits - 1 - e))
    if m == 10**sig_digits:
        m //= 10
        e += 1
    digits = str(m)
    mant = digits[0] + ("." + digits[1:] if len(digits) > 1 else "")
    return f"{sign}{mant}e{'+' if e >= 0 else '-'}{abs(e)}"


class _Out:
    def __init__(self, args):
        self.digits = args.digits
        self.as_json = args.json
        self.data = {}
        self.lines = []

    def num(self, q):
        if isinstance(q, float):
            return repr(q)
        return render_decimal(q, self.digits) if self.digits else format_rational(q)

    def value(self, key, q):
        self.data[key] = self.num(q)
        self.lines.append(f"{key}: {self.num(q)}")

    def grid(self, key, g):
        self.data[key] = [[self.num(v) for v in row] for row in g]
        self.lines.append(f"{key}:")
        self.lines.extend("  " + " ".join(self.num(v) for v in row) for row in g)

    def info(self, key, v):
        self.data[key] = v
        self.lines.append(f"{key}: {v}")

    def emit(self):
        if self.as_json:
            print(json.dumps(self.data, indent=2))
        else:
            print("\n".join(self.lines))


# -- commands -----------------------------------------------------------------

def _tuning(args) -> dict:
    tuning = {}
    if args.reduction_interval is not None:
        tuning["reduction_interval"] = args.reduction_interval
    if args.primes is not None:
        tuning["primes"] = args.primes
    if args.workers is not None:
        tuning["workers"] = args.workers
    if args.verify is not None:
        tuning["verify"] = args.verify == "on"
    return tuning


def _z(args):
    if args.method == "hgm":
        return partial(z_hgm, strategy=args.strategy, **_tuning(args))
    return z_evaluator(args.method)


def _expectations(args):
    if args.method == "naive":
        return expectations_naive
    if args.method == "dp":
        return partial(expectations_from_z, z=z_dp)

    def via_hgm(beta, p):
        if beta.shape != (2, 2):
            raise InputError("--method hgm is built in for 2x2 tables only")
        return hgm_2x2(beta, p, args.strategy, **_tuning(args))[1]

    return via_hgm


def _load(path) -> ProblemFile:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_problem_file(fh.read())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def cmd_zeval(args, out):
    prob = _load(args.problem)
    out.value("Z", _z(args)(prob.beta, prob.p))


def cmd_expectation(args, out):
    prob = _load(args.problem)
    evaluator = _expectations(args)
    has_zero = any(not v for row in prob.p for v in row)
    if not has_zero:
        out.grid("E", evaluator(prob.beta, prob.p))
        return
    res = expectation_with_zeros(
        prob.beta, prob.p, evaluator, seed=args.interp_seed if args.interp_seed is not None else args.seed,
        offset_range=args.interp_range, extra=args.interp_extra,
    )
    out.grid("E", res.values)
    out.info("zero_cell_seed", res.seed)
    out.info("degree_bound", res.degree)
    out.data["direction"] = [[format_rational(v) for v in row] for row in res.direction]
    out.lines.append("direction: " + " ; ".join(" ".join(format_rational(v) for v in row) for row in res.direction))


def cmd_cmle(args, out):
    prob = _load(args.problem)
    if prob.u is None:
        raise InputError("cmle needs an observed table 'u' in the problem file")
    ref_row = None if args.ref_row is None else args.ref_row - 1
    res = cmle_fit(prob.u, ref_row, args.ref_col - 1, tol=args.tol, max_iter=args.max_iter,
                   method=_z(args) if args.method == "hgm" else args.method)
    out.grid("odds_ratios", res.chart)
    out.value("loglik", res.loglik)
    out.value("gradient_norm", res.gradient_norm)
    out.info("iterations", res.iterations)
    out.info("reference_cell", [res.ref_row + 1, res.ref_col + 1])
    out.info("boundary_cells", [[i + 1, j + 1] for i, j in res.boundary_cells])


def cmd_fiber(args, out):
    prob = _load(args.problem)
    tables = enumerate_fiber(prob.beta)
    out.info("count", len(tables))
    out.data["tables"] = [[list(r) for r in t] for t in tables]
    out.lines.extend(" ; ".join(" ".join(map(str, r)) for r in t) for t in tables)


def cmd_matfac(args, out):
    try:
        with open(args.matrix, encoding="utf-8") as fh:
            family, _ = parse_matrix_file(fh.read())
    except OSError as exc:
        raise InputError(f"cannot read {args.matrix}: {exc.strerror}") from None
    init = [parse_rational(t) for t in args.init.replace(",", " ").split()]
    vec = matfac(family, init, args.lo, args.hi, args.strategy, ascending=args.ascending, **_tuning(args))
    out.data["F"] = [out.num(v) for v in vec]
    out.lines.append("F:")
    out.lines.extend("  " + out.num(v) for v in vec)


def benchmark1(N: int):
    """Marginals and parameters of the 2x2 benchmark with ``2F1(-36N, -11N; 2N; x)``."""
    if N < 1:
        raise InputError("N must be >= 1")
    x = (1 - Fraction(1, N)) / 56
    return MarginalSums((36 * N, 13 * N - 1), (38 * N - 1, 11 * N)), ((1, x), (1, 1))


def cmd_bench2x2(args, out):
    beta, p = benchmark1(args.N)
    base = reduce_2x2(beta, p)
    a, b, c = base.abc
    t0 = time.perf_counter()
    gm = gauss_manin_2f1(a, b, c, base.x, args.strategy, **_tuning(args))
    elapsed = time.perf_counter() - t0
    out.info("parameters", f"a={a} b={b} c={c} x={format_rational(base.x)}")
    out.value("f", gm.f)
    out.value("theta_f", gm.theta_f)
    out.info("wall_time_s", round(elapsed, 4))
    if args.check:
        out.info("oracle_agrees", f21_poly_oracle(a, b, c, base.x) == gm.f)
    if args.float:
        try:
            ff, _ = gauss_manin_2f1_float(a, b, c, base.x)
        except OverflowError as exc:
            out.info("float_f", f"overflow ({exc})")
        else:
            out.value("float_f", ff)
            out.info("float_rel_error", f"{float(abs(Fraction(ff) - gm.f) / abs(gm.f)):.3e}" if gm.f else "n/a")


def _prime_spec(text):
    parts = [s for s in text.replace(",", " ").split() if s]
    try:
        values = [int(s) for s in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a count or a comma-separated prime list, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty prime specification")
    return values[0] if len(values) == 1 and "," not in text else values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--method", choices=("naive", "dp", "hgm"), default="dp")
    common.add_argument("--strategy", choices=STRATEGIES, default="exact")
    common.add_argument("--reduction-interval", type=int)
    common.add_argument("--primes", type=_prime_spec, help="prime count or comma-separated list")
    common.add_argument("--workers", type=int)
    common.add_argument("--verify", choices=("on", "off"))
    common.add_argument("--digits", type=int, help="print decimals with this many significant digits")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--json", action="store_true")

    parser = argparse.ArgumentParser(prog="hgmtables", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("zeval", parents=[common], help="normalizing constant Z")
    p.add_argument("problem")
    p.set_defaults(func=cmd_zeval)

    p = sub.add_parser("expectation", parents=[common], help="expectation matrix E[U]")
    p.add_argument("problem")
    p.add_argument("--interp-seed", type=int)
    p.add_argument("--interp-range", type=parse_rational, default=Fraction(20))
    p.add_argument("--interp-extra", type=int, default=1)
    p.set_defaults(func=cmd_expectation)

    p = sub.add_parser("cmle", parents=[common], help="conditional MLE of the odds ratios")
    p.add_argument("problem")
    p.add_argument("--ref-row", type=int, help="1-based reference row (default: last)")
    p.add_argument("--ref-col", type=int, default=1, help="1-based reference column")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=100)
    p.set_defaults(func=cmd_cmle)

    p = sub.add_parser("fiber", parents=[common], help="list all tables with the given marginals")
    p.add_argument("problem")
    p.set_defaults(func=cmd_fiber)

    p = sub.add_parser("matfac", parents=[common], help="matrix factorial of a matrix file")
    p.add_argument("matrix")
    p.add_argument("--init", required=True, help="initial vector, e.g. '1 0 1/2'")
    p.add_argument("--from", dest="lo", type=int, required=True)
    p.add_argument("--to", dest="hi", type=int, required=True)
    p.add_argument("--ascending", action="store_true", help="apply M(from) first")
    p.set_defaults(func=cmd_matfac)

    p = sub.add_parser("bench2x2", parents=[common], help="the 2x2 benchmark 2F1(-36N,-11N;2N;x)")
    p.add_argument("--case", choices=("benchmark1",), default="benchmark1")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--float", action="store_true", help="also run the binary64 recurrence")
    p.add_argument("--check", action="store_true", help="compare with the terminating series")
    p.set_defaults(func=cmd_bench2x2)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = _Out(args)
    try:
        args.func(args, out)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ComputationError as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTATION
    out.emit()
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
