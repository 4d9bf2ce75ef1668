"""Univariate rational functions in ``t`` over Q and square matrices of them.

Polynomials are dense coefficient tuples (constant term first).  Degrees in
contiguity matrices stay small, so nothing smarter is needed.

Expression grammar accepted by :func:`parse_ratfun_expr`::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' INTEGER)?
    atom   := INTEGER | 't' | '(' expr ')'
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import lcm

from .errors import InputError, ParseError, PoleError


def _trim(coeffs):
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


class Poly:
    """Dense polynomial in one variable with Fraction coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        self.coeffs = _trim(Fraction(c) for c in coeffs)

    @classmethod
    def const(cls, c):
        return cls((c,))

    @classmethod
    def t(cls):
        return cls((0, 1))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lead(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __eq__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(other)
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"Poly({self.render()!r})"

    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return Poly(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self):
        return Poly(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Poly):
            other = Fraction(other)
            return Poly(c * other for c in self.coeffs)
        if self.is_zero() or other.is_zero():
            return Poly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise InputError("negative polynomial power")
        result = Poly.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def divmod(self, other: "Poly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        q = [Fraction(0)] * max(len(rem) - dq, 0)
        inv_lead = 1 / other.lead
        for k in range(len(rem) - 1, dq - 1, -1):
            c = rem[k] * inv_lead
            if c:
                q[k - dq] = c
                for j, b in enumerate(other.coeffs):
                    rem[k - dq + j] -= c * b
        return Poly(q), Poly(rem[:dq] if dq > 0 else [])

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        return self * (1 / self.lead)

    def __call__(self, x):
        acc = Fraction(0) if not isinstance(x, Poly) else Poly()
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def compose(self, inner: "Poly") -> "Poly":
        acc = Poly()
        for c in reversed(self.coeffs):
            acc = acc * inner + c
        return acc

    def render(self, var: str = "t") -> str:
        if self.is_zero():
            return "0"
        parts = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if not c:
                continue
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if k == 0:
                body = _fmt(mag)
            else:
                mono = var if k == 1 else f"{var}^{k}"
                body = mono if mag == 1 else f"{_fmt(mag)}*{mono}"
            parts.append((sign, body))
        first_sign, first = parts[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def poly_gcd(a: Poly, b: Poly) -> Poly:
    while not b.is_zero():
        a, b = b, a.divmod(b)[1]
    return a.monic()


class RatFun:
    """Canonical ``num/den``: coprime, denominator monic and nonzero."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        num = num if isinstance(num, Poly) else Poly.const(num)
        den = Poly.const(1) if den is None else den if isinstance(den, Poly) else Poly.const(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero():
            num, den = Poly(), Poly.const(1)
        else:
            g = poly_gcd(num, den)
            if g.degree > 0:
                num = num.divmod(g)[0]
                den = den.divmod(g)[0]
            lead = den.lead
            num, den = num * (1 / lead), den * (1 / lead)
        self.num = num
        self.den = den

    @classmethod
    def const(cls, c):
        return cls(Poly.const(c))

    def __eq__(self, other):
        if not isinstance(other, RatFun):
            other = RatFun.const(other)
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __repr__(self):
        return f"RatFun({self.render()!r})"

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def _lift(self, other):
        return other if isinstance(other, RatFun) else RatFun.const(other)

    def __add__(self, other):
        other = self._lift(other)
        return RatFun(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFun(-self.num, self.den)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        return RatFun(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._lift(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RatFun(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __pow__(self, k: int):
        return RatFun(self.num**k, self.den**k)

    def __call__(self, t0):
        t0 = Fraction(t0)
        d = self.den(t0)
        if d == 0:
            raise PoleError(f"pole at t = {t0}", t=t0)
        return self.num(t0) / d

    def substitute(self, inner: Poly) -> "RatFun":
        """``self(inner(t))`` for a polynomial ``inner``."""
        return RatFun(self.num.compose(inner), self.den.compose(inner))

    def render(self, var: str = "t") -> str:
        if self.den == Poly.const(1):
            return self.num.render(var)
        num = self.num.render(var)
        if len(self.num.coeffs) > 1 or "/" in num:
            num = f"({num})"
        return f"{num}/({self.den.render(var)})"


class _Parser:
    def __init__(self, text: str, var: str):
        self.text = text
        self.var = var
        self.pos = 0

    def error(self, msg):
        raise ParseError(msg, position=self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def integer(self) -> int:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.error("expected an integer")
        return int(self.text[start : self.pos])

    def parse(self) -> RatFun:
        value = self.expr()
        if self.peek():
            self.error(f"unexpected character {self.peek()!r}")
        return value

    def expr(self) -> RatFun:
        value = self.term()
        while self.peek() in ("+", "-"):
            op = self.text[self.pos]
            self.pos += 1
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> RatFun:
        value = self.unary()
        while self.peek() in ("*", "/"):
            op = self.text[self.pos]
            self.pos += 1
            where = self.pos
            rhs = self.unary()
            if op == "*":
                value = value * rhs
            else:
                if rhs.is_zero():
                    raise ParseError("division by the zero polynomial", position=where)
                value = value / rhs
        return value

    def unary(self) -> RatFun:
        c = self.peek()
        if c == "-":
            self.pos += 1
            return -self.unary()
        if c == "+":
            self.pos += 1
            return self.unary()
        return self.power()

    def power(self) -> RatFun:
        base = self.atom()
        if self.peek() == "^":
            self.pos += 1
            base = base ** self.integer()
        return base

    def atom(self) -> RatFun:
        c = self.peek()
        if c.isdigit():
            return RatFun.const(self.integer())
        if c == "(":
            self.pos += 1
            value = self.expr()
            if self.peek() != ")":
                self.error("expected ')'")
            self.pos += 1
            return value
        if self.text.startswith(self.var, self.pos):
            end = self.pos + len(self.var)
            if end < len(self.text) and (self.text[end].isalnum() or self.text[end] == "_"):
                self.error("unknown symbol")
            self.pos = end
            return RatFun(Poly.t())
        if not c:
            self.error("unexpected end of expression")
        self.error(f"unexpected character {c!r}")


def parse_ratfun_expr(text: str, var: str = "t") -> RatFun:
    return _Parser(text, var).parse()


def _int_poly(p: Poly, scale) -> tuple[int, ...]:
    out = []
    for c in p.coeffs:
        v = c * scale
        assert v.denominator == 1
        out.append(v.numerator)
    return tuple(out)


def eval_int_poly(coeffs, t: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


@dataclass(frozen=True)
class IntegerForm:
    """``M(t) = (1/scale) * [num_e(t) / dens[k_e](t)]`` with integer polynomials.

    ``entries[i][j]`` is ``None`` for a zero entry, else ``(num_coeffs, k)``.
    """

    scale: int
    dens: tuple[tuple[int, ...], ...]
    entries: tuple


@dataclass(frozen=True)
class RatFunMatrix:
    """Square matrix of :class:`RatFun` entries; immutable."""

    entries: tuple

    def __post_init__(self):
        rows = tuple(tuple(e if isinstance(e, RatFun) else RatFun.const(e) for e in row) for row in self.entries)
        r = len(rows)
        if r == 0 or any(len(row) != r for row in rows):
            raise InputError("matrix family must be a nonempty square grid")
        object.__setattr__(self, "entries", rows)

    @property
    def size(self) -> int:
        return len(self.entries)

    @classmethod
    def parse_rows(cls, rows) -> "RatFunMatrix":
        return cls(tuple(tuple(parse_ratfun_expr(e) for e in row) for row in rows))

    def substitute(self, inner: Poly) -> "RatFunMatrix":
        return RatFunMatrix(tuple(tuple(e.substitute(inner) for e in row) for row in self.entries))

    def eval_at(self, t0) -> list[list[Fraction]]:
        t0 = Fraction(t0)
        out = []
        for i, row in enumerate(self.entries):
            vals = []
            for j, e in enumerate(row):
                d = e.den(t0)
                if d == 0:
                    raise PoleError(f"entry ({i + 1},{j + 1}) has a pole at t = {t0}", t=t0, entry=(i, j))
                vals.append(e.num(t0) / d)
            out.append(vals)
        return out

    @cached_property
    def integer_form(self) -> IntegerForm:
        dens: list[Poly] = []
        scaled = []
        for row in self.entries:
            srow = []
            for e in row:
                if e.is_zero():
                    srow.append(None)
                    continue
                if e.den not in dens:
                    dens.append(e.den)
                k = dens.index(e.den)
                srow.append((e.num, k))
            scaled.append(srow)
        den_scale = [lcm(*(c.denominator for c in d.coeffs)) for d in dens]
        # entry = num/den_k = (num * s_k) / (den_k * s_k), the latter integral
        numer_lcm = 1
        for srow in scaled:
            for cell in srow:
                if cell is not None:
                    num, k = cell
                    for c in num.coeffs:
                        numer_lcm = lcm(numer_lcm, (c * den_scale[k]).denominator)
        entries = tuple(
            tuple(
                None if cell is None else (_int_poly(cell[0], den_scale[cell[1]] * numer_lcm), cell[1])
                for cell in srow
            )
            for srow in scaled
        )
        int_dens = tuple(_int_poly(d, s) for d, s in zip(dens, den_scale))
        return IntegerForm(numer_lcm, int_dens, entries)

    def step_integer(self, t: int):
        """Integer matrix ``K`` and positive ``D`` with ``M(t) = K / D``."""
        form = self.integer_form
        dvals = [eval_int_poly(d, t) for d in form.dens]
        for k, v in enumerate(dvals):
            if v == 0:
                entry = next(
                    (i, j)
                    for i, row in enumerate(form.entries)
                    for j, cell in enumerate(row)
                    if cell is not None and cell[1] == k
                )
                raise PoleError(f"entry ({entry[0] + 1},{entry[1] + 1}) has a pole at t = {t}", t=t, entry=entry)
        common = lcm(*dvals) if dvals else 1
        K = [
            [0 if cell is None else eval_int_poly(cell[0], t) * (common // dvals[cell[1]]) for cell in row]
            for row in form.entries
        ]
        D = common * form.scale
        if D < 0:
            D = -D
            K = [[-v for v in row] for row in K]
        return K, D

    def eval_mod(self, t0: int, p: int) -> list[list[int]] | None:
        """Entrywise image of ``M(t0)`` in GF(p); ``None`` if ``p`` is unlucky."""
        K, D = self.step_integer(int(t0))
        Dp = D % p
        if Dp == 0:
            return None
        inv = pow(Dp, -1, p)
        return [[v * inv % p for v in row] for row in K]

    def render_rows(self) -> list[list[str]]:
        return [[e.render() for e in row] for row in self.entries]


def eval_matrix_at(M: RatFunMatrix, t0) -> list[list[Fraction]]:
    return M.eval_at(t0)


def eval_matrix_mod(M: RatFunMatrix, t0: int, p: int):
    return M.eval_mod(t0, p)


def parse_matrix_file(text: str) -> tuple[RatFunMatrix, int]:
    """Parse the ``matfam r=<int> k=<int>`` text format; returns (matrix, k)."""
    lines = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        s = raw.strip()
        if not s or s.startswith("#"):
            continue
        lines.append((lineno, s))
    if not lines:
        raise ParseError("empty matrix file")
    lineno, header = lines[0]
    fields = header.split()
    if not fields or fields[0] != "matfam":
        raise ParseError("missing 'matfam' header", line=lineno)
    opts = {}
    for f in fields[1:]:
        key, _, val = f.partition("=")
        if key not in ("r", "k") or not val.lstrip("-").isdigit():
            raise ParseError(f"bad header field {f!r}", line=lineno)
        opts[key] = int(val)
    if "r" not in opts:
        raise ParseError("header needs r=<int>", line=lineno)
    r, k = opts["r"], opts.get("k", 1)
    body = lines[1:]
    if len(body) != r:
        raise ParseError(f"expected {r} matrix rows, found {len(body)}", line=lineno)
    rows = []
    for lineno, s in body:
        cells = [c.strip() for c in s.split("|")]
        if len(cells) != r:
            raise ParseError(f"expected {r} entries, found {len(cells)}", line=lineno)
        row = []
        for c in cells:
            try:
                row.append(parse_ratfun_expr(c))
            except ParseError as exc:
                raise ParseError(f"in entry {c!r}: {exc}", line=lineno) from None
        rows.append(tuple(row))
    return RatFunMatrix(tuple(rows)), k


def render_matrix_file(M: RatFunMatrix, k: int = 1) -> str:
    lines = [f"matfam r={M.size} k={k}"]
    lines.extend(" | ".join(row) for row in M.render_rows())
    return "\n".join(lines) + "\n"
