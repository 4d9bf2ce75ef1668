"""Exact integer/rational helpers: prime fields, CRT and rational reconstruction.

Rationals are :class:`fractions.Fraction` throughout; they are always kept in
lowest terms with a positive denominator.  Residues modulo a prime are plain
ints in ``[0, p)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt, prod

from sympy import isprime, prevprime

from .errors import InputError, ParseError

WORD_BITS = 62

_RATIONAL_RE = re.compile(r"-?\d+(?:/\d+)?")


def parse_rational(token: str) -> Fraction:
    """Parse ``<int>`` or ``<int>/<uint>`` (optional leading ``-``, no spaces)."""
    token = token.strip()
    if not _RATIONAL_RE.fullmatch(token):
        raise ParseError(f"not a rational number: {token!r}")
    if "/" in token:
        num, den = token.split("/")
        if int(den) == 0:
            raise ParseError(f"zero denominator in {token!r}")
        return Fraction(int(num), int(den))
    return Fraction(int(token))


def format_rational(q) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def mod_reduce(q, p: int) -> int | None:
    """Image of ``q`` in GF(p), or ``None`` when ``p`` divides the denominator."""
    q = Fraction(q)
    den = q.denominator % p
    if den == 0:
        return None
    return q.numerator * pow(den, -1, p) % p


def crt_combine(residues) -> tuple[int, int]:
    """Combine ``[(value, modulus), ...]`` into ``(value mod P, P)``."""
    residues = list(residues)
    if not residues:
        raise InputError("crt_combine needs at least one residue")
    moduli = [m for _, m in residues]
    basis = CRTBasis(moduli)
    return basis.combine([v for v, _ in residues]), basis.modulus


class CRTBasis:
    """Precomputed idempotents for a fixed set of pairwise coprime moduli.

    Combining a whole vector of residue tuples against one basis costs one
    dot product per entry.
    """

    def __init__(self, moduli):
        moduli = list(moduli)
        for i, a in enumerate(moduli):
            if a < 2:
                raise InputError(f"invalid modulus {a}")
            for b in moduli[i + 1 :]:
                if gcd(a, b) != 1:
                    raise InputError(f"moduli {a} and {b} are not coprime")
        self.moduli = moduli
        self.modulus = prod(moduli)
        self._coeffs = []
        for m in moduli:
            rest = self.modulus // m
            self._coeffs.append(rest * pow(rest % m, -1, m))

    def combine(self, values) -> int:
        total = 0
        for v, m, c in zip(values, self.moduli, self._coeffs):
            if not 0 <= v < m:
                raise InputError(f"residue {v} out of range for modulus {m}")
            total += v * c
        return total % self.modulus


def rational_reconstruct(g: int, P: int) -> Fraction | None:
    """Recover ``n/d`` with ``n = g*d (mod P)`` and ``|n|, d <= isqrt(P // 2)``.

    Half-extended Euclid stopped at the first remainder below the bound.
    Returns ``None`` when no such fraction exists.
    """
    if not 0 <= g < P:
        raise InputError("residue must lie in [0, P)")
    bound = isqrt(P // 2)
    r0, r1 = P, g
    t0, t1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        t0, t1 = t1, t0 - q * t1
    n, d = r1, t1
    if d < 0:
        n, d = -n, -d
    if d == 0 or d > bound or gcd(n, d) != 1 or gcd(d, P) != 1:
        return None
    return Fraction(n, d)


_PRIME_CACHE: dict[int, list[int]] = {}


def word_primes(count: int, bits: int = WORD_BITS) -> list[int]:
    """The ``count`` largest primes below ``2**bits`` in descending order."""
    if bits < 3:
        raise InputError("prime bit size too small")
    cached = _PRIME_CACHE.setdefault(bits, [])
    while len(cached) < count:
        cached.append(prevprime(cached[-1] if cached else 1 << bits))
    return cached[:count]


def is_prime(n: int) -> bool:
    return bool(isprime(n))


@dataclass
class ResidueSystem:
    """Per-prime images of one vector-valued computation."""

    size: int
    residues: dict[int, list[int]] = field(default_factory=dict)
    skipped: set[int] = field(default_factory=set)

    def add(self, p: int, values) -> None:
        values = list(values)
        if len(values) != self.size:
            raise InputError("residue vector has the wrong length")
        if p in self.skipped:
            raise InputError(f"prime {p} was marked unlucky")
        self.residues[p] = values

    def skip(self, p: int) -> None:
        self.residues.pop(p, None)
        self.skipped.add(p)

    @property
    def primes(self) -> list[int]:
        return sorted(self.residues)

    def modulus(self) -> int:
        return prod(self.residues)

    def reconstruct(self) -> list[Fraction] | None:
        """CRT every entry over the usable primes and reconstruct; None on failure."""
        primes = self.primes
        if not primes:
            return None
        basis = CRTBasis(primes)
        out = []
        for i in range(self.size):
            g = basis.combine([self.residues[p][i] for p in primes])
            q = rational_reconstruct(g, basis.modulus)
            if q is None:
                return None
            out.append(q)
        return out
