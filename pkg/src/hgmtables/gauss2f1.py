"""Terminating Gauss hypergeometric polynomials and their contiguity in ``a``.

With ``F(a) = (f(a), theta_x f(a))`` and ``theta_x = x d/dx`` the relation

    F(a) = M(a) F(a + 1),
    M(a) = 1/(a - c + 1) * [[b x + a - c + 1, x - 1], [-a b x, a (1 - x)]]

transports the initial vector ``F(-1) = (1 - b x / c, -b x / c)`` down to any
``a <= -1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import ComputationError, InputError
from .matfac import matfac
from .ratfun import Poly, RatFun, RatFunMatrix


@dataclass(frozen=True)
class GaussManinVector2F1:
    f: Fraction
    theta_f: Fraction


def _check_params(a, c):
    if a != int(a) or a > 0:
        raise InputError("a must be a nonpositive integer")
    a = int(a)
    c = Fraction(c)
    for i in range(-a):
        if c + i == 0:
            raise ComputationError(f"(c)_i vanishes: c + {i} = 0")
    return a, c


def _series_terms(a, b, c, x):
    a, c = _check_params(a, c)
    b, x = Fraction(b), Fraction(x)
    term = Fraction(1)
    yield 0, term
    for i in range(-a):
        term = term * (a + i) * (b + i) / ((c + i) * (i + 1)) * x
        if not term:
            return
        yield i + 1, term


def f21_poly_oracle(a, b, c, x) -> Fraction:
    """Terminating series for ``2F1(a, b; c; x)`` with ``a`` a nonpositive integer."""
    return sum((t for _, t in _series_terms(a, b, c, x)), Fraction(0))


def theta_f21_poly_oracle(a, b, c, x) -> Fraction:
    """``x d/dx 2F1`` from the same series (term ``i`` picks up a factor ``i``)."""
    return sum((i * t for i, t in _series_terms(a, b, c, x)), Fraction(0))


def contiguity_M(a, b, c, x) -> list[list[Fraction]]:
    a, b, c, x = (Fraction(v) for v in (a, b, c, x))
    s = a - c + 1
    if s == 0:
        raise ComputationError("a - c + 1 = 0: contiguity matrix is singular")
    return [
        [(b * x + s) / s, (x - 1) / s],
        [-a * b * x / s, a * (1 - x) / s],
    ]


def contiguity_family(b, c, x) -> RatFunMatrix:
    """``M(t)`` as a matrix of rational functions in the shift variable ``t``."""
    b, c, x = Fraction(b), Fraction(c), Fraction(x)
    t = RatFun(Poly.t())
    s = t - (c - 1)
    return RatFunMatrix(
        (
            ((t + (b * x - c + 1)) / s, RatFun.const(x - 1) / s),
            ((t * (-b * x)) / s, (t * (1 - x)) / s),
        )
    )


def initial_vector(b, c, x) -> GaussManinVector2F1:
    b, c, x = Fraction(b), Fraction(c), Fraction(x)
    return GaussManinVector2F1(1 - b * x / c, -b * x / c)


def gauss_manin_2f1(a: int, b, c, x, strategy: str = "exact", **tuning) -> GaussManinVector2F1:
    """``F(a) = M(a) M(a+1) ... M(-2) F(-1)`` evaluated by the matrix-factorial engine."""
    a, c = _check_params(a, c)
    b, x = Fraction(b), Fraction(x)
    if a == 0:
        return GaussManinVector2F1(Fraction(1), Fraction(0))
    init = initial_vector(b, c, x)
    if a == -1:
        return init
    f, th = matfac(contiguity_family(b, c, x), [init.f, init.theta_f], a, -2, strategy, **tuning)
    return GaussManinVector2F1(f, th)


def gauss_manin_2f1_float(a: int, b, c, x) -> tuple[float, float]:
    """The same recurrence in binary64.  Loses accuracy on long chains."""
    a, c = _check_params(a, c)
    b, c, x = float(b), float(c), float(x)
    if a == 0:
        return 1.0, 0.0
    f, th = 1.0 - b * x / c, -b * x / c
    for t in range(-2, a - 1, -1):
        s = t - c + 1.0
        f, th = ((b * x + s) * f + (x - 1.0) * th) / s, (-t * b * x * f + t * (1.0 - x) * th) / s
        if not (math.isfinite(f) and math.isfinite(th)):
            raise OverflowError(f"binary64 overflow at a = {t}")
    return f, th


# -- intersection-matrix decomposition of the a-shift -----------------------
#
# Every intersection matrix below carries a factor 2*pi*i and every inverse a
# factor 1/(2*pi*i).  The product uses two of each, so the factors cancel and
# are dropped; all arithmetic stays rational.


@dataclass(frozen=True)
class AlphaChart:
    a0: Fraction
    a1: Fraction
    a2: Fraction
    a3: Fraction

    def __post_init__(self):
        for name in ("a0", "a1", "a2", "a3"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.a0 + self.a1 + self.a2 + self.a3 != 0:
            raise InputError("alpha components must sum to zero")

    @classmethod
    def from_abc(cls, a, b, c) -> "AlphaChart":
        a, b, c = Fraction(a), Fraction(b), Fraction(c)
        return cls(a - c + 1, b, -a, c - b - 1)

    def shifted(self) -> "AlphaChart":
        """``alpha_(2)``: the chart of ``a + 1``."""
        return AlphaChart(self.a0 + 1, self.a1, self.a2 - 1, self.a3)


def _nz(value, name):
    if value == 0:
        raise ZeroDivisionError(f"{name} = 0 in the intersection matrices")
    return value


def intersection_C(al: AlphaChart):
    a0, a1, a2 = _nz(al.a0, "alpha0"), _nz(al.a1, "alpha1"), _nz(al.a2, "alpha2")
    return [[1 / a0 + 1 / a1, 1 / a0], [1 / a0, 1 / a0 + 1 / a2]]


def intersection_C_inv(al: AlphaChart):
    a1, a2, a3 = _nz(al.a1, "alpha1"), _nz(al.a2, "alpha2"), _nz(al.a3, "alpha3")
    k = a1 * a2 / a3
    return [[k * (a1 + a3) / a2, k], [k, k * (a2 + a3) / a1]]


def intersection_Q2(al: AlphaChart):
    a0, a1 = _nz(al.a0, "alpha0"), _nz(al.a1, "alpha1")
    return [[1 / a0 + 1 / a1, 1 / a0], [1 / a0, 1 / a0]]


def intersection_P2(al: AlphaChart):
    a1, a2 = _nz(al.a1, "alpha1"), _nz(al.a2, "alpha2")
    return [[1 / a1, -1 / a2], [Fraction(0), -1 / a2]]


def intersection_P2_inv(al: AlphaChart):
    return [[al.a1, -al.a1], [Fraction(0), -al.a2]]


def diag_D2(x):
    x = Fraction(x)
    return [[Fraction(1), Fraction(0)], [Fraction(0), 1 - x]]


def _mm(A, B):
    return [[sum(A[i][k] * B[k][j] for k in range(2)) for j in range(2)] for i in range(2)]


def build_U2_decomposition(alpha: AlphaChart, x) -> list[list[Fraction]]:
    """``U2(alpha_(2); x) = C(alpha) P2(alpha)^-1 D2(x) Q2(alpha_(2)) C(alpha_(2))^-1``."""
    shifted = alpha.shifted()
    U = intersection_C(alpha)
    for factor in (
        intersection_P2_inv(alpha),
        diag_D2(x),
        intersection_Q2(shifted),
        intersection_C_inv(shifted),
    ):
        U = _mm(U, factor)
    return U


def contiguity_from_U2(alpha: AlphaChart, x) -> list[list[Fraction]]:
    """Rescale ``U2`` to the ``(f, theta_x f)`` normalization of ``M(a)``."""
    a2 = alpha.a2
    if a2 == 1:
        raise ZeroDivisionError("alpha2 - 1 = 0")
    left = [[Fraction(1), Fraction(0)], [Fraction(0), a2]]
    right = [[Fraction(1), Fraction(0)], [Fraction(0), 1 / (a2 - 1)]]
    return _mm(_mm(left, build_U2_decomposition(alpha, x)), right)
