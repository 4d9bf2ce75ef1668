"""Expectations at parameters with zero cells, by exact rational interpolation.

Move off the zero set along ``p(s) = p0 + s d`` with ``d`` positive only at the
zero cells, sample the expectations at ``s > 0``, fit each cell as an exact
rational function of ``s`` and evaluate the fit at ``s = 0``.

``Z(p(s))`` is a polynomial in ``s`` whose degree is at most the largest total
count any table can place on the zero cells, and ``p_ij dZ/dp_ij`` has the
same bound, so every expectation is a ratio of two polynomials of that degree.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .errors import FitError, InconsistentSamples, InputError, SingularSystem
from .linalg import nullspace
from .ratfun import Poly, RatFun
from .tables import MarginalSums, as_params, expectations_from_z, z_dp

MAX_ATTEMPTS = 4


@dataclass(frozen=True)
class FittedRatFun:
    fn: RatFun
    d_num: int
    d_den: int

    def __call__(self, s) -> Fraction:
        return self.fn(s)


def fit_rational_function(points, d_num: int, d_den: int) -> FittedRatFun:
    """Exact ``P/Q`` with ``deg P <= d_num``, ``deg Q <= d_den`` through ``points``.

    The first ``d_num + d_den + 1`` points determine the fit; any further
    points must agree exactly, otherwise :class:`InconsistentSamples`.
    """
    points = [(Fraction(s), Fraction(v)) for s, v in points]
    need = d_num + d_den + 1
    if d_num < 0 or d_den < 0:
        raise InputError("degree bounds must be nonnegative")
    if len(points) < need:
        raise InputError(f"need at least {need} points, got {len(points)}")
    if len({s for s, _ in points}) != len(points):
        raise InputError("sample abscissae must be distinct")
    rows = []
    for s, v in points[:need]:
        powers = [s**k for k in range(max(d_num, d_den) + 1)]
        rows.append(powers[: d_num + 1] + [-v * w for w in powers[: d_den + 1]])
    basis = nullspace(rows, d_num + d_den + 2)
    if not basis:
        raise SingularSystem("interpolation system has only the trivial solution")
    coeffs = basis[0]
    P, Q = Poly(coeffs[: d_num + 1]), Poly(coeffs[d_num + 1:])
    if Q.is_zero():
        raise SingularSystem("fitted denominator vanishes identically")
    fn = RatFun(P, Q)
    for s, v in points:
        if not fn.den(s) or fn(s) != v:
            raise InconsistentSamples(f"fit disagrees with the sample at s = {s}")
    return FittedRatFun(fn, d_num, d_den)


def degree_bound(beta: MarginalSums, zero_cells) -> int:
    """Largest total count a table in the fiber can put on ``zero_cells``."""
    per_cell = sum(min(beta.rows[i], beta.cols[j]) for i, j in zero_cells)
    return min(beta.total, per_cell)


@dataclass(frozen=True)
class ZeroInterpResult:
    values: tuple
    direction: tuple
    offsets: tuple
    degree: int
    seed: int
    attempts: int


def _direction(p, rng):
    return tuple(
        tuple(Fraction(rng.randint(1, 10**6), 10**6) if not v else Fraction(0) for v in row) for row in p
    )


def expectation_with_zeros(beta: MarginalSums, p, evaluator=None, seed: int = 0,
                           offset_range=20, extra: int = 1) -> ZeroInterpResult:
    """``E[U]`` at ``p`` (which may contain zeros) by interpolation in ``s``.

    ``evaluator(beta, p)`` must return the exact expectation grid for strictly
    positive ``p``; the default is the shifted-Z identity over the row DP.
    If every table puts mass on a zero cell (so ``Z(p) = 0``) the value returned
    is the limit along the line.
    """
    p = as_params(p, beta.shape)
    if evaluator is None:
        def evaluator(b, q):
            return expectations_from_z(b, q, z_dp)
    if extra < 1:
        raise InputError("at least one held-out sample is required")
    offset_range = Fraction(offset_range)
    if offset_range <= 0:
        raise InputError("offset range must be positive")
    zero_cells = [(i, j) for i, row in enumerate(p) for j, v in enumerate(row) if not v]
    if not zero_cells:
        return ZeroInterpResult(evaluator(beta, p), (), (), 0, seed, 0)

    D = degree_bound(beta, zero_cells)
    n = 2 * D + 1 + extra
    r1, r2 = beta.shape
    last_error: FitError | None = None
    for attempt in range(MAX_ATTEMPTS):
        rng = random.Random(seed + attempt)
        d = _direction(p, rng)
        offsets = tuple(offset_range * k / n for k in range(1, n + 1))
        samples = []
        for s in offsets:
            q = tuple(tuple(a + s * b for a, b in zip(pr, dr)) for pr, dr in zip(p, d))
            samples.append(evaluator(beta, q))
        try:
            values = tuple(
                tuple(
                    fit_rational_function([(s, E[i][j]) for s, E in zip(offsets, samples)], D, D)(0)
                    for j in range(r2)
                )
                for i in range(r1)
            )
        except FitError as exc:
            last_error = exc
            continue
        return ZeroInterpResult(values, d, offsets, D, seed + attempt, attempt + 1)
    raise InconsistentSamples(f"interpolation failed after {MAX_ATTEMPTS} directions: {last_error}")
