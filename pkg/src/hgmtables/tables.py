"""Two-way contingency tables with fixed marginal sums.

Brute-force routes here (fiber enumeration, the row-by-row dynamic program)
are the reference every faster route is checked against.  Cell parameters are
grids of Fractions; ``0**0 == 1`` so zero cells with zero counts contribute 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from .errors import ComputationError, InputError

Grid = tuple[tuple[Fraction, ...], ...]


@dataclass(frozen=True)
class MarginalSums:
    rows: tuple[int, ...]
    cols: tuple[int, ...]

    def __post_init__(self):
        rows = tuple(int(v) for v in self.rows)
        cols = tuple(int(v) for v in self.cols)
        if not rows or not cols:
            raise InputError("need at least one row and one column")
        if any(v < 0 for v in rows + cols):
            raise InputError("marginal sums must be nonnegative")
        if sum(rows) != sum(cols):
            raise InputError(f"inconsistent marginals: row total {sum(rows)} != column total {sum(cols)}")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)

    @classmethod
    def of(cls, table) -> "MarginalSums":
        return cls(tuple(sum(r) for r in table), tuple(sum(c) for c in zip(*table)))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.cols)

    @property
    def total(self) -> int:
        return sum(self.rows)

    def vector(self) -> tuple[int, ...]:
        return self.rows + self.cols


def as_params(p, shape=None) -> Grid:
    grid = tuple(tuple(Fraction(v) for v in row) for row in p)
    if shape is not None and (len(grid) != shape[0] or any(len(r) != shape[1] for r in grid)):
        raise InputError(f"parameter grid must have shape {shape[0]}x{shape[1]}")
    if any(v < 0 for row in grid for v in row):
        raise InputError("cell parameters must be nonnegative")
    return grid


def ones(shape) -> Grid:
    return tuple(tuple(Fraction(1) for _ in range(shape[1])) for _ in range(shape[0]))


def build_A(r1: int, r2: int) -> list[list[int]]:
    """0/1 matrix mapping the row-major flattened table to its marginal vector."""
    A = []
    for i in range(r1):
        A.append([1 if k // r2 == i else 0 for k in range(r1 * r2)])
    for j in range(r2):
        A.append([1 if k % r2 == j else 0 for k in range(r1 * r2)])
    return A


def _compositions(total: int, caps):
    """Vectors ``v`` with ``0 <= v[j] <= caps[j]`` summing to ``total``, lexicographic."""
    if len(caps) == 1:
        if total <= caps[0]:
            yield (total,)
        return
    rest = sum(caps[1:])
    for v in range(max(0, total - rest), min(total, caps[0]) + 1):
        for tail in _compositions(total - v, caps[1:]):
            yield (v,) + tail


def enumerate_fiber(beta: MarginalSums) -> list[tuple[tuple[int, ...], ...]]:
    """All tables with the given marginals, lexicographic on the flattened vector."""
    out = []

    def rec(i, remaining, acc):
        if i == len(beta.rows):
            if not any(remaining):
                out.append(tuple(acc))
            return
        if i == len(beta.rows) - 1:
            if sum(remaining) == beta.rows[i]:
                out.append(tuple(acc) + (tuple(remaining),))
            return
        for row in _compositions(beta.rows[i], remaining):
            rec(i + 1, tuple(c - v for c, v in zip(remaining, row)), acc + [row])

    rec(0, beta.cols, [])
    return out


def weight(u, p) -> Fraction:
    """``p^u / u!`` with ``0**0 == 1``."""
    num = Fraction(1)
    den = 1
    for urow, prow in zip(u, p):
        for k, q in zip(urow, prow):
            if k:
                num *= q**k
                den *= factorial(k)
    return num / den


def z_naive(beta: MarginalSums, p) -> Fraction:
    p = as_params(p, beta.shape)
    fiber = enumerate_fiber(beta)
    if not fiber:
        raise InputError("empty fiber")
    return sum((weight(u, p) for u in fiber), Fraction(0))


def z_dp(beta: MarginalSums, p) -> Fraction:
    """Normalizing constant by a dynamic program over remaining column sums."""
    p = as_params(p, beta.shape)
    r1 = len(beta.rows)
    states = {beta.cols: Fraction(1)}
    for i in range(r1):
        prow = p[i]
        nxt: dict[tuple[int, ...], Fraction] = {}
        for remaining, acc in states.items():
            for row in _compositions(beta.rows[i], remaining):
                # zero weights are kept so an empty fiber stays distinguishable from Z = 0
                w = _row_weight(row, prow)
                key = tuple(c - v for c, v in zip(remaining, row))
                nxt[key] = nxt.get(key, 0) + acc * w
        states = nxt
    z = states.get(tuple(0 for _ in beta.cols))
    if z is None:
        raise InputError("empty fiber")
    return z


def _row_weight(row, prow) -> Fraction:
    w = Fraction(1)
    for k, q in zip(row, prow):
        if k:
            w *= q**k / factorial(k)
    return w


def _z_or_zero(z, rows, cols, p):
    if any(v < 0 for v in rows) or any(v < 0 for v in cols):
        return Fraction(0)
    try:
        return z(MarginalSums(rows, cols), p)
    except InputError:
        return Fraction(0)


def _shifted(beta: MarginalSums, cells):
    rows, cols = list(beta.rows), list(beta.cols)
    for i, j in cells:
        rows[i] -= 1
        cols[j] -= 1
    return tuple(rows), tuple(cols)


def expectations_naive(beta: MarginalSums, p) -> Grid:
    """``E[U_ij]`` by summing over the fiber."""
    p = as_params(p, beta.shape)
    fiber = enumerate_fiber(beta)
    r1, r2 = beta.shape
    Z = Fraction(0)
    acc = [[Fraction(0)] * r2 for _ in range(r1)]
    for u in fiber:
        w = weight(u, p)
        if not w:
            continue
        Z += w
        for i in range(r1):
            for j in range(r2):
                if u[i][j]:
                    acc[i][j] += u[i][j] * w
    if not Z:
        raise ComputationError("normalizing constant is zero")
    return tuple(tuple(v / Z for v in row) for row in acc)


def expectations_from_z(beta: MarginalSums, p, z=z_dp) -> Grid:
    """``E[U_ij] = p_ij Z(beta - e_i - f_j) / Z(beta)`` using any Z evaluator."""
    p = as_params(p, beta.shape)
    Z = z(beta, p)
    if not Z:
        raise ComputationError("normalizing constant is zero")
    r1, r2 = beta.shape
    return tuple(
        tuple(
            p[i][j] * _z_or_zero(z, *_shifted(beta, [(i, j)]), p) / Z if p[i][j] else Fraction(0)
            for j in range(r2)
        )
        for i in range(r1)
    )


@dataclass(frozen=True)
class Moments:
    Z: Fraction
    mean: Grid
    # cov[(i, j)][(k, l)] for the requested cells
    cov: dict


def moments(beta: MarginalSums, p, cells=None, z=z_dp) -> Moments:
    """Normalizing constant, means, and covariances of the cells in ``cells``.

    Second factorial moments come from shifted normalizing constants:
    ``E[U_a U_b] = p_a p_b Z(beta - a - b) / Z`` for ``a != b`` and
    ``E[U_a (U_a - 1)] = p_a^2 Z(beta - 2a) / Z``.
    """
    p = as_params(p, beta.shape)
    Z = z(beta, p)
    if not Z:
        raise ComputationError("normalizing constant is zero")
    r1, r2 = beta.shape
    cache = {}

    def zs(cellset):
        key = tuple(sorted(cellset))
        if key not in cache:
            cache[key] = _z_or_zero(z, *_shifted(beta, key), p)
        return cache[key]

    mean = tuple(
        tuple(p[i][j] * zs([(i, j)]) / Z if p[i][j] else Fraction(0) for j in range(r2)) for i in range(r1)
    )
    cells = list(cells) if cells is not None else [(i, j) for i in range(r1) for j in range(r2)]
    cov = {}
    for a in cells:
        cov[a] = {}
        for b in cells:
            pa, pb = p[a[0]][a[1]], p[b[0]][b[1]]
            ma, mb = mean[a[0]][a[1]], mean[b[0]][b[1]]
            if not pa or not pb:
                cov[a][b] = Fraction(0)
                continue
            second = pa * pb * zs([a, b]) / Z
            if a == b:
                second += ma
            cov[a][b] = second - ma * mb
    return Moments(Z, mean, cov)


def conditional_pmf(x, beta: MarginalSums, p, z=z_naive) -> Fraction:
    p = as_params(p, beta.shape)
    if MarginalSums.of(x) != beta or any(v < 0 for row in x for v in row):
        raise InputError("table is not in the fiber of the given marginals")
    Z = z(beta, p)
    if not Z:
        raise ComputationError("normalizing constant is zero")
    return weight(x, p) / Z


def torus_scale(p, row_scale, col_scale) -> Grid:
    return tuple(
        tuple(Fraction(g) * Fraction(h) * v for h, v in zip(col_scale, row)) for g, row in zip(row_scale, p)
    )
