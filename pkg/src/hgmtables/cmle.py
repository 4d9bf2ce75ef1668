"""Conditional maximum likelihood of the cell parameters of a two-way table.

Row and column scalings leave the conditional law unchanged, so parameters are
charted by fixing a reference row and column to 1; the remaining ("free")
cells carry generalized odds ratios.  The fit maximizes

    l(p) = sum_ij u_ij log p_ij - log Z(beta; p)

by a damped Newton iteration in log coordinates.  Gradient and Hessian are
exact (``u - E`` and the covariance of the free cells), the iterate is kept as
rationals with denominators of at most 128 bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .driver import z_hgm
from .errors import InputError, NonConvergence
from .linalg import solve
from .tables import MarginalSums, as_params, moments, z_dp, z_naive

Z_METHODS = {"naive": z_naive, "dp": z_dp, "hgm": z_hgm}
DENOMINATOR_LIMIT = 2**128
_MAX_LOG_STEP = 30.0


def z_evaluator(method):
    if callable(method):
        return method
    try:
        return Z_METHODS[method]
    except KeyError:
        raise InputError(f"unknown method {method!r}; expected one of {', '.join(Z_METHODS)}") from None


def _counts(u):
    grid = tuple(tuple(int(v) for v in row) for row in u)
    if not grid or len({len(r) for r in grid}) != 1:
        raise InputError("observed table must be a nonempty rectangular grid")
    if any(v < 0 for row in grid for v in row):
        raise InputError("observed counts must be nonnegative")
    return grid


def _refs(shape, ref_row, ref_col):
    r1, r2 = shape
    ref_row = r1 - 1 if ref_row is None else ref_row
    if not (0 <= ref_row < r1 and 0 <= ref_col < r2):
        raise InputError(f"reference cell ({ref_row + 1}, {ref_col + 1}) outside a {r1}x{r2} table")
    return ref_row, ref_col


def free_cells(shape, ref_row=None, ref_col=0):
    ref_row, ref_col = _refs(shape, ref_row, ref_col)
    return [(i, j) for i in range(shape[0]) for j in range(shape[1]) if i != ref_row and j != ref_col]


def generalized_odds_ratios(u, ref_row=None, ref_col=0):
    """``u_ij u_rc / (u_ic u_rj)`` off the reference row ``r`` and column ``c``.

    Indices are 0-based; ``ref_row=None`` means the last row.  A cross ratio
    with a zero factor is reported as 0.
    """
    u = _counts(u)
    r, c = _refs((len(u), len(u[0])), ref_row, ref_col)
    out = []
    for i, row in enumerate(u):
        vals = []
        for j, v in enumerate(row):
            if i == r or j == c:
                vals.append(Fraction(1))
                continue
            factors = (v, u[r][c], u[i][c], u[r][j])
            vals.append(Fraction(v * u[r][c], u[i][c] * u[r][j]) if all(factors) else Fraction(0))
        out.append(tuple(vals))
    return tuple(out)


def _log_fraction(q: Fraction) -> float:
    # math.log accepts arbitrarily large ints, a float conversion would overflow
    return math.log(q.numerator) - math.log(q.denominator)


def _loglik(u, p, Z) -> float:
    total = -_log_fraction(Z)
    for urow, prow in zip(u, p):
        for k, q in zip(urow, prow):
            if k:
                if not q:
                    return -math.inf
                total += k * _log_fraction(q)
    return total


def conditional_loglik(u, p, ref_row=None, ref_col=0, method="dp"):
    """``(l, gradient)``; the gradient is ``u - E`` at each free cell, exact."""
    u = _counts(u)
    beta = MarginalSums.of(u)
    p = as_params(p, beta.shape)
    cells = free_cells(beta.shape, ref_row, ref_col)
    m = moments(beta, p, cells=[], z=z_evaluator(method))
    grad = {(i, j): u[i][j] - m.mean[i][j] for i, j in cells}
    return _loglik(u, p, m.Z), grad


@dataclass
class CmleResult:
    chart: tuple
    loglik: float
    gradient_norm: float
    iterations: int
    ref_row: int
    ref_col: int
    expectations: tuple
    boundary_cells: list = field(default_factory=list)


def _grid(shape, q):
    return tuple(tuple(q.get((i, j), Fraction(1)) for j in range(shape[1])) for i in range(shape[0]))


def cmle_fit(u, ref_row=None, ref_col=0, tol: float = 1e-10, max_iter: int = 100,
             method="dp", init=None) -> CmleResult:
    """Maximize the conditional likelihood over the free cells.

    Free cells with a zero count have their maximum on the boundary
    (``dl/dlog p_ij = -E[U_ij] < 0`` everywhere) and are pinned to 0 up front;
    they are listed in ``boundary_cells``.  ``init`` overrides the starting
    chart; by default the observed odds ratios are used (1 where undefined).
    """
    u = _counts(u)
    beta = MarginalSums.of(u)
    shape = beta.shape
    ref_row, ref_col = _refs(shape, ref_row, ref_col)
    z = z_evaluator(method)
    start = generalized_odds_ratios(u, ref_row, ref_col) if init is None else as_params(init, shape)
    cells = free_cells(shape, ref_row, ref_col)
    boundary = [c for c in cells if u[c[0]][c[1]] == 0]
    active = [c for c in cells if u[c[0]][c[1]] > 0]
    q = {c: Fraction(0) for c in boundary}
    for i, j in active:
        q[(i, j)] = start[i][j] if start[i][j] > 0 else Fraction(1)

    gnorm = math.inf
    for it in range(max_iter + 1):
        p = _grid(shape, q)
        m = moments(beta, p, cells=active, z=z)
        g = [u[i][j] - m.mean[i][j] for i, j in active]
        gnorm = math.sqrt(sum(float(v) ** 2 for v in g))
        ll = _loglik(u, p, m.Z)
        if gnorm <= tol:
            return CmleResult(p, ll, gnorm, it, ref_row, ref_col, m.mean, boundary)
        if it == max_iter:
            break
        H = [[m.cov[a][b] for b in active] for a in active]
        delta = solve(H, g)
        if delta is None:
            raise NonConvergence("singular information matrix", {"iterations": it, "gradient_norm": gnorm})
        step = [max(-_MAX_LOG_STEP, min(_MAX_LOG_STEP, float(d))) for d in delta]
        for _ in range(60):
            trial = dict(q)
            for c, s in zip(active, step):
                trial[c] = (q[c] * Fraction(math.exp(s))).limit_denominator(DENOMINATOR_LIMIT)
            tp = _grid(shape, trial)
            if _loglik(u, tp, z(beta, tp)) >= ll - 1e-12 * max(1.0, abs(ll)):
                q = trial
                break
            step = [s / 2 for s in step]
        else:
            raise NonConvergence("line search failed", {"iterations": it, "gradient_norm": gnorm})
    raise NonConvergence(
        f"gradient norm {gnorm:.3g} above tolerance after {max_iter} iterations",
        {"iterations": max_iter, "gradient_norm": gnorm},
    )
