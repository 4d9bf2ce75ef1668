"""Difference-HGM orchestration: table problem -> contiguity chain -> Z and E.

The 2x2 case is built in.  A 2x2 problem is permuted into the base form
``[[u11, 0], [u21, u22]] + i [[-1, 1], [1, -1]]`` so that

    Z = p11^u11 p21^u21 p22^u22 / (u11! u21! u22!) * 2F1(-u11, -u22; u21 + 1; x),
    x = p12 p21 / (p11 p22),

and ``E[U12] = theta_x f / f``; the other cells follow from the marginals.

For larger tables the contiguity matrices ``C_k(t)`` and the initial
Gauss-Manin vector must be supplied by the caller (see :func:`make_plan`).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial

from .errors import ComputationError, InputError
from .gauss2f1 import gauss_manin_2f1
from .matfac import matfac
from .ratfun import RatFunMatrix
from .tables import MarginalSums, as_params, expectations_from_z, z_dp

_PERMS = ((False, False), (False, True), (True, False), (True, True))


def _permute(grid, row_swap: bool, col_swap: bool):
    rows = list(grid)
    if row_swap:
        rows = rows[::-1]
    return tuple(tuple(r[::-1]) if col_swap else tuple(r) for r in rows)


@dataclass(frozen=True)
class Base2x2:
    u11: int
    u21: int
    u22: int
    x: Fraction | None
    prefactor: Fraction | None
    row_swap: bool = False
    col_swap: bool = False
    # Set when a zero marginal or zero parameter rules out the 2F1 route.
    degenerate: bool = False

    @property
    def abc(self) -> tuple[int, int, int]:
        return -self.u11, -self.u22, self.u21 + 1

    def unpermute(self, grid):
        # Both swaps are involutions and commute.
        return _permute(grid, self.row_swap, self.col_swap)


def reduce_2x2(beta: MarginalSums, p) -> Base2x2:
    if beta.shape != (2, 2):
        raise InputError("reduce_2x2 needs a 2x2 problem")
    p = as_params(p, (2, 2))
    fallback = None
    for rs, cs in _PERMS:
        rows = beta.rows[::-1] if rs else beta.rows
        cols = beta.cols[::-1] if cs else beta.cols
        if cols[0] < rows[0]:
            continue
        q = _permute(p, rs, cs)
        u11, u22 = rows[0], cols[1]
        u21 = cols[0] - rows[0]
        positive = q[0][0] > 0 and q[1][0] > 0 and q[1][1] > 0
        if positive and min(beta.rows + beta.cols) > 0:
            x = q[0][1] * q[1][0] / (q[0][0] * q[1][1])
            pref = q[0][0] ** u11 * q[1][0] ** u21 * q[1][1] ** u22 / (factorial(u11) * factorial(u21) * factorial(u22))
            return Base2x2(u11, u21, u22, x, pref, rs, cs)
        if fallback is None:
            fallback = Base2x2(u11, u21, u22, None, None, rs, cs, degenerate=True)
    assert fallback is not None  # min row sum <= max column sum always admits a form
    return fallback


def hgm_2x2(beta: MarginalSums, p, strategy: str = "exact", **tuning):
    """Exact ``(Z, E)`` for a 2x2 problem via the a-contiguity chain of 2F1."""
    p = as_params(p, (2, 2))
    base = reduce_2x2(beta, p)
    if base.degenerate:
        return z_dp(beta, p), expectations_from_z(beta, p, z_dp)
    a, b, c = base.abc
    gm = gauss_manin_2f1(a, b, c, base.x, strategy, **tuning)
    if not gm.f:
        raise ComputationError("2F1 value vanished; expectations undefined")
    Z = base.prefactor * gm.f
    e12 = gm.theta_f / gm.f
    E = ((base.u11 - e12, e12), (base.u21 + e12, base.u22 - e12))
    return Z, base.unpermute(E)


def z_hgm(beta: MarginalSums, p, strategy: str = "exact", **tuning) -> Fraction:
    """Normalizing constant only; a drop-in Z evaluator for 2x2 problems."""
    if beta.shape != (2, 2):
        raise InputError("the built-in HGM route covers 2x2 tables only")
    return hgm_2x2(beta, p, strategy, **tuning)[0]


@dataclass(frozen=True)
class ContiguityPlan:
    """Shift schedule of the general difference HGM.

    ``B0 = (1, ..., 1, |beta| - r1 + 1; beta_cols)`` and direction ``k`` is
    applied ``steps[k]`` times with ``C_k(0)`` first.
    """

    beta: MarginalSums
    steps: tuple[int, ...]
    families: tuple[RatFunMatrix, ...]

    @property
    def B0(self) -> tuple[int, ...]:
        r1 = len(self.beta.rows)
        return (1,) * (r1 - 1) + (self.beta.total - r1 + 1,) + self.beta.cols

    def B(self, k: int) -> tuple[int, ...]:
        """Marginal vector after the first ``k`` directions."""
        vec = list(self.B0)
        r1 = len(self.beta.rows)
        for i in range(k):
            vec[i] += self.steps[i]
            vec[r1 - 1] -= self.steps[i]
        return tuple(vec)


def gauss_manin_rank(r1: int, r2: int) -> int:
    return comb(r1 + r2 - 2, r1 - 1)


def make_plan(beta: MarginalSums, families) -> ContiguityPlan:
    r1, r2 = beta.shape
    families = tuple(families)
    if r1 < 2:
        raise InputError("need at least two rows")
    if len(families) != r1 - 1:
        raise InputError(f"expected {r1 - 1} contiguity families, got {len(families)}")
    r = gauss_manin_rank(r1, r2)
    for k, fam in enumerate(families, 1):
        if fam.size != r:
            raise InputError(f"family C_{k} has size {fam.size}, expected {r}")
    if any(v < 1 for v in beta.rows[:-1]):
        raise InputError("leading row sums must be positive")
    steps = tuple(v - 1 for v in beta.rows[:-1])
    return ContiguityPlan(beta, steps, families)


def hgm_general(plan: ContiguityPlan, initial, strategy: str = "exact", **tuning) -> list[Fraction]:
    """``F(beta) = prod_k [C_k(steps_k - 1) ... C_k(0)] F(B0)``.

    ``initial`` is ``F(B0; p)``, supplied by the caller.
    """
    vec = [Fraction(v) for v in initial]
    for fam, n in zip(plan.families, plan.steps):
        if len(vec) != fam.size:
            raise InputError(f"vector of length {len(vec)} does not match family of size {fam.size}")
        tuning = {**tuning, "ascending": True}
        vec = matfac(fam, vec, 0, n - 1, strategy, **tuning)
    return vec
