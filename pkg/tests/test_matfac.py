from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from hgmtables.errors import InputError, ReconstructionFailure
from hgmtables.exact import word_primes
from hgmtables.matfac import matfac, matfac_exact, matfac_modular
from hgmtables.ratfun import Poly, RatFun, RatFunMatrix

from .chains import random_chain

T = RatFun(Poly.t())


def naive_chain(family, initial, lo, hi, ascending=False):
    """Oracle: evaluate each matrix exactly and multiply one step at a time."""
    vec = [Fraction(v) for v in initial]
    ts = range(lo, hi + 1) if ascending else range(hi, lo - 1, -1)
    for t in ts:
        M = family.eval_at(t)
        vec = [sum(m * v for m, v in zip(row, vec)) for row in M]
    return vec


@pytest.mark.parametrize("seed", range(6))
def test_exact_matches_naive(seed):
    fam, init, lo, hi = random_chain(seed, steps=30)
    assert matfac_exact(fam, init, lo, hi) == naive_chain(fam, init, lo, hi)
    assert matfac_exact(fam, init, lo, hi, ascending=True) == naive_chain(fam, init, lo, hi, ascending=True)


@pytest.mark.parametrize("seed", range(20))
def test_strategies_agree_on_random_chains(seed):
    fam, init, lo, hi = random_chain(seed)
    exact = matfac(fam, init, lo, hi, "exact")
    assert matfac(fam, init, lo, hi, "binsplit") == exact
    assert matfac(fam, init, lo, hi, "modular") == exact


@settings(max_examples=25)
@given(st.integers(0, 10**6), st.integers(1, 40))
def test_reduction_interval_does_not_change_result(seed, R):
    fam, init, lo, hi = random_chain(seed, steps=25)
    assert matfac_exact(fam, init, lo, hi, reduction_interval=R) == matfac_exact(fam, init, lo, hi)


def test_empty_range_returns_initial():
    fam = RatFunMatrix(((T,),))
    for strategy in ("exact", "binsplit", "modular"):
        assert matfac(fam, [Fraction(3, 2)], 5, 4, strategy) == [Fraction(3, 2)]


def test_factorial_oracle():
    # 1x1 family M(t) = t gives hi! / (lo-1)!
    fam = RatFunMatrix(((T,),))
    assert matfac(fam, [1], 1, 20, "binsplit") == [Fraction(2432902008176640000)]


def test_unlucky_primes_are_skipped():
    fam = RatFunMatrix(((1 / (T + 1), T), (RatFun.const(1), 1 / (T + 1))))
    init = [1, 2]
    expected = matfac_exact(fam, init, 1, 12)
    primes = [11, 13] + word_primes(6)  # 11 and 13 divide some step denominators
    assert matfac_modular(fam, init, 1, 12, primes=primes) == expected


def test_workers_give_same_result():
    fam, init, lo, hi = random_chain(3, steps=60)
    assert matfac_modular(fam, init, lo, hi, workers=2) == matfac_exact(fam, init, lo, hi)


def test_starved_budget_fails_with_verify():
    fam, init, lo, hi = random_chain(5)
    with pytest.raises(ReconstructionFailure):
        matfac_modular(fam, init, lo, hi, primes=1, prime_bits=31, verify=True)


def test_dispatch_errors():
    fam = RatFunMatrix(((T,),))
    with pytest.raises(InputError):
        matfac(fam, [1], 1, 2, "fft")
    with pytest.raises(InputError):
        matfac(fam, [1], 1, 2, "exact", bogus=1)
    with pytest.raises(InputError):
        matfac(fam, [1, 2], 1, 2)
    # options for other strategies are ignored
    assert matfac(fam, [1], 1, 3, "exact", workers=4) == [6]
