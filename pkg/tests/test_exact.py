from fractions import Fraction
from math import prod

import pytest
from hypothesis import given, strategies as st

from hgmtables.errors import InputError, ParseError
from hgmtables.exact import (
    CRTBasis,
    ResidueSystem,
    crt_combine,
    format_rational,
    is_prime,
    mod_reduce,
    parse_rational,
    rational_reconstruct,
    word_primes,
)

from .strategies import rationals

P61 = 2**61 - 1


def test_parse_rational_forms():
    assert parse_rational("-3/6") == Fraction(-1, 2)
    assert parse_rational("42") == 42
    assert parse_rational(" 7/1 ") == 7


@pytest.mark.parametrize("bad", ["1/0", "1.5", "1/-2", "", "x", "1 / 2"])
def test_parse_rational_rejects(bad):
    with pytest.raises(ParseError):
        parse_rational(bad)


@given(rationals(10**30, 10**30))
def test_format_parse_round_trip(q):
    assert parse_rational(format_rational(q)) == q


def test_mod_reduce_basic():
    assert mod_reduce(Fraction(1, 2), 7) == 4
    assert mod_reduce(Fraction(-1, 2), 7) == 3
    assert mod_reduce(Fraction(1, 7), 7) is None


@given(rationals(10**12, 10**12))
def test_mod_reduce_is_ring_map(q):
    p = word_primes(1)[0]
    r = mod_reduce(q, p)
    assert r is not None and 0 <= r < p
    assert (r * q.denominator - q.numerator) % p == 0


def test_crt_combine_small():
    assert crt_combine([(2, 3), (3, 5), (2, 7)]) == (23, 105)


def test_crt_rejects_common_factor():
    with pytest.raises(InputError):
        CRTBasis([6, 9])


@given(st.integers(0, 10**40))
def test_crt_recovers_integer(n):
    primes = word_primes(3)
    value, modulus = crt_combine([(n % p, p) for p in primes])
    assert modulus == prod(primes) and value == n % modulus


def test_reconstruct_examples():
    assert rational_reconstruct(mod_reduce(Fraction(-3, 7), P61), P61) == Fraction(-3, 7)
    assert rational_reconstruct(5, 7) is None or rational_reconstruct(5, 7) != Fraction(0)


@given(rationals(2**28, 2**28))
def test_reconstruct_round_trip_above_bound(q):
    # |num|, den < 2^28, P ~ 2^61 > 2 * 2^56
    assert rational_reconstruct(mod_reduce(q, P61), P61) == q


@given(st.integers(0, P61 - 1))
def test_reconstruct_output_congruent(g):
    q = rational_reconstruct(g, P61)
    if q is not None:
        assert mod_reduce(q, P61) == g
        bound = (P61 // 2) ** 0.5
        assert abs(q.numerator) <= bound and q.denominator <= bound


def test_word_primes():
    ps = word_primes(4)
    assert ps == sorted(ps, reverse=True)
    assert all(is_prime(p) and p < 2**62 for p in ps)
    assert ps[0] == 2**62 - 57


def test_residue_system_reconstructs_vector():
    vec = [Fraction(3, 4), Fraction(-5, 9), Fraction(0)]
    system = ResidueSystem(3)
    for p in word_primes(2):
        system.add(p, [mod_reduce(v, p) for v in vec])
    assert system.reconstruct() == vec
    system.skip(word_primes(1)[0])
    assert len(system.primes) == 1
