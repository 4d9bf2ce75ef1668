"""Generalized matrix factorials ``M(lo) M(lo+1) ... M(hi) F0``.

Three interchangeable strategies return identical canonical rational vectors:

* ``exact``    -- integer numerator vector with one shared denominator, the
  common gcd divided out every ``reduction_interval`` steps;
* ``modular``  -- the whole chain over many word-sized prime fields, then CRT
  and rational reconstruction, certified by a held-out prime;
* ``binsplit`` -- recursive halving of the range with matrix-matrix products.

By default ``M(hi)`` is applied first and ``M(lo)`` last.  With
``ascending=True`` the order is reversed, i.e. ``M(hi) ... M(lo) F0``, which is
what contiguity chains indexed ``t = 0, 1, ...`` need.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from math import gcd, lcm

from .errors import InputError, ReconstructionFailure
from .exact import WORD_BITS, ResidueSystem, mod_reduce, word_primes
from .ratfun import RatFunMatrix

log = logging.getLogger(__name__)

DEFAULT_REDUCTION_INTERVAL = 20
STRATEGIES = ("exact", "modular", "binsplit")


def _order(lo: int, hi: int, ascending: bool) -> range:
    if lo > hi:
        return range(0)
    return range(lo, hi + 1) if ascending else range(hi, lo - 1, -1)


def _check(family: RatFunMatrix, initial) -> list[Fraction]:
    initial = [Fraction(v) for v in initial]
    if len(initial) != family.size:
        raise InputError(f"initial vector has length {len(initial)}, matrix size is {family.size}")
    return initial


def _as_integer_vector(vec: list[Fraction]) -> tuple[list[int], int]:
    den = lcm(*(v.denominator for v in vec))
    return [v.numerator * (den // v.denominator) for v in vec], den


def _to_fractions(nums, den) -> list[Fraction]:
    return [Fraction(n, den) for n in nums]


def _matvec(K, v):
    return [sum(k * x for k, x in zip(row, v) if k) for row in K]


def matfac_exact(family: RatFunMatrix, initial, lo: int, hi: int, *,
                 reduction_interval: int = DEFAULT_REDUCTION_INTERVAL,
                 ascending: bool = False) -> list[Fraction]:
    if reduction_interval < 1:
        raise InputError("reduction interval must be >= 1")
    vec = _check(family, initial)
    nums, den = _as_integer_vector(vec)
    for n_done, t in enumerate(_order(lo, hi, ascending), 1):
        K, D = family.step_integer(t)
        nums = _matvec(K, nums)
        den *= D
        if n_done % reduction_interval == 0:
            g = gcd(den, *nums)
            if g > 1:
                nums = [x // g for x in nums]
                den //= g
    return _to_fractions(nums, den)


def _matmul(A, B):
    cols = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col) if a) for col in cols] for row in A]


def _range_product(family: RatFunMatrix, ts):
    """``(K, D)`` with ``M(ts[-1]) ... M(ts[0]) = K / D``."""
    if len(ts) == 1:
        return family.step_integer(ts[0])
    mid = len(ts) // 2
    KA, DA = _range_product(family, ts[:mid])
    KB, DB = _range_product(family, ts[mid:])
    K = _matmul(KB, KA)
    D = DA * DB
    g = gcd(D, *(v for row in K for v in row))
    if g > 1:
        K = [[v // g for v in row] for row in K]
        D //= g
    return K, D


def matfac_binsplit(family: RatFunMatrix, initial, lo: int, hi: int, *,
                    ascending: bool = False) -> list[Fraction]:
    vec = _check(family, initial)
    ts = list(_order(lo, hi, ascending))
    if not ts:
        return vec
    K, D = _range_product(family, ts)
    nums, den = _as_integer_vector(vec)
    return _to_fractions(_matvec(K, nums), den * D)


# -- modular strategy -------------------------------------------------------

_WORKER_STATE = None


def _chain_mod(steps, nums, den, p):
    """Residues of the chain mod ``p``; ``None`` when ``p`` is unlucky."""
    dacc = den % p
    if dacc == 0:
        return None
    v = [x % p for x in nums]
    for K, D in steps:
        Dp = D % p
        if Dp == 0:
            return None
        v = [sum(k * x for k, x in zip(row, v)) % p for row in K]
        dacc = dacc * Dp % p
    inv = pow(dacc, -1, p)
    return [x * inv % p for x in v]


def _init_worker(state):
    global _WORKER_STATE
    _WORKER_STATE = state


def _worker_chain(p):
    steps, nums, den = _WORKER_STATE
    return p, _chain_mod(steps, nums, den, p)


class _ModularRun:
    def __init__(self, steps, nums, den, workers):
        self.state = (steps, nums, den)
        self.workers = workers
        self._pool = None

    def __enter__(self):
        if self.workers > 1:
            self._pool = ProcessPoolExecutor(
                max_workers=self.workers, initializer=_init_worker, initargs=(self.state,)
            )
        return self

    def __exit__(self, *exc):
        if self._pool is not None:
            self._pool.shutdown()

    def images(self, primes) -> dict[int, list[int] | None]:
        if self._pool is None or len(primes) < 2:
            steps, nums, den = self.state
            return {p: _chain_mod(steps, nums, den, p) for p in primes}
        chunk = max(1, len(primes) // (4 * self.workers))
        return dict(self._pool.map(_worker_chain, primes, chunksize=chunk))


class _PrimeSource:
    def __init__(self, explicit, bits):
        self.explicit = list(explicit) if explicit is not None else None
        self.bits = bits
        self.taken: set[int] = set(self.explicit or ())
        self._pos = 0

    def fresh(self, count: int) -> list[int]:
        out = []
        while len(out) < count:
            block = word_primes(self._pos + 64, self.bits)
            while self._pos < len(block) and len(out) < count:
                p = block[self._pos]
                self._pos += 1
                if p not in self.taken:
                    self.taken.add(p)
                    out.append(p)
        return out


def matfac_modular(family: RatFunMatrix, initial, lo: int, hi: int, *,
                   primes=None, prime_bits: int = WORD_BITS, workers: int = 1,
                   verify: bool = True, initial_primes: int = 2,
                   max_primes: int = 1 << 14, ascending: bool = False) -> list[Fraction]:
    """Multimodular evaluation.

    ``primes`` is ``None`` (adaptive: start at ``initial_primes`` and double on
    failure, reusing residues), a count (fixed budget), or an explicit list.
    With ``verify`` one extra prime outside the CRT set must agree with the
    candidate; otherwise :class:`ReconstructionFailure` is raised.
    """
    if workers < 1:
        raise InputError("worker count must be >= 1")
    vec = _check(family, initial)
    ts = list(_order(lo, hi, ascending))
    steps = [family.step_integer(t) for t in ts]
    nums, den = _as_integer_vector(vec)

    explicit = primes if isinstance(primes, (list, tuple)) else None
    if explicit is not None and not explicit:
        raise InputError("empty prime list")
    fixed = primes is not None
    source = _PrimeSource(explicit, prime_bits)
    system = ResidueSystem(family.size)
    target = len(explicit) if explicit is not None else (int(primes) if fixed else initial_primes)
    if target < 1:
        raise InputError("prime count must be >= 1")

    with _ModularRun(steps, nums, den, workers) as run:
        pending = list(explicit) if explicit is not None else []
        while True:
            if explicit is None:
                pending = source.fresh(target - len(system.residues))
            while pending:
                for p, img in sorted(run.images(pending).items()):
                    if img is None:
                        log.debug("skipping unlucky prime %d", p)
                        system.skip(p)
                    else:
                        system.add(p, img)
                # Replace unlucky primes so the budget is honoured.
                short = target - len(system.residues)
                pending = source.fresh(short) if short > 0 and explicit is None else []
            candidate = system.reconstruct()
            if candidate is not None and (not verify or _verified(candidate, run, source)):
                return candidate
            if fixed:
                reason = "reconstruction failed" if candidate is None else "held-out prime disagrees"
                raise ReconstructionFailure(
                    f"{reason} with {len(system.residues)} primes "
                    f"({system.modulus().bit_length()} bits)"
                )
            target *= 2
            if target > max_primes:
                raise ReconstructionFailure(f"no certified result with up to {max_primes} primes")
            log.debug("doubling prime budget to %d", target)


def _verified(candidate, run: _ModularRun, source: _PrimeSource) -> bool:
    while True:
        (q,) = source.fresh(1)
        img = run.images([q])[q]
        if img is None:
            continue
        expected = [mod_reduce(c, q) for c in candidate]
        if any(e is None for e in expected):
            continue
        return expected == img


_TUNING = {
    "exact": {"reduction_interval", "ascending"},
    "modular": {"primes", "prime_bits", "workers", "verify", "initial_primes", "max_primes", "ascending"},
    "binsplit": {"ascending"},
}


def matfac(family: RatFunMatrix, initial, lo: int, hi: int, strategy: str = "exact", **tuning):
    """Dispatch on ``strategy``; tuning keys meant for other strategies are ignored."""
    if strategy not in _TUNING:
        raise InputError(f"unknown strategy {strategy!r}; expected one of {', '.join(STRATEGIES)}")
    known = set().union(*_TUNING.values())
    unknown = set(tuning) - known
    if unknown:
        raise InputError(f"unknown tuning option(s): {', '.join(sorted(unknown))}")
    kw = {k: v for k, v in tuning.items() if k in _TUNING[strategy]}
    fn = {"exact": matfac_exact, "modular": matfac_modular, "binsplit": matfac_binsplit}[strategy]
    return fn(family, initial, lo, hi, **kw)
