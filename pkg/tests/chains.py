"""Random rational-function matrix chains without poles on the integers."""

import random
from fractions import Fraction

from hgmtables.ratfun import Poly, RatFun, RatFunMatrix


def random_family(rng, size):
    def entry():
        kind = rng.random()
        if kind < 0.2:
            return RatFun.const(0)
        num = Poly([Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(rng.randint(1, 3))])
        # t^2 + m has no integer roots, so no poles anywhere
        den = Poly((rng.randint(1, 9), 0, 1)) if kind < 0.6 else Poly.const(rng.randint(1, 7))
        return RatFun(num, den)

    return RatFunMatrix(tuple(tuple(entry() for _ in range(size)) for _ in range(size)))


def random_chain(seed, steps=100):
    rng = random.Random(seed)
    size = rng.randint(1, 4)
    fam = random_family(rng, size)
    init = [Fraction(rng.randint(-20, 20), rng.randint(1, 6)) for _ in range(size)]
    lo = rng.randint(-50, 50)
    return fam, init, lo, lo + steps - 1
