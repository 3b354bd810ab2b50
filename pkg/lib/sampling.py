"""
Seeded random instances for property checks.

Everything draws from a ``numpy.random.Generator`` so a fixed seed reproduces
the same fields and tuples.
"""

import logging
from typing import List, Optional, Sequence

import numpy as np
import sympy

try:
    from .errors import InvalidInputError
    from .f2_structure import check_dimension, ell_of
    from .field_algebra import RadicandVector, classify_case, normalize_radicands, radicand_lattice
    from .parametrization import CarefreeTuple, radicands_from_tuple
except ImportError:
    from errors import InvalidInputError
    from f2_structure import check_dimension, ell_of
    from field_algebra import RadicandVector, classify_case, normalize_radicands, radicand_lattice
    from parametrization import CarefreeTuple, radicands_from_tuple

logger = logging.getLogger(__name__)

PRIME_POOL = tuple(sympy.primerange(3, 400))
ONE_MOD_FOUR = tuple(p for p in PRIME_POOL if p % 4 == 1)
THREE_MOD_FOUR = tuple(p for p in PRIME_POOL if p % 4 == 3)
SMALL_POOL = tuple(sympy.primerange(3, 100))
TUPLE_ATTEMPTS = 500


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def _draw(rng: np.random.Generator, pool: Sequence[int], used: set, count: int) -> List[int]:
    available = [p for p in pool if p not in used]
    if len(available) < count:
        raise InvalidInputError(f"prime pool exhausted: need {count}, have {len(available)}")
    picked = [int(p) for p in rng.choice(available, size=count, replace=False)]
    used.update(picked)
    return picked


def _squarefree_one_mod_four(rng: np.random.Generator, used: set) -> int:
    """A prime 1 mod 4, or a product of two primes that is 1 mod 4"""
    if rng.random() < 0.5:
        return _draw(rng, ONE_MOD_FOUR, used, 1)[0]
    if rng.random() < 0.5:
        a, b = _draw(rng, ONE_MOD_FOUR, used, 2)
    else:
        a, b = _draw(rng, THREE_MOD_FOUR, used, 2)
    return a * b


def _tuple_generators(rng: np.random.Generator, n: int, case: int) -> List[int]:
    """Normalized generators of the field of a random nondegenerate carefree tuple.

    Entries are distinct primes, so every prime divides half of the radicands and
    the radicands share factors, including factors that are 3 mod 4.
    """
    ell = ell_of(n)
    for _ in range(TUPLE_ATTEMPTS):
        primes = [int(p) for p in rng.choice(SMALL_POOL, size=ell, replace=False)]
        if case == 3 or (case == 2 and rng.random() < 0.5):
            primes[int(rng.integers(ell))] = 2
        rad = radicands_from_tuple(CarefreeTuple(n=n, g=tuple(primes)), check=False)
        if classify_case(rad).label == case:
            return list(normalize_radicands(rad).generators)
    raise InvalidInputError(f"no Case {case} field for n = {n} in {TUPLE_ATTEMPTS} draws")


def random_generators(rng: np.random.Generator, n: int, case: int, shared: Optional[bool] = None) -> List[int]:
    """Generators in normalized order for the requested ramification case.

    ``shared`` picks generating sets whose radicands have common prime factors;
    by default half of the draws for n = 2, 3 do.
    """
    check_dimension(n, minimum=1)
    if case == 3 and n < 2:
        raise InvalidInputError("Case 3 needs n >= 2")
    if case not in (1, 2, 3):
        raise InvalidInputError(f"case must be 1, 2 or 3, got {case}")
    if shared is None:
        shared = n in (2, 3) and rng.random() < 0.5
    if shared:
        return _tuple_generators(rng, n, case)
    used: set = set()
    plain = n - {1: 0, 2: 1, 3: 2}[case]
    gens = [_squarefree_one_mod_four(rng, used) for _ in range(plain)]
    if case == 2:
        kind = rng.integers(3)
        if kind == 0:
            gens.append(_draw(rng, THREE_MOD_FOUR, used, 1)[0])
        elif kind == 1:
            gens.append(2 * _squarefree_one_mod_four(rng, used))
        else:
            gens.append(2 * _draw(rng, THREE_MOD_FOUR, used, 1)[0])
    elif case == 3:
        even = 2 * _squarefree_one_mod_four(rng, used) if rng.random() < 0.5 else 2
        gens.append(even)
        gens.append(_draw(rng, THREE_MOD_FOUR, used, 1)[0])
    return gens


def random_field(rng: np.random.Generator, n: int, case: int, shared: Optional[bool] = None) -> RadicandVector:
    return radicand_lattice(random_generators(rng, n, case, shared))


def random_carefree_tuple(rng: np.random.Generator, n: int, nondegenerate: bool = True,
                          max_factors: int = 2) -> CarefreeTuple:
    """Entries are products of distinct primes (2 included), disjoint across the tuple"""
    ell = ell_of(n)
    pool = (2,) + PRIME_POOL
    used: set = set()
    g = []
    for _ in range(ell):
        low = 1 if nondegenerate else 0
        count = int(rng.integers(low, max_factors + 1))
        value = 1
        for p in _draw(rng, pool, used, count) if count else []:
            value *= p
        g.append(value)
    return CarefreeTuple(n=n, g=tuple(g))
