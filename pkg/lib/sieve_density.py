"""
Local conditions for strongly carefree tuples.

At an odd prime p a tuple is admissible mod p^2 when no coordinate vanishes
mod p^2 and at most one vanishes mod p; there are p^(l-1) (p-1)^l (p+l) such
residue tuples. At p = 2 the counting theorem fixes a residue class z mod 4
instead, which has density 4^-l.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
import sympy

try:
    from .config import get_settings
    from .errors import BudgetExceededError, InvalidInputError
    from .f2_structure import ell_of
    from .parametrization import LatticeQuery, enumerate_lattice_points, support_sets
except ImportError:
    from config import get_settings
    from errors import BudgetExceededError, InvalidInputError
    from f2_structure import ell_of
    from parametrization import LatticeQuery, enumerate_lattice_points, support_sets

logger = logging.getLogger(__name__)


def _check_prime(p: int) -> None:
    if not sympy.isprime(p):
        raise InvalidInputError(f"{p} is not prime")


def _check_ell(ell: int) -> None:
    if ell < 1:
        raise InvalidInputError(f"ell must be positive, got {ell}")


def local_count_formula(p: int, ell: int) -> int:
    """#C_p = p^(l-1) (p-1)^l (p+l) for odd p"""
    _check_prime(p)
    _check_ell(ell)
    if p == 2:
        raise InvalidInputError("p = 2 uses a fixed residue class mod 4; see local_density")
    return p ** (ell - 1) * (p - 1) ** ell * (p + ell)


def local_count_bruteforce(p: int, ell: int, budget: Optional[int] = None) -> int:
    """Exhaustive count over (Z/p^2)^l.

    Each residue gets a weight (0 unit, 1 divisible by p, ell + 1 zero mod p^2),
    the weights of all tuples after the first coordinate are tabulated once,
    and the count is accumulated per leading residue.
    """
    _check_prime(p)
    _check_ell(ell)
    budget = budget or get_settings().bruteforce_budget
    modulus = p * p
    total_tuples = modulus ** ell
    if total_tuples > budget:
        raise BudgetExceededError(f"brute-force count for p = {p}, ell = {ell}", total_tuples, budget)
    residues = np.arange(modulus)
    weights = np.where(residues == 0, ell + 1, np.where(residues % p == 0, 1, 0)).astype(np.int16)
    tail = np.zeros(1, dtype=np.int16)
    for _ in range(ell - 1):
        tail = np.add.outer(tail, weights).ravel()
    tail_counts = np.bincount(tail, minlength=2)
    at_most = {0: int(tail_counts[0] + tail_counts[1]), 1: int(tail_counts[0])}
    count = 0
    for weight in weights.tolist():
        count += at_most.get(weight, 0)
    logger.debug(f"Brute-force count for p = {p}, ell = {ell} over {total_tuples} tuples: {count}")
    return count


@dataclass(frozen=True)
class LocalDensity:
    p: int
    ell: int
    count: int
    density: Fraction


def local_density(p: int, ell: int) -> LocalDensity:
    """mu_p; at p = 2 the density of one fixed class z mod 4"""
    _check_prime(p)
    _check_ell(ell)
    if p == 2:
        return LocalDensity(p=2, ell=ell, count=1, density=Fraction(1, 4 ** ell))
    count = local_count_formula(p, ell)
    return LocalDensity(p=p, ell=ell, count=count, density=Fraction(count, p ** (2 * ell)))


def carefree_local_density(p: int, ell: int) -> Fraction:
    """(p + l)(p - 1)^l / p^(l+1) at every prime, including p = 2"""
    _check_prime(p)
    _check_ell(ell)
    return Fraction(p ** (ell - 1) * (p - 1) ** ell * (p + ell), p ** (2 * ell))


@dataclass(frozen=True)
class SieveLevel:
    T: int
    modulus: int
    density: Fraction


def sieve_level(T: int, ell: int, fixed_class_at_two: bool = False) -> SieveLevel:
    """mu_T over the primes below T"""
    density = Fraction(1)
    modulus = 1
    for p in sympy.primerange(2, T):
        modulus *= p * p
        if p == 2 and fixed_class_at_two:
            density *= local_density(2, ell).density
        else:
            density *= carefree_local_density(p, ell)
    return SieveLevel(T=T, modulus=modulus, density=density)


def prime_square_tail(x: int) -> mpmath.mpf:
    """Upper bound for the sum of 1/p^2 over primes p > x.

    2 / (x log x) for x >= 11; below that the integer tail 1/x.
    """
    if x >= 11:
        return mpmath.mpf(2) / (x * mpmath.log(x))
    return mpmath.mpf(1) / x


@dataclass(frozen=True)
class EulerProduct:
    """Truncated product with a relative tail bound: the full product lies in [value (1 - tail), value]"""
    ell: int
    pmax: int
    value: mpmath.mpf
    tail_bound: mpmath.mpf

    @property
    def lower(self) -> mpmath.mpf:
        return self.value * (1 - self.tail_bound)


def euler_product(ell: int, pmax: int, precision_bits: Optional[int] = None) -> EulerProduct:
    """prod over 2 < p <= pmax of (1 - 1/p)^l (1 + l/p).

    Each factor is at least 1 - l^2/p^2, so the omitted factors multiply to at
    least 1 - l^2 * (sum over p > pmax of 1/p^2).
    """
    _check_ell(ell)
    if pmax < 3:
        raise InvalidInputError(f"pmax must be at least 3, got {pmax}")
    bits = precision_bits or get_settings().precision_bits
    with mpmath.workprec(bits):
        value = mpmath.mpf(1)
        for p in sympy.primerange(3, pmax + 1):
            value *= mpmath.mpf((p - 1) ** ell * (p + ell)) / mpmath.mpf(p) ** (ell + 1)
        tail = min(mpmath.mpf(1), ell * ell * prime_square_tail(pmax))
        value = +value
    return EulerProduct(ell=ell, pmax=pmax, value=value, tail_bound=tail)


def carefree_density_constant(ell: int, pmax: int) -> EulerProduct:
    """Density of strongly carefree tuples over all primes, p = 2 included"""
    odd = euler_product(ell, pmax)
    two = carefree_local_density(2, ell)
    factor = mpmath.mpf(two.numerator) / two.denominator
    return EulerProduct(ell=ell, pmax=pmax, value=odd.value * factor, tail_bound=odd.tail_bound)


def _class_chunks(ell: int, chunk: int = 1 << 20) -> Iterator[np.ndarray]:
    """Blocks of residue classes z in {1,2,3}^l as an (l, size) array"""
    total = 3 ** ell
    powers = [3 ** i for i in range(ell)]
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.int64)
        yield np.stack([(codes // powers[i]) % 3 + 1 for i in range(ell)])


def _case_one_mask(classes: np.ndarray, supports: Sequence[Sequence[int]]) -> np.ndarray:
    mask = np.ones(classes.shape[1], dtype=bool)
    for support in supports:
        residue = np.ones(classes.shape[1], dtype=np.int64)
        for i in support:
            residue = (residue * classes[i]) % 4
        mask &= residue == 1
    return mask


def _omega_count(n: int, targets: Sequence[int]) -> int:
    if n > 4:
        raise BudgetExceededError(f"omega1 for n = {n}", 3 ** ell_of(n), 3 ** 15)
    ell = ell_of(n)
    budget = get_settings().bruteforce_budget
    if 3 ** ell > budget:
        raise BudgetExceededError(f"omega1 for n = {n}", 3 ** ell, budget)
    supports = [support_sets(n)[j - 1] for j in targets]
    return sum(int(_case_one_mask(block, supports).sum()) for block in _class_chunks(ell))


def omega1(n: int) -> int:
    """Classes z in {1,2,3}^l mod 4 for which every D_j is 1 mod 4"""
    return _omega_count(n, range(1, ell_of(n) + 1))


def omega1_from_generators(n: int) -> int:
    """Same count, testing only the generators D_1, D_2, D_4, ..."""
    return _omega_count(n, [1 << k for k in range(n)])


def case_one_classes(n: int) -> List[Tuple[int, ...]]:
    """The classes counted by omega1, listed (small n only)"""
    supports = support_sets(n)
    found: List[Tuple[int, ...]] = []
    for block in _class_chunks(ell_of(n)):
        mask = _case_one_mask(block, supports)
        found.extend(tuple(int(v) for v in column) for column in block[:, mask].T)
    return found


def satisfies_local_conditions(g: Sequence[int], primes: Sequence[int], z: Optional[Sequence[int]] = None) -> bool:
    """C_p for each listed prime; at p = 2 the class z if one is given"""
    for p in primes:
        if p == 2 and z is not None:
            if any(x % 4 != c for x, c in zip(g, z)):
                return False
            continue
        square = p * p
        divisible = 0
        for x in g:
            if x % square == 0:
                return False
            if x % p == 0:
                divisible += 1
                if divisible > 1:
                    return False
    return True


@dataclass(frozen=True)
class SieveCount:
    count: int
    predicted: mpmath.mpf
    level: SieveLevel


def finite_sieve_count(query: LatticeQuery, T: int, z: Optional[Sequence[int]] = None) -> SieveCount:
    """Lattice points satisfying C_p for p < T, and mu_T times the region volume"""
    try:
        from .analytic import total_region_volume
    except ImportError:
        from analytic import total_region_volume
    ell = ell_of(query.n)
    if z is not None:
        z = tuple(int(c) for c in z)
        if len(z) != ell or any(c not in (1, 2, 3) for c in z):
            raise InvalidInputError(f"z must be a class in {{1,2,3}}^{ell}, got {z}")
    primes = list(sympy.primerange(2, T))
    stream, _ = enumerate_lattice_points(query)
    count = sum(1 for t in stream if satisfies_local_conditions(t.g, primes, z))
    level = sieve_level(T, ell, fixed_class_at_two=z is not None)
    if query.window is None or not query.window.is_bounded:
        predicted = mpmath.inf
    else:
        volume = total_region_volume(query.Y, query.window, query.n)
        predicted = volume * mpmath.mpf(level.density.numerator) / level.density.denominator
    logger.info(f"Sieve level T = {T}: {count} points, predicted {mpmath.nstr(predicted, 8)}")
    return SieveCount(count=count, predicted=predicted, level=level)
