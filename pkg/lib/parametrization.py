"""
Carefree tuples and the lattice points they index.

A tuple (g_1, ..., g_l) determines radicands D_j = prod of g_i over the i with
v_i . v_j = 1. Every multiquadratic field arises this way from a strongly
carefree tuple, and a nondegenerate tuple (all g_i > 1) shares its field with
exactly #GL_n(F_2) tuples.
"""

import logging
import math
import time
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt
from multiprocessing import Pool
from typing import Any, Dict, Iterator, List, Optional, Sequence, Set, Tuple

import numpy as np
import sympy

try:
    from .config import get_settings
    from .errors import BudgetExceededError, InvalidInputError
    from .f2_structure import check_dimension, check_permutation, dot, ell_of, index_permutations
    from .field_algebra import RadicandVector, RamificationCase, classify_case, discriminant, is_squarefree
    from .integral_basis import ShapeParams, ShapeWindow, shape_params, to_mpf
except ImportError:
    from config import get_settings
    from errors import BudgetExceededError, InvalidInputError
    from f2_structure import check_dimension, check_permutation, dot, ell_of, index_permutations
    from field_algebra import RadicandVector, RamificationCase, classify_case, discriminant, is_squarefree
    from integral_basis import ShapeParams, ShapeWindow, shape_params, to_mpf

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CarefreeTuple:
    n: int
    g: Tuple[int, ...]

    def __post_init__(self):
        if len(self.g) != ell_of(self.n):
            raise InvalidInputError(f"a tuple for n = {self.n} needs {ell_of(self.n)} entries, got {len(self.g)}")
        if any(x < 1 for x in self.g):
            raise InvalidInputError(f"tuple entries must be positive: {self.g}")

    @classmethod
    def of(cls, *g: int) -> "CarefreeTuple":
        n = (len(g) + 1).bit_length() - 1
        if ell_of(n) != len(g):
            raise InvalidInputError(f"tuple length {len(g)} is not 2^n - 1")
        return cls(n=n, g=tuple(int(x) for x in g))

    @property
    def product(self) -> int:
        return math.prod(self.g)

    def __str__(self) -> str:
        return ";".join(str(x) for x in self.g)


def _pairwise_coprime(values: Sequence[int]) -> bool:
    running = 1
    for x in values:
        if gcd(running, x) != 1:
            return False
        running *= x
    return True


def is_strongly_carefree(t: CarefreeTuple) -> bool:
    """Squarefree entries, pairwise coprime"""
    return all(is_squarefree(x) for x in t.g) and _pairwise_coprime(t.g)


def is_nondegenerate(t: CarefreeTuple) -> bool:
    """Strongly carefree with every entry above 1"""
    return all(x > 1 for x in t.g) and is_strongly_carefree(t)


@lru_cache(maxsize=None)
def support_sets(n: int) -> Tuple[Tuple[int, ...], ...]:
    """For each j = 1..l, the 0-based positions i - 1 with v_i . v_j = 1"""
    ell = ell_of(n)
    return tuple(tuple(i - 1 for i in range(1, ell + 1) if dot(i, j)) for j in range(1, ell + 1))


def radicand_products(n: int, g: Sequence[int]) -> Tuple[int, ...]:
    """D_1..D_l for any positive tuple, carefree or not"""
    return tuple(math.prod(g[i] for i in support) for support in support_sets(n))


def radicands_from_tuple(t: CarefreeTuple, check: bool = True) -> RadicandVector:
    if check and not is_strongly_carefree(t):
        raise InvalidInputError(f"tuple {t.g} is not strongly carefree")
    return RadicandVector(n=t.n, radicands=(1,) + radicand_products(t.n, t.g))


def tuple_from_radicands(rad: RadicandVector) -> CarefreeTuple:
    """g_i = gcd of the D_j with v_i . v_j = 1; refused unless it round-trips"""
    ell = rad.ell
    g = tuple(
        math.gcd(*[rad.radicands[j] for j in range(1, ell + 1) if dot(i, j)])
        for i in range(1, ell + 1)
    )
    t = CarefreeTuple(n=rad.n, g=g)
    if radicands_from_tuple(t, check=False) != rad:
        raise InvalidInputError(f"radicands {rad} do not come from a carefree tuple")
    return t


def _orbit_members(g: Tuple[int, ...], n: int) -> Iterator[Tuple[int, ...]]:
    for perm in index_permutations(n):
        yield tuple(g[p] for p in perm)


def _require_nondegenerate(t: CarefreeTuple) -> None:
    if not is_nondegenerate(t):
        raise InvalidInputError(f"tuple {t.g} is degenerate or not carefree")


def orbit(t: CarefreeTuple) -> Set[CarefreeTuple]:
    """Images under GL_n(F_2): (g'_k) = (g_{index of M v_k})"""
    _require_nondegenerate(t)
    return {CarefreeTuple(t.n, member) for member in _orbit_members(t.g, t.n)}


def canonical_form(t: CarefreeTuple) -> CarefreeTuple:
    """Lexicographically least member of the orbit"""
    _require_nondegenerate(t)
    return CarefreeTuple(t.n, min(_orbit_members(t.g, t.n)))


def _is_canonical(g: Tuple[int, ...], perms: Sequence[Tuple[int, ...]]) -> bool:
    for perm in perms:
        if tuple(g[p] for p in perm) < g:
            return False
    return True


@dataclass(frozen=True)
class LatticeQuery:
    """Integer tuples with prod g_i < Y whose radicand ratios fall in the window"""
    n: int
    Y: int
    window: Optional[ShapeWindow] = None
    sigma: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        check_dimension(self.n, minimum=1)
        if self.Y < 1:
            raise InvalidInputError(f"Y must be >= 1, got {self.Y}")
        if self.window is not None and self.window.ell != ell_of(self.n):
            raise InvalidInputError(f"window has {len(self.window.bounds)} bounds, n = {self.n} needs {ell_of(self.n) - 1}")
        if self.sigma is not None:
            check_permutation(self.sigma, ell_of(self.n))


@dataclass
class CountReport:
    total: int = 0
    per_sigma: Counter = field(default_factory=Counter)
    carefree_total: int = 0
    nondegenerate_total: int = 0
    dedup_field_total: int = 0
    wall_time: float = 0.0

    def merge(self, other: "CountReport") -> "CountReport":
        self.total += other.total
        self.per_sigma.update(other.per_sigma)
        self.carefree_total += other.carefree_total
        self.nondegenerate_total += other.nondegenerate_total
        self.dedup_field_total += other.dedup_field_total
        self.wall_time = max(self.wall_time, other.wall_time)
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {
            "total": self.total,
            "per_sigma": {";".join(map(str, k)): v for k, v in sorted(self.per_sigma.items())},
            "carefree_total": self.carefree_total,
            "nondegenerate_total": self.nondegenerate_total,
            "dedup_field_total": self.dedup_field_total,
            "wall_time": round(self.wall_time, 3),
        }


def estimate_nodes(ell: int, limit: int) -> float:
    """Roughly the number of positive l-tuples with product below ``limit``"""
    if limit <= 1:
        return 0.0
    spread = math.log(limit) + 1.0
    return limit * spread ** (ell - 1) / math.factorial(ell - 1)


def check_budget(ell: int, limit: int, what: str = "enumeration") -> None:
    budget = get_settings().node_budget
    estimate = estimate_nodes(ell, limit)
    if estimate > budget:
        raise BudgetExceededError(what, estimate, budget)
    if estimate > budget / 10:
        logger.warning(f"{what}: estimated {estimate:.3g} nodes, close to the budget {budget:.3g}")


def squarefree_flags(limit: int) -> List[bool]:
    """flags[x] is True iff x is squarefree, for 0 <= x < limit"""
    flags = np.ones(max(limit, 2), dtype=bool)
    flags[0] = False
    for p in sympy.primerange(2, isqrt(max(limit - 1, 1)) + 1):
        flags[p * p::p * p] = False
    return flags.tolist()


class WindowTest:
    """Checks the ordering and window conditions on radicand values"""

    def __init__(self, window: Optional[ShapeWindow]):
        self.lower: List[Tuple[int, Any]] = []
        self.upper: Optional[Any] = None
        if window is None:
            return
        for position, bound in enumerate(window.bounds[:-1], start=1):
            self.lower.append((position, self._ratio(bound)))
        if window.is_bounded:
            self.upper = self._ratio(window.bounds[-1])

    @staticmethod
    def _ratio(bound):
        if isinstance(bound, Fraction):
            return (bound.numerator, bound.denominator)
        return to_mpf(bound)

    @staticmethod
    def _at_least(value: int, base: int, ratio) -> bool:
        if isinstance(ratio, tuple):
            return value * ratio[1] >= ratio[0] * base
        return value >= ratio * base

    @staticmethod
    def _at_most(value: int, base: int, ratio) -> bool:
        if isinstance(ratio, tuple):
            return value * ratio[1] <= ratio[0] * base
        return value <= ratio * base

    def __call__(self, ordered: Sequence[int]) -> bool:
        base = ordered[0]
        if self.upper is not None and not self._at_most(ordered[-1], base, self.upper):
            return False
        return all(self._at_least(ordered[p], base, r) for p, r in self.lower)


class _Walker:
    """Depth-first walk over positive tuples with a running product bound"""

    def __init__(self, n: int, limit: int, carefree_only: bool = False, nondegenerate_only: bool = False,
                 odd_only: bool = False, shard: Optional[Tuple[int, int]] = None):
        self.n = n
        self.ell = ell_of(n)
        self.limit = limit
        self.carefree_only = carefree_only or nondegenerate_only
        self.nondegenerate_only = nondegenerate_only
        self.odd_only = odd_only
        self.shard = shard
        self.flags = squarefree_flags(limit)

    def tuples(self) -> Iterator[Tuple[int, ...]]:
        if self.limit <= 1:
            return iter(())
        return self._extend((), 1, 0)

    def _extend(self, prefix: Tuple[int, ...], product: int, depth: int) -> Iterator[Tuple[int, ...]]:
        remaining = self.ell - depth - 1
        low = 2 if self.nondegenerate_only else 1
        floor_rest = (1 << remaining) if self.nondegenerate_only else 1
        high = (self.limit - 1) // (product * floor_rest)
        step = 2 if self.odd_only else 1
        if self.odd_only and low % 2 == 0:
            low += 1
        values = range(low, high + 1, step)
        if depth == 0 and self.shard is not None:
            index, count = self.shard
            values = (x for x in values if x % count == index)
        flags = self.flags
        last = remaining == 0
        for x in values:
            if self.carefree_only and (not flags[x] or gcd(x, product) != 1):
                continue
            if last:
                yield prefix + (x,)
            else:
                yield from self._extend(prefix + (x,), product * x, depth + 1)

    def is_carefree(self, g: Sequence[int]) -> bool:
        if self.carefree_only:
            return True
        return all(self.flags[x] for x in g) and _pairwise_coprime(g)


def _sorted_order(values: Sequence[int]) -> Tuple[int, ...]:
    return tuple(sorted(range(len(values)), key=values.__getitem__))


def _walk_query(query: LatticeQuery, report: CountReport, carefree_only: bool, nondegenerate_only: bool,
                shard: Optional[Tuple[int, int]] = None) -> Iterator[Tuple[int, ...]]:
    started = time.perf_counter()
    walker = _Walker(query.n, query.Y, carefree_only, nondegenerate_only, shard=shard)
    test = WindowTest(query.window)
    perms = index_permutations(query.n) if query.n <= get_settings().orbit_max_n else ()
    sigma = tuple(s - 1 for s in query.sigma) if query.sigma is not None else None
    n = query.n
    for g in walker.tuples():
        values = radicand_products(n, g)
        if sigma is not None:
            ordered = [values[s] for s in sigma]
            if any(ordered[k] > ordered[k + 1] for k in range(len(ordered) - 1)):
                continue
            order = sigma
        else:
            order = _sorted_order(values)
            ordered = [values[s] for s in order]
        if not test(ordered):
            continue
        report.total += 1
        report.per_sigma[tuple(s + 1 for s in order)] += 1
        if walker.is_carefree(g):
            report.carefree_total += 1
            if min(g) > 1:
                report.nondegenerate_total += 1
                if perms and _is_canonical(g, perms):
                    report.dedup_field_total += 1
        yield g
    report.wall_time = time.perf_counter() - started


def enumerate_lattice_points(query: LatticeQuery, carefree_only: bool = False,
                             nondegenerate_only: bool = False) -> Tuple[Iterator[CarefreeTuple], CountReport]:
    """Stream the tuples of the query together with a report.

    The report is filled in as the stream is consumed and is final once the
    stream is exhausted.
    """
    check_budget(ell_of(query.n), query.Y)
    report = CountReport()
    stream = (CarefreeTuple(query.n, g) for g in _walk_query(query, report, carefree_only, nondegenerate_only))
    return stream, report


def _count_shard(query: LatticeQuery, carefree_only: bool, nondegenerate_only: bool,
                 shard: Optional[Tuple[int, int]]) -> CountReport:
    report = CountReport()
    for _ in _walk_query(query, report, carefree_only, nondegenerate_only, shard):
        pass
    return report


def count_lattice_points(query: LatticeQuery, carefree_only: bool = False, nondegenerate_only: bool = False,
                         workers: int = 1) -> CountReport:
    """Counts only, with the first coordinate sharded across a process pool"""
    check_budget(ell_of(query.n), query.Y)
    started = time.perf_counter()
    if workers <= 1:
        report = _count_shard(query, carefree_only, nondegenerate_only, None)
    else:
        jobs = [(query, carefree_only, nondegenerate_only, (k, workers)) for k in range(workers)]
        with Pool(workers) as pool:
            parts = pool.starmap(_count_shard, jobs)
        report = CountReport()
        for part in parts:
            report.merge(part)
    report.wall_time = time.perf_counter() - started
    logger.info(f"Counted {report.total} lattice points for n = {query.n}, Y = {query.Y} in {report.wall_time:.2f}s")
    return report


@dataclass(frozen=True)
class FieldRecord:
    """One field from the enumeration, labelled by its canonical tuple"""
    source: CarefreeTuple
    rad: RadicandVector
    case: RamificationCase
    discriminant: int
    shape: ShapeParams


def product_bound(n: int, X: int) -> int:
    """Largest P with P^(2^(n-1)) <= X"""
    if X < 1:
        return 0
    root, _ = sympy.integer_nthroot(X, 1 << (n - 1))
    return int(root)


def _field_records(n: int, X: int, cases: Set[int], window: Optional[ShapeWindow],
                   shard: Optional[Tuple[int, int]] = None) -> Iterator[FieldRecord]:
    bound = product_bound(n, X)
    walker = _Walker(n, bound + 1, nondegenerate_only=True, odd_only=cases == {1}, shard=shard)
    test = WindowTest(window)
    perms = index_permutations(n)
    for g in walker.tuples():
        if not _is_canonical(g, perms):
            continue
        values = radicand_products(n, g)
        order = _sorted_order(values)
        if not test([values[s] for s in order]):
            continue
        rad = RadicandVector(n=n, radicands=(1,) + values)
        case = classify_case(rad)
        if case.label not in cases:
            continue
        disc = discriminant(rad, case)
        if disc > X:
            continue
        yield FieldRecord(CarefreeTuple(n, g), rad, case, disc, shape_params(rad, case))


def _check_field_query(n: int, X: int, window: Optional[ShapeWindow]) -> None:
    check_dimension(n, minimum=1)
    ell = ell_of(n)
    check_budget(ell, product_bound(n, X) + 1, "field enumeration")
    if window is not None and window.ell != ell:
        raise InvalidInputError(f"window has {len(window.bounds)} bounds, n = {n} needs {ell - 1}")


def enumerate_fields(n: int, X: int, case_filter: Sequence[int] = (1, 2, 3),
                     window: Optional[ShapeWindow] = None) -> Iterator[FieldRecord]:
    """Fields with discriminant <= X, once each, from nondegenerate carefree tuples"""
    _check_field_query(n, X, window)
    cases = set(case_filter)
    emitted = 0
    for record in _field_records(n, X, cases, window):
        emitted += 1
        yield record
    logger.info(f"Enumerated {emitted} fields with n = {n}, X = {X}, cases {sorted(cases)}")


def _shard_discriminants(n: int, X: int, cases: Set[int], window: Optional[ShapeWindow],
                         shard: Optional[Tuple[int, int]]) -> List[int]:
    return [record.discriminant for record in _field_records(n, X, cases, window, shard)]


def field_discriminants(n: int, X: int, case_filter: Sequence[int] = (1, 2, 3),
                        window: Optional[ShapeWindow] = None, workers: int = 1) -> List[int]:
    """Sorted discriminants of ``enumerate_fields``, sharded like ``count_lattice_points``"""
    _check_field_query(n, X, window)
    cases = set(case_filter)
    if workers <= 1:
        values = _shard_discriminants(n, X, cases, window, None)
    else:
        jobs = [(n, X, cases, window, (k, workers)) for k in range(workers)]
        with Pool(workers) as pool:
            parts = pool.starmap(_shard_discriminants, jobs)
        values = [d for part in parts for d in part]
    logger.info(f"Collected {len(values)} discriminants with n = {n}, X = {X} on {max(workers, 1)} worker(s)")
    return sorted(values)
