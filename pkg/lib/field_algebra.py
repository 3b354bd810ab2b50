"""
Exact arithmetic in K_n = Q(sqrt(a_1), ..., sqrt(a_n)).

Elements are rational combinations of the radical basis sqrt(D_0), ..., sqrt(D_l)
where D_j is the squarefree part of the product of the generators selected by
the bits of j. All coefficients are ``Fraction`` values; nothing here touches
floating point.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import sympy

try:
    from .config import get_settings
    from .errors import FactorizationError, InvalidInputError
    from .f2_structure import check_dimension, check_index, dot, ell_of, general_linear_group
except ImportError:
    from config import get_settings
    from errors import FactorizationError, InvalidInputError
    from f2_structure import check_dimension, check_index, dot, ell_of, general_linear_group

logger = logging.getLogger(__name__)

Scalar = Union[int, Fraction]


def factorize(m: int, bound: Optional[int] = None) -> Dict[int, int]:
    """Prime factorization by trial division up to ``bound``.

    Anything left after dividing out primes below the bound is prime as long
    as m <= bound**2, so larger inputs are refused.
    """
    if m < 1:
        raise InvalidInputError(f"expected a positive integer, got {m}")
    bound = bound or get_settings().trial_division_bound
    if m > bound * bound:
        raise FactorizationError(f"{m} exceeds the trial-division range (bound {bound})")
    return sympy.factorint(m, limit=bound)


def is_squarefree(m: int, bound: Optional[int] = None) -> bool:
    return all(e == 1 for e in factorize(m, bound).values())


def squarefree_part(m: int, bound: Optional[int] = None) -> int:
    part = 1
    for p, e in factorize(m, bound).items():
        if e & 1:
            part *= p
    return part


def _sqf_product(a: int, b: int) -> int:
    """Squarefree part of a*b for squarefree a and b"""
    g = gcd(a, b)
    return (a // g) * (b // g)


@dataclass(frozen=True)
class GeneratingSet:
    gens: Tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.gens)


@dataclass(frozen=True)
class RadicandVector:
    """(D_0 = 1, D_1, ..., D_l) for one labelling of the quadratic subfields"""
    n: int
    radicands: Tuple[int, ...]

    @property
    def ell(self) -> int:
        return ell_of(self.n)

    def __getitem__(self, j: int) -> int:
        return self.radicands[j]

    @property
    def generators(self) -> Tuple[int, ...]:
        return tuple(self.radicands[1 << k] for k in range(self.n))

    def is_coherent(self) -> bool:
        """D_{i xor j} is the squarefree part of D_i * D_j for all i, j"""
        size = len(self.radicands)
        return all(
            _sqf_product(self.radicands[i], self.radicands[j]) == self.radicands[i ^ j]
            for i in range(size) for j in range(size)
        )

    def is_valid(self) -> bool:
        return self.radicands[0] == 1 and all(d > 1 for d in self.radicands[1:])

    def __str__(self) -> str:
        return "(" + ", ".join(str(d) for d in self.radicands) + ")"


def _build_radicands(gens: Sequence[int]) -> Tuple[int, ...]:
    radicands = [1]
    for a in gens:
        radicands += [_sqf_product(d, a) for d in radicands]
    return tuple(radicands)


def radicand_lattice(gens: Union[GeneratingSet, Sequence[int]]) -> RadicandVector:
    """All D_j from the generators, D_{i + 2^k} = D_i a_k / gcd(D_i, a_k)^2"""
    gens = tuple(gens.gens if isinstance(gens, GeneratingSet) else gens)
    check_dimension(len(gens), minimum=1)
    for a in gens:
        if a < 1 or not is_squarefree(a):
            raise InvalidInputError(f"generator {a} is not a positive squarefree integer")
    return RadicandVector(n=len(gens), radicands=_build_radicands(gens))


def radicands_from_generators_unchecked(gens: Sequence[int]) -> RadicandVector:
    """Same as ``radicand_lattice`` for generators already known to be squarefree"""
    return RadicandVector(n=len(gens), radicands=_build_radicands(gens))


def validate_generating_set(gens: Union[GeneratingSet, Sequence[int]]) -> bool:
    """True iff every a_i is squarefree > 1 and no subset product is a square"""
    gens = tuple(gens.gens if isinstance(gens, GeneratingSet) else gens)
    if not gens or any(a <= 1 for a in gens):
        return False
    try:
        rad = radicand_lattice(gens)
    except InvalidInputError:
        return False
    return rad.is_valid()


def _as_fraction(value: Scalar) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, sympy.Rational):
        return Fraction(int(value.p), int(value.q))
    raise InvalidInputError(f"coefficients must be exact rationals, got {type(value).__name__}")


@dataclass(frozen=True, eq=False)
class FieldElement:
    """sum_j coeffs[j] * sqrt(D_j) over a fixed radicand vector"""
    rad: RadicandVector
    coeffs: Mapping[int, Fraction] = field(default_factory=dict)

    @classmethod
    def from_coefficients(cls, rad: RadicandVector, coeffs: Mapping[int, Scalar]) -> "FieldElement":
        clean = {}
        for j, c in coeffs.items():
            check_index(j, rad.n)
            c = _as_fraction(c)
            if c:
                clean[j] = c
        return cls(rad, clean)

    @classmethod
    def one(cls, rad: RadicandVector) -> "FieldElement":
        return cls(rad, {0: Fraction(1)})

    @classmethod
    def zero(cls, rad: RadicandVector) -> "FieldElement":
        return cls(rad, {})

    @classmethod
    def radical(cls, rad: RadicandVector, j: int, coefficient: Scalar = 1) -> "FieldElement":
        """coefficient * sqrt(D_j)"""
        return cls.from_coefficients(rad, {j: coefficient})

    def coefficient(self, j: int) -> Fraction:
        return self.coeffs.get(j, Fraction(0))

    def _check_same(self, other: "FieldElement") -> None:
        if self.rad != other.rad:
            raise InvalidInputError("elements live over different radicand vectors")

    def __add__(self, other: "FieldElement") -> "FieldElement":
        if not isinstance(other, FieldElement):
            other = FieldElement.from_coefficients(self.rad, {0: other})
        self._check_same(other)
        result = dict(self.coeffs)
        for j, c in other.coeffs.items():
            result[j] = result.get(j, 0) + c
        return FieldElement(self.rad, {j: c for j, c in result.items() if c})

    __radd__ = __add__

    def __neg__(self) -> "FieldElement":
        return FieldElement(self.rad, {j: -c for j, c in self.coeffs.items()})

    def __sub__(self, other: "FieldElement") -> "FieldElement":
        return self + (-other)

    def scale(self, factor: Scalar) -> "FieldElement":
        factor = _as_fraction(factor)
        if not factor:
            return FieldElement.zero(self.rad)
        return FieldElement(self.rad, {j: factor * c for j, c in self.coeffs.items()})

    def __mul__(self, other: Union["FieldElement", Scalar]) -> "FieldElement":
        if isinstance(other, FieldElement):
            return multiply(self, other)
        return self.scale(other)

    def __rmul__(self, other: Scalar) -> "FieldElement":
        return self.scale(other)

    def __truediv__(self, other: Scalar) -> "FieldElement":
        return self.scale(1 / _as_fraction(other))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.rad == other.rad and dict(self.coeffs) == dict(other.coeffs)

    def __hash__(self) -> int:
        return hash((self.rad, tuple(sorted(self.coeffs.items()))))

    def serialize(self) -> str:
        """Sparse ``index:p/q`` list, indices ascending"""
        return ",".join(f"{j}:{_format_rational(c)}" for j, c in sorted(self.coeffs.items()))

    @classmethod
    def parse(cls, text: str, rad: RadicandVector) -> "FieldElement":
        coeffs: Dict[int, Fraction] = {}
        for item in filter(None, (part.strip() for part in text.split(","))):
            try:
                index, value = item.split(":")
                coeffs[int(index)] = coeffs.get(int(index), Fraction(0)) + Fraction(value)
            except ValueError as exc:
                raise InvalidInputError(f"bad element term {item!r}") from exc
        return cls.from_coefficients(rad, coeffs)

    def __repr__(self) -> str:
        return f"FieldElement({self.serialize() or '0'})"


def _format_rational(value: Fraction) -> str:
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def odd_part_sign(d: int) -> int:
    """+1 if the odd part of d is 1 mod 4, else -1"""
    while d % 2 == 0:
        d //= 2
    return 1 if d % 4 == 1 else -1


def radical_product_sign(a: int, b: int) -> int:
    """Sign s in sqrt(a) sqrt(b) = s gcd(a, b) sqrt(ab / gcd^2).

    sqrt(d) stands for the real root of prod_{p | d} p*, with p* = (-1)^((p-1)/2) p
    for odd p and 2* = 2, rotated back to the real line when that product is -d.
    With these roots every block element of ``integral_basis`` is an algebraic
    integer, including fields whose radicands share primes that are 3 mod 4.
    """
    sign = odd_part_sign(gcd(a, b))
    if odd_part_sign(a) < 0 and odd_part_sign(b) < 0:
        sign = -sign
    return sign


def multiply(x: FieldElement, y: FieldElement) -> FieldElement:
    """Bilinear extension of sqrt(D_i) sqrt(D_j) = s gcd(D_i, D_j) sqrt(D_{i xor j}), s from ``radical_product_sign``"""
    x._check_same(y)
    radicands = x.rad.radicands
    result: Dict[int, Fraction] = {}
    for i, a in x.coeffs.items():
        for j, b in y.coeffs.items():
            k = i ^ j
            d_i, d_j = radicands[i], radicands[j]
            result[k] = result.get(k, 0) + a * b * radical_product_sign(d_i, d_j) * gcd(d_i, d_j)
    return FieldElement(x.rad, {k: c for k, c in result.items() if c})


def multiplication_matrix(x: FieldElement) -> sympy.Matrix:
    """Matrix of y -> xy on the radical basis; column j holds x sqrt(D_j)"""
    size = 1 << x.rad.n
    matrix = sympy.zeros(size, size)
    for j in range(size):
        for k, c in multiply(x, FieldElement.radical(x.rad, j)).coeffs.items():
            matrix[k, j] = sympy.Rational(c.numerator, c.denominator)
    return matrix


def characteristic_polynomial(x: FieldElement) -> List[Fraction]:
    """Coefficients of det(t - M_x), leading coefficient first"""
    poly = multiplication_matrix(x).charpoly()
    return [_as_fraction(sympy.Rational(c)) for c in poly.all_coeffs()]


def is_algebraic_integer(x: FieldElement) -> bool:
    return all(c.denominator == 1 for c in characteristic_polynomial(x))


def trace(x: FieldElement) -> Fraction:
    """Tr_{K/Q}(x) = 2^n times the rational coefficient"""
    return (1 << x.rad.n) * x.coefficient(0)


def inner_product(x: FieldElement, y: FieldElement) -> Fraction:
    """Trace form <x, y> = Tr(xy)"""
    x._check_same(y)
    radicands = x.rad.radicands
    # Only matching radicals survive the trace.
    total = sum((c * y.coeffs[j] * radicands[j] for j, c in x.coeffs.items() if j in y.coeffs), Fraction(0))
    return (1 << x.rad.n) * total


def galois_conjugate(i: int, x: FieldElement) -> FieldElement:
    """sigma_i: sqrt(D_j) -> chi_i(v_j) sqrt(D_j)"""
    check_index(i, x.rad.n)
    return FieldElement(x.rad, {j: (-c if dot(i, j) else c) for j, c in x.coeffs.items()})


def trace_by_conjugates(x: FieldElement) -> Fraction:
    """Trace as the sum of all Galois conjugates, which must be rational"""
    total = FieldElement.zero(x.rad)
    for i in range(1 << x.rad.n):
        total = total + galois_conjugate(i, x)
    if any(j != 0 for j in total.coeffs):
        raise InvalidInputError("sum of conjugates is not rational")
    return total.coefficient(0)


@dataclass(frozen=True)
class RamificationCase:
    """Ramification type at 2 and the exponent r of the 2-power in the discriminant"""
    label: int
    r: int

    _R = {1: 0, 2: 2, 3: 3}

    @classmethod
    def of(cls, label: int) -> "RamificationCase":
        if label not in cls._R:
            raise InvalidInputError(f"case label must be 1, 2 or 3, got {label}")
        return cls(label, cls._R[label])

    def __str__(self) -> str:
        return f"Case {self.label}"


CASE_1 = RamificationCase(1, 0)
CASE_2 = RamificationCase(2, 2)
CASE_3 = RamificationCase(3, 3)


def _two_adic_type(d: int) -> int:
    """Bit 0: d is even. Bit 1: the odd part of d is 3 mod 4.

    On squarefree radicands this is additive under the subfield product.
    """
    odd = d // 2 if d % 2 == 0 else d
    return (1 if d % 2 == 0 else 0) | (2 if odd % 4 == 3 else 0)


def classify_case(rad: RadicandVector) -> RamificationCase:
    """Case 1 if every D_j is 1 mod 4, Case 3 if an even D_j and an odd D_j = 3 mod 4 coexist, else Case 2"""
    radicands = rad.radicands[1:]
    if all(d % 4 == 1 for d in radicands):
        return CASE_1
    has_even = any(d % 2 == 0 for d in radicands)
    has_three = any(d % 4 == 3 for d in radicands)
    return CASE_3 if has_even and has_three else CASE_2


def discriminant(rad: RadicandVector, case: Optional[RamificationCase] = None) -> int:
    """2^(2^(n-1) r) times the product of all radicands"""
    case = case or classify_case(rad)
    product = 1
    for d in rad.radicands[1:]:
        product *= d
    return (1 << ((1 << (rad.n - 1)) * case.r)) * product


def _span_contains(basis: List[int], j: int) -> bool:
    span = {0}
    for b in basis:
        span |= {s ^ b for s in span}
    return j in span


def is_normalized(rad: RadicandVector, case: Optional[RamificationCase] = None) -> bool:
    """Generators other than the distinguished last ones are 1 mod 4"""
    case = case or classify_case(rad)
    gens = rad.generators
    n = rad.n
    if case.label == 1:
        return True
    if case.label == 2:
        return all(a % 4 == 1 for a in gens[:-1]) and gens[-1] % 4 != 1
    if n < 2:
        return False
    return all(a % 4 == 1 for a in gens[:-2]) and gens[-2] % 2 == 0 and gens[-1] % 4 == 3


def normalize_radicands(rad: RadicandVector) -> RadicandVector:
    """Relabel the subfields so the generating set has the distinguished generators last.

    The map j -> (D_j even, odd part of D_j = 3 mod 4) is a homomorphism to F_2^2.
    A basis of its kernel (smallest indices first) supplies generators that are
    1 mod 4; the remaining generators are chosen by their 2-adic type.
    """
    case = classify_case(rad)
    if case.label == 1 or is_normalized(rad, case):
        return rad
    n = rad.n
    types = [_two_adic_type(d) for d in rad.radicands]
    if case.label == 2:
        distinguished = [next(j for j in range(1, rad.ell + 1) if types[j])]
    else:
        even = next(j for j in range(1, rad.ell + 1) if types[j] & 1)
        three = next(j for j in range(1, rad.ell + 1) if types[j] == 2)
        distinguished = [even, three]
    kernel: List[int] = []
    for j in range(1, rad.ell + 1):
        if len(kernel) == n - len(distinguished):
            break
        if types[j] == 0 and not _span_contains(kernel, j):
            kernel.append(j)
    basis = kernel + distinguished
    normalized = radicands_from_generators_unchecked([rad.radicands[b] for b in basis])
    logger.debug(f"Normalized {rad} to {normalized} via indices {basis}")
    return normalized


def relabel(rad: RadicandVector, columns: Sequence[int]) -> RadicandVector:
    """Radicand vector for the generating set D_{columns[0]}, ..., D_{columns[n-1]}"""
    return radicands_from_generators_unchecked([rad.radicands[c] for c in columns])


def normalize_by_orbit_search(rad: RadicandVector) -> RadicandVector:
    """Try every GL_n(F_2) change of generators and keep the first normalized one.

    Slow; used to cross-check the intrinsic classification and ``normalize_radicands``.
    """
    case = classify_case(rad)
    for columns in general_linear_group(rad.n):
        candidate = relabel(rad, columns)
        if is_normalized(candidate, case):
            return candidate
    raise InvalidInputError(f"no generating set of {rad} is normalized for {case}")
