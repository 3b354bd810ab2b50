"""
Integral bases, Gram matrices and shapes of multiquadratic fields.

The basis in every ramification case is assembled from blocks of radicals of
size 2^m, each transformed by the sign matrix A_m and divided by 2^m:

    Case 1 (m = n):      alpha_j over D_0..D_l
    Case 2 (m = n - 1):  alpha_j over the first half, beta_j over the second
    Case 3 (m = n - 2):  alpha, beta, gamma, eta over the four quarters,
                         with delta_j = (beta_j + eta_j) / 2

The refined basis replaces alpha_0 by 1 = alpha_0 + ... + alpha_L.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import List, Optional, Sequence, Tuple, Union

import mpmath
import sympy

try:
    from .errors import InvalidInputError
    from .f2_structure import sign_array, reduced_sign_matrix
    from .field_algebra import (
        FieldElement, RadicandVector, RamificationCase,
        classify_case, discriminant, inner_product, is_normalized,
        normalize_radicands, radicand_lattice, trace, validate_generating_set,
    )
except ImportError:
    from errors import InvalidInputError
    from f2_structure import sign_array, reduced_sign_matrix
    from field_algebra import (
        FieldElement, RadicandVector, RamificationCase,
        classify_case, discriminant, inner_product, is_normalized,
        normalize_radicands, radicand_lattice, trace, validate_generating_set,
    )

logger = logging.getLogger(__name__)

Bound = Union[Fraction, mpmath.mpf, float]


def to_sympy(value: Fraction) -> sympy.Rational:
    return sympy.Rational(value.numerator, value.denominator)


def from_sympy(value) -> Fraction:
    value = sympy.Rational(value)
    return Fraction(int(value.p), int(value.q))


def format_rational(value: Fraction) -> str:
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class GramMatrix:
    """Symmetric matrix of exact rationals"""
    entries: Tuple[Tuple[Fraction, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.entries)

    @classmethod
    def from_sympy(cls, matrix: sympy.Matrix) -> "GramMatrix":
        return cls(tuple(tuple(from_sympy(matrix[r, c]) for c in range(matrix.cols))
                         for r in range(matrix.rows)))

    def to_sympy(self) -> sympy.Matrix:
        if not self.entries:
            return sympy.zeros(0, 0)
        return sympy.Matrix([[to_sympy(x) for x in row] for row in self.entries])

    def determinant(self) -> Fraction:
        if not self.entries:
            return Fraction(1)
        return from_sympy(self.to_sympy().det(method="bareiss"))

    def leading_minors(self) -> List[Fraction]:
        matrix = self.to_sympy()
        return [from_sympy(matrix[:k, :k].det(method="bareiss")) for k in range(1, self.dim + 1)]

    def is_symmetric(self) -> bool:
        return all(self.entries[i][j] == self.entries[j][i]
                   for i in range(self.dim) for j in range(i))

    def is_positive_definite(self) -> bool:
        return all(minor > 0 for minor in self.leading_minors())

    def block(self, rows: Sequence[int], cols: Sequence[int]) -> Tuple[Tuple[Fraction, ...], ...]:
        return tuple(tuple(self.entries[r][c] for c in cols) for r in rows)

    def to_rows(self) -> List[List[str]]:
        return [[format_rational(x) for x in row] for row in self.entries]


def to_mpf(value: Bound) -> mpmath.mpf:
    if isinstance(value, Fraction):
        return mpmath.mpf(value.numerator) / value.denominator
    return mpmath.mpf(value)


def _parse_bound(token) -> Bound:
    if isinstance(token, (Fraction, mpmath.mpf)):
        return token
    if isinstance(token, int):
        return Fraction(token)
    if isinstance(token, float):
        return math.inf if math.isinf(token) else Fraction(token)
    text = str(token).strip().lower()
    if text in ("inf", "infinity", "oo", "∞"):
        return math.inf
    if text == "e":
        return mpmath.e
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidInputError(f"bad window bound {token!r}") from exc


def _le(a, b) -> bool:
    """a <= b across Fraction, mpf and infinity"""
    if b == math.inf:
        return True
    if a == math.inf:
        return False
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a <= b
    return to_mpf(a) <= to_mpf(b)


@dataclass(frozen=True)
class ShapeWindow:
    """Bounds (R_2, ..., R_l); infinity is allowed as the last bound"""
    bounds: Tuple[Bound, ...]

    def __post_init__(self):
        if not self.bounds:
            raise InvalidInputError("a window needs at least one bound")
        previous = Fraction(1)
        for bound in self.bounds:
            if not _le(previous, bound):
                raise InvalidInputError(f"window bounds must be >= 1 and nondecreasing: {self.bounds}")
            previous = bound

    @classmethod
    def of(cls, *bounds) -> "ShapeWindow":
        return cls(tuple(_parse_bound(b) for b in bounds))

    @classmethod
    def parse(cls, text: str) -> "ShapeWindow":
        return cls.of(*[part for part in text.split(",") if part.strip()])

    @classmethod
    def vacuous(cls, ell: int) -> "ShapeWindow":
        return cls((Fraction(1),) * (ell - 2) + (math.inf,))

    @property
    def ell(self) -> int:
        return len(self.bounds) + 1

    @property
    def is_bounded(self) -> bool:
        return self.bounds[-1] != math.inf

    def __str__(self) -> str:
        return ",".join("inf" if b == math.inf else (format_rational(b) if isinstance(b, Fraction) else mpmath.nstr(b, 15))
                        for b in self.bounds)


@dataclass(frozen=True)
class ShapeParams:
    """Sorted ratios lambda_j = D_sigma(j) / D_sigma(1), j = 2..l"""
    lambdas: Tuple[Fraction, ...]
    sigma: Tuple[int, ...]
    case: Optional[RamificationCase] = None

    def decimals(self) -> List[str]:
        return [mpmath.nstr(to_mpf(x), 15) for x in self.lambdas]


def sort_radicands(values: Sequence[int]) -> Tuple[Tuple[int, ...], Tuple[Fraction, ...]]:
    """Stable ascending order of D_1..D_l (1-based) and the ratios to the smallest"""
    order = tuple(sorted(range(1, len(values) + 1), key=lambda j: values[j - 1]))
    smallest = values[order[0] - 1]
    return order, tuple(Fraction(values[j - 1], smallest) for j in order[1:])


def shape_params(rad: RadicandVector, case: Optional[RamificationCase] = None) -> ShapeParams:
    """lambda vector of a field; equal radicands are rejected"""
    values = rad.radicands[1:]
    if len(set(values)) != len(values) or min(values) < 1:
        raise InvalidInputError(f"radicands {values} contain ties and do not define a field")
    order, lambdas = sort_radicands(values)
    return ShapeParams(lambdas=lambdas, sigma=order, case=case)


def window_contains(shape: Union[ShapeParams, Sequence[Fraction]], window: ShapeWindow) -> bool:
    """R_j <= lambda_j for 2 <= j <= l-1, and lambda_l <= R_l (non-strict)"""
    lambdas = shape.lambdas if isinstance(shape, ShapeParams) else tuple(shape)
    if len(lambdas) != len(window.bounds):
        raise InvalidInputError(f"shape has {len(lambdas)} ratios but window has {len(window.bounds)} bounds")
    if not _le(lambdas[-1], window.bounds[-1]):
        return False
    return all(_le(bound, lam) for bound, lam in zip(window.bounds[:-1], lambdas[:-1]))


def _block_offsets(n: int, case: RamificationCase) -> Tuple[int, List[int]]:
    m = {1: n, 2: n - 1, 3: n - 2}[case.label]
    if m < 0:
        raise InvalidInputError(f"{case} needs n >= {n - m}")
    size = 1 << m
    return m, [k * size for k in range(1 << (n - m))]


def _block_elements(rad: RadicandVector, m: int, offset: int) -> List[FieldElement]:
    """(1 / 2^m) A_m applied to sqrt(D_offset), ..., sqrt(D_{offset + 2^m - 1})"""
    signs = sign_array(m)
    size = 1 << m
    return [
        FieldElement.from_coefficients(
            rad, {offset + k: Fraction(int(signs[j, k]), size) for k in range(size)})
        for j in range(size)
    ]


@dataclass(frozen=True)
class IntegralBasis:
    """Refined Z-basis of the ring of integers, first element 1, plus the raw basis it came from"""
    rad: RadicandVector
    case: RamificationCase
    elements: Tuple[FieldElement, ...]
    raw_elements: Tuple[FieldElement, ...]
    m: int

    @property
    def dim(self) -> int:
        return len(self.elements)

    def coefficient_matrix(self, raw: bool = False) -> sympy.Matrix:
        elements = self.raw_elements if raw else self.elements
        return sympy.Matrix([[to_sympy(e.coefficient(j)) for j in range(self.dim)] for e in elements])

    def change_of_basis_det(self) -> Fraction:
        """det of the refined basis in terms of the raw one; +-1 for a unimodular refinement"""
        refined = from_sympy(self.coefficient_matrix().det(method="bareiss"))
        raw = from_sympy(self.coefficient_matrix(raw=True).det(method="bareiss"))
        return refined / raw

    def refinement_matrix(self) -> sympy.Matrix:
        """U with refined = U * raw (row vectors of basis elements)"""
        size = 1 << self.m
        matrix = sympy.eye(self.dim)
        for k in range(size):
            matrix[0, k] = 1
        return matrix

    @cached_property
    def _inverse(self) -> sympy.Matrix:
        return self.coefficient_matrix().inv()

    def coordinates(self, x: FieldElement) -> List[Fraction]:
        """Rational coordinates of x in the refined basis"""
        row = sympy.Matrix([[to_sympy(x.coefficient(j)) for j in range(self.dim)]])
        return [from_sympy(v) for v in row * self._inverse]

    def contains(self, x: FieldElement) -> bool:
        return all(c.denominator == 1 for c in self.coordinates(x))

    def is_closed_under_multiplication(self) -> bool:
        """Every product b_i b_j lies in the Z-span of the basis"""
        elements = self.elements
        return all(self.contains(elements[i] * elements[j])
                   for i in range(self.dim) for j in range(i, self.dim))

    def spans_same_lattice(self, elements: Sequence[FieldElement]) -> bool:
        """The given elements are a Z-basis of the same lattice"""
        if len(elements) != self.dim:
            return False
        transition = [self.coordinates(e) for e in elements]
        if any(c.denominator != 1 for row in transition for c in row):
            return False
        det = sympy.Matrix([[int(c) for c in row] for row in transition]).det(method="bareiss")
        return abs(int(det)) == 1


def integral_basis(rad: RadicandVector, case: Optional[RamificationCase] = None) -> IntegralBasis:
    """Integral basis in the given (normalized) labelling"""
    actual = classify_case(rad)
    case = case or actual
    if case != actual:
        raise InvalidInputError(f"radicands {rad} are in {actual}, not {case}")
    if not rad.is_valid():
        raise InvalidInputError(f"radicands {rad} do not define a field of degree 2^{rad.n}")
    if not is_normalized(rad, case):
        raise InvalidInputError(f"radicands {rad} are not in normalized generator order for {case}")
    m, offsets = _block_offsets(rad.n, case)
    blocks = [_block_elements(rad, m, offset) for offset in offsets]
    if case.label == 3:
        alpha, beta, gamma, eta = blocks
        delta = [(b + e) / 2 for b, e in zip(beta, eta)]
        raw = alpha + beta + gamma + delta
    else:
        raw = [e for block in blocks for e in block]
    one = FieldElement.one(rad)
    elements = [one] + raw[1:]
    logger.debug(f"Integral basis for {rad}: {case}, blocks of size {1 << m}")
    return IntegralBasis(rad=rad, case=case, elements=tuple(elements), raw_elements=tuple(raw), m=m)


def distinguished_first_order(n: int, case: RamificationCase) -> Tuple[int, ...]:
    """Generator positions reordered so the generators that are not 1 mod 4 come first"""
    if case.label == 1:
        return tuple(range(n))
    if case.label == 2:
        return (n - 1,) + tuple(range(n - 1))
    return (n - 2, n - 1) + tuple(range(n - 2))


def product_integral_basis(rad: RadicandVector,
                           case: Optional[RamificationCase] = None) -> Tuple[FieldElement, ...]:
    """Integral basis of products over generator subsets S:

        omega_S = prod_{i in S} (sqrt(a_i) - a_i) / (2^delta_S g_S)

    with a_1 (and a_2 in Case 3) the distinguished generators, g_S^2 the square
    part of prod a_i and delta_S = |S|, less one when S meets the distinguished
    generators in Cases 2 and 3.
    Only generator roots enter, so the lattice does not depend on how the
    radicals sqrt(D_j) are signed.
    """
    actual = classify_case(rad)
    case = case or actual
    if case != actual:
        raise InvalidInputError(f"radicands {rad} are in {actual}, not {case}")
    if not rad.is_valid():
        raise InvalidInputError(f"radicands {rad} do not define a field of degree 2^{rad.n}")
    if not is_normalized(rad, case):
        raise InvalidInputError(f"radicands {rad} are not in normalized generator order for {case}")
    order = distinguished_first_order(rad.n, case)
    distinguished = {1: 0, 2: 1, 3: 2}[case.label]
    one = FieldElement.one(rad)
    elements = []
    for bits in range(1 << rad.n):
        members = [t for t in range(rad.n) if (bits >> t) & 1]
        product = one
        b = 1
        index = 0
        for t in members:
            position = order[t]
            a = rad.generators[position]
            product = product * (FieldElement.radical(rad, 1 << position) - a)
            b *= a
            index |= 1 << position
        g = math.isqrt(b // rad[index])
        delta = len(members) - (1 if any(t < distinguished for t in members) else 0)
        elements.append(product / ((1 << delta) * g))
    logger.debug(f"Product basis for {rad}: {case}, generator order {order}")
    return tuple(elements)


def _gram_of(elements: Sequence[FieldElement]) -> GramMatrix:
    size = len(elements)
    rows = [[Fraction(0)] * size for _ in range(size)]
    for i in range(size):
        for j in range(i, size):
            rows[i][j] = rows[j][i] = inner_product(elements[i], elements[j])
    return GramMatrix(tuple(tuple(row) for row in rows))


def gram_full(basis: IntegralBasis) -> GramMatrix:
    """<b_i, b_j> under the trace form"""
    return _gram_of(basis.elements)


def projected_elements(basis: IntegralBasis) -> List[FieldElement]:
    """b - (Tr(b) / 2^n) 1 for every basis element after the first"""
    size = 1 << basis.rad.n
    one = FieldElement.one(basis.rad)
    return [b - one.scale(trace(b) / size) for b in basis.elements[1:]]


def gram_projected(basis: IntegralBasis) -> GramMatrix:
    """Gram matrix of the lattice projected orthogonally to 1"""
    return _gram_of(projected_elements(basis))


def _diag(values: Sequence[int]) -> sympy.Matrix:
    return sympy.diag(*values) if values else sympy.zeros(0, 0)


def _sandwich(signs: sympy.Matrix, values: Sequence[int], scale: sympy.Rational) -> sympy.Matrix:
    return scale * signs * _diag(values) * signs.T


def _place(blocks: Sequence[Tuple[int, int, sympy.Matrix]], size: int) -> sympy.Matrix:
    matrix = sympy.zeros(size, size)
    for row, col, block in blocks:
        for r in range(block.rows):
            for c in range(block.cols):
                matrix[row + r, col + c] = block[r, c]
    return matrix


def gram_closed_form(rad: RadicandVector, case: Optional[RamificationCase] = None,
                     refined: bool = True) -> GramMatrix:
    """Gram matrix from the sign-matrix products instead of the trace form.

    Blocks are 2^n / 4^m * A_m diag(D over the block) A_m. In Case 3 the delta
    block couples to beta as [[G_b, G_b / 2], [G_b / 2, (G_b + G_eta) / 4]].
    """
    case = case or classify_case(rad)
    n = rad.n
    m, offsets = _block_offsets(n, case)
    size = 1 << m
    scale = sympy.Rational(1 << n, 1 << (2 * m))
    signs = sympy.Matrix(sign_array(m).tolist())
    grams = [_sandwich(signs, rad.radicands[o:o + size], scale) for o in offsets]
    if case.label == 3:
        g_alpha, g_beta, g_gamma, g_eta = grams
        placed = [
            (0, 0, g_alpha), (size, size, g_beta), (2 * size, 2 * size, g_gamma),
            (size, 3 * size, g_beta / 2), (3 * size, size, g_beta / 2),
            (3 * size, 3 * size, (g_beta + g_eta) / 4),
        ]
    else:
        placed = [(o, o, g) for o, g in zip(offsets, grams)]
    raw = _place(placed, 1 << n)
    if refined:
        u = sympy.eye(1 << n)
        for k in range(size):
            u[0, k] = 1
        raw = u * raw * u.T
    return GramMatrix.from_sympy(raw)


def gram_projected_closed_form(rad: RadicandVector, case: Optional[RamificationCase] = None) -> GramMatrix:
    """Projected Gram from the reduced sign matrix; only the alpha block changes"""
    case = case or classify_case(rad)
    n = rad.n
    m, offsets = _block_offsets(n, case)
    size = 1 << m
    full = gram_closed_form(rad, case, refined=False).to_sympy()
    projected = full[1:, 1:]
    if m > 0:
        scale = sympy.Rational(1 << n, 1 << (2 * m))
        reduced = sympy.Matrix(reduced_sign_matrix(m).tolist())
        alpha = _sandwich(reduced, rad.radicands[1:size], scale)
        for r in range(size - 1):
            for c in range(size - 1):
                projected[r, c] = alpha[r, c]
    return GramMatrix.from_sympy(projected)


@dataclass(frozen=True)
class MultiquadraticField:
    """A field together with its normalized labelling and everything derived from it"""
    rad: RadicandVector
    case: RamificationCase

    @classmethod
    def from_generators(cls, gens: Sequence[int]) -> "MultiquadraticField":
        if not validate_generating_set(gens):
            raise InvalidInputError(f"{tuple(gens)} does not generate a field of degree 2^{len(gens)}")
        return cls.from_radicands(radicand_lattice(gens))

    @classmethod
    def from_radicands(cls, rad: RadicandVector) -> "MultiquadraticField":
        normalized = normalize_radicands(rad)
        return cls(rad=normalized, case=classify_case(normalized))

    @property
    def discriminant(self) -> int:
        return discriminant(self.rad, self.case)

    def basis(self) -> IntegralBasis:
        return integral_basis(self.rad, self.case)

    def product_basis(self) -> Tuple[FieldElement, ...]:
        return product_integral_basis(self.rad, self.case)

    def shape(self) -> ShapeParams:
        return shape_params(self.rad, self.case)
