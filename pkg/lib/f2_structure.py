"""
Combinatorics of F_2^n.

An index j in [0, 2^n - 1] stands for the vector v_j whose coordinate t is
bit t of j. Adding vectors is XOR of indices, and the quadratic characters
are chi_i(v_j) = (-1)^(v_i . v_j). The sign matrix A_n collects all of them.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
import sympy

try:
    from .config import get_settings
    from .errors import InvalidInputError, SizeLimitError
except ImportError:
    from config import get_settings
    from errors import InvalidInputError, SizeLimitError

logger = logging.getLogger(__name__)

Permutation = Tuple[int, ...]
GLMatrix = Tuple[int, ...]  # images of the basis vectors e_0..e_{n-1}, as indices


def ell_of(n: int) -> int:
    return (1 << n) - 1


def check_dimension(n: int, minimum: int = 0) -> None:
    """Reject n outside [minimum, MQ_MAX_N]"""
    if not isinstance(n, (int, np.integer)) or n < minimum:
        raise InvalidInputError(f"n must be an integer >= {minimum}, got {n!r}")
    cap = get_settings().max_n
    if n > cap:
        raise SizeLimitError(f"n = {n} exceeds the dimension cap {cap}")


def check_index(j: int, n: int) -> None:
    if not 0 <= j <= ell_of(n):
        raise InvalidInputError(f"index {j} out of range [0, {ell_of(n)}] for n = {n}")


def dot(i: int, j: int) -> int:
    """v_i . v_j in F_2"""
    return bin(i & j).count("1") & 1


def index_xor(i: int, j: int, n: int) -> int:
    """Index of v_i + v_j"""
    check_index(i, n)
    check_index(j, n)
    return i ^ j


def character_value(i: int, j: int, n: Optional[int] = None) -> int:
    """chi_i(v_j): +1 when v_i . v_j = 0, else -1"""
    if n is not None:
        check_index(i, n)
        check_index(j, n)
    elif i < 0 or j < 0:
        raise InvalidInputError(f"indices must be non-negative, got ({i}, {j})")
    return -1 if dot(i, j) else 1


@dataclass(frozen=True)
class SignMatrix:
    """A_n as a read-only integer array"""
    n: int
    entries: np.ndarray

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.entries, self.entries.T))

    def squares_to_scalar(self) -> bool:
        square = self.entries @ self.entries
        return bool(np.array_equal(square, (1 << self.n) * np.eye(self.size, dtype=np.int64)))

    def to_rows(self) -> List[List[int]]:
        return self.entries.tolist()


@lru_cache(maxsize=None)
def sign_array(n: int) -> np.ndarray:
    if n == 0:
        block = np.ones((1, 1), dtype=np.int64)
    else:
        half = sign_array(n - 1)
        block = np.block([[half, half], [half, -half]])
    block.setflags(write=False)
    return block


def sign_matrix(n: int) -> SignMatrix:
    """A_n from the recursion A_{n+1} = [[A_n, A_n], [A_n, -A_n]]"""
    check_dimension(n)
    return SignMatrix(n=n, entries=sign_array(n))


def reduced_sign_matrix(n: int) -> np.ndarray:
    """A_n without its first row and column"""
    if n == 0:
        raise InvalidInputError("the reduced sign matrix of A_0 is empty")
    check_dimension(n, minimum=1)
    return sign_array(n)[1:, 1:]


def check_permutation(sigma: Sequence[int], ell: int) -> Permutation:
    sigma = tuple(int(s) for s in sigma)
    if sorted(sigma) != list(range(1, ell + 1)):
        raise InvalidInputError(f"{sigma} is not a permutation of 1..{ell}")
    return sigma


@dataclass(frozen=True)
class ExponentMatrix:
    """
    Change of variables from log g to (log of the product, log lambda_2..lambda_l).

    Row 1 is all ones; row j holds the exponent of each g_i in
    D_sigma(j) / D_sigma(1).
    """
    n: int
    sigma: Permutation
    entries: sympy.Matrix

    def determinant(self) -> int:
        return int(self.entries.det(method="bareiss"))

    def rows(self) -> List[List[int]]:
        return [[int(x) for x in self.entries.row(r)] for r in range(self.entries.rows)]


def _exponent_rows(n: int, sigma: Permutation) -> sympy.Matrix:
    """Exponent of g_i in D_sigma(j) / D_sigma(1): [v_i . v_sigma(j) = 1] - [v_i . v_sigma(1) = 1]"""
    ell = ell_of(n)
    first = sigma[0]
    rows = [[1] * ell]
    for j in sigma[1:]:
        rows.append([dot(i, j) - dot(i, first) for i in range(1, ell + 1)])
    return sympy.Matrix(rows)


def exponent_matrix(n: int, sigma: Optional[Sequence[int]] = None) -> ExponentMatrix:
    """Exponent matrix from the monomial expansion of D_sigma(j) / D_sigma(1)"""
    check_dimension(n, minimum=1)
    ell = ell_of(n)
    sigma = check_permutation(sigma if sigma is not None else range(1, ell + 1), ell)
    return ExponentMatrix(n=n, sigma=sigma, entries=_exponent_rows(n, sigma))


def character_difference_matrix(n: int, sigma: Optional[Sequence[int]] = None) -> ExponentMatrix:
    """Same change of variables written as (chi_sigma(j) - chi_sigma(1)) / 2 row by row"""
    check_dimension(n, minimum=1)
    ell = ell_of(n)
    sigma = check_permutation(sigma if sigma is not None else range(1, ell + 1), ell)
    rows = [[1] * ell]
    for j in sigma[1:]:
        rows.append([(character_value(i, j) - character_value(i, sigma[0])) // 2 for i in range(1, ell + 1)])
    return ExponentMatrix(n=n, sigma=sigma, entries=sympy.Matrix(rows))


@lru_cache(maxsize=None)
def exponent_matrix_det(n: int) -> int:
    return abs(exponent_matrix(n).determinant())


def volume_constant(n: int) -> Fraction:
    """c_l = 1 / |det C|"""
    return Fraction(1, exponent_matrix_det(n))


def gl_order(n: int) -> int:
    """Order of GL_n(F_2)"""
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    order = 1
    for k in range(n):
        order *= (1 << n) - (1 << k)
    return order


def apply_matrix(matrix: GLMatrix, j: int) -> int:
    """Image of v_j under the matrix whose columns are the given indices"""
    image = 0
    for t, column in enumerate(matrix):
        if (j >> t) & 1:
            image ^= column
    return image


def general_linear_group(n: int) -> Iterator[GLMatrix]:
    """Every invertible n x n matrix over F_2, as a tuple of column indices"""
    check_dimension(n, minimum=1)
    if n > get_settings().orbit_max_n:
        raise SizeLimitError(f"GL_{n}(F_2) enumeration is capped at n = {get_settings().orbit_max_n}")
    nonzero = range(1, 1 << n)

    def extend(prefix: Tuple[int, ...], span: frozenset) -> Iterator[GLMatrix]:
        if len(prefix) == n:
            yield prefix
            return
        for column in nonzero:
            if column not in span:
                yield from extend(prefix + (column,), span | {s ^ column for s in span})

    yield from extend((), frozenset({0}))


def index_permutation(matrix: GLMatrix) -> Tuple[int, ...]:
    """Images of the indices 1..l under the matrix, as 1-based indices"""
    return tuple(apply_matrix(matrix, j) for j in range(1, 1 << len(matrix)))


@lru_cache(maxsize=None)
def index_permutations(n: int) -> Tuple[Tuple[int, ...], ...]:
    """For every M in GL_n(F_2) the map j -> index of M v_j on 1..l, 0-based positions"""
    perms = []
    for matrix in general_linear_group(n):
        perms.append(tuple(k - 1 for k in index_permutation(matrix)))
    logger.debug(f"Built {len(perms)} index permutations for n = {n}")
    return tuple(perms)


def all_permutations(ell: int) -> Iterator[Permutation]:
    """Permutations of 1..l in lexicographic order"""
    return permutations(range(1, ell + 1))
