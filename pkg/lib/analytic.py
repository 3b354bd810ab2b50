"""
Volumes and main terms.

F(R_2, ..., R_l) is the measure, under prod da_j / a_j, of

    R_j <= a_j   (2 <= j <= l-1),     a_2 <= ... <= a_l <= R_l.

In the variables y_j = log a_j the region is a polytope, so F is a polynomial
in the log R_j. It is computed once per l by exact iterated integration and
evaluated with mpmath.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
import pandas as pd
import sympy

try:
    from .config import get_settings
    from .errors import BudgetExceededError, InvalidInputError
    from .f2_structure import ell_of, gl_order, volume_constant
    from .integral_basis import ShapeWindow, to_mpf
    from .parametrization import LatticeQuery, count_lattice_points
    from .sieve_density import EulerProduct, carefree_density_constant, euler_product, omega1
except ImportError:
    from config import get_settings
    from errors import BudgetExceededError, InvalidInputError
    from f2_structure import ell_of, gl_order, volume_constant
    from integral_basis import ShapeWindow, to_mpf
    from parametrization import LatticeQuery, count_lattice_points
    from sieve_density import EulerProduct, carefree_density_constant, euler_product, omega1

logger = logging.getLogger(__name__)

CLOSED_FORM = "closed_form"
QUADRATURE = "quadrature"
DISPLAYED = "displayed_integral"


@dataclass(frozen=True)
class VolumeValue:
    window: ShapeWindow
    value: mpmath.mpf
    method: str


def _log_symbols(ell: int) -> Tuple[sympy.Symbol, ...]:
    return sympy.symbols(f"r2:{ell + 1}", real=True)


def _region_lower_bounds(ell: int) -> List[int]:
    """Positions (2-based) whose log bound is the lower limit of y_2..y_l"""
    return list(range(2, ell)) + [ell - 1]


def _displayed_lower_bounds(ell: int) -> List[int]:
    return [2] + list(range(2, ell))


@lru_cache(maxsize=None)
def _iterated_polynomial(ell: int, displayed: bool) -> Tuple[sympy.Expr, Tuple[sympy.Symbol, ...]]:
    """Iterated integral over y_2 <= ... <= y_l <= r_l with the given lower limits"""
    r = _log_symbols(ell)
    y, t = sympy.symbols("y t", real=True)
    lowers = _displayed_lower_bounds(ell) if displayed else _region_lower_bounds(ell)
    inner = sympy.Integer(1)
    for j in range(2, ell):
        lower = r[lowers[j - 2] - 2]
        inner = sympy.integrate(inner.subs(y, t), (t, lower, y))
        inner = sympy.expand(inner)
    polynomial = sympy.integrate(inner, (y, r[lowers[-1] - 2], r[ell - 2]))
    return sympy.expand(polynomial), r


def _log_bounds(window: ShapeWindow) -> List[mpmath.mpf]:
    return [mpmath.log(to_mpf(b)) for b in window.bounds]


def _evaluate(window: ShapeWindow, displayed: bool) -> mpmath.mpf:
    ell = window.ell
    if ell < 3:
        return mpmath.mpf(1)
    if not window.is_bounded:
        return mpmath.inf
    polynomial, symbols = _iterated_polynomial(ell, displayed)
    values = _log_bounds(window)
    with mpmath.workprec(get_settings().precision_bits):
        function = sympy.lambdify(symbols, polynomial, modules="mpmath")
        value = function(*values)
    return mpmath.mpf(value) if value > 0 else mpmath.mpf(0)


def shape_volume_F(window: ShapeWindow) -> VolumeValue:
    """F of the window by exact polynomial integration; l = 3 gives log(R_3 / R_2)^2 / 2"""
    return VolumeValue(window=window, value=_evaluate(window, displayed=False), method=CLOSED_FORM)


def shape_volume_F_displayed(window: ShapeWindow) -> VolumeValue:
    """The iterated integral with inner lower limits R_{j-1}; equal to F when l = 3"""
    return VolumeValue(window=window, value=_evaluate(window, displayed=True), method=DISPLAYED)


class _Simpson:
    """Adaptive Simpson with Richardson correction and a global evaluation budget"""

    def __init__(self, budget: int):
        self.budget = budget
        self.evaluations = 0

    def integrate(self, f: Callable[[float], float], a: float, b: float, tol: float) -> float:
        if b <= a:
            return 0.0
        fa, fm, fb = f(a), f((a + b) / 2), f(b)
        self._count(3)
        whole = (b - a) / 6 * (fa + 4 * fm + fb)
        return self._refine(f, a, b, fa, fm, fb, whole, tol, 0)

    def _count(self, k: int) -> None:
        self.evaluations += k
        if self.evaluations > self.budget:
            raise BudgetExceededError("quadrature", self.evaluations, self.budget)

    def _refine(self, f, a, b, fa, fm, fb, whole, tol, depth):
        m = (a + b) / 2
        lm, rm = (a + m) / 2, (m + b) / 2
        flm, frm = f(lm), f(rm)
        self._count(2)
        left = (m - a) / 6 * (fa + 4 * flm + fm)
        right = (b - m) / 6 * (fm + 4 * frm + fb)
        delta = left + right - whole
        if depth >= 50 or abs(delta) <= 15 * tol:
            return left + right + delta / 15
        return (self._refine(f, a, m, fa, flm, fm, left, tol / 2, depth + 1)
                + self._refine(f, m, b, fm, frm, fb, right, tol / 2, depth + 1))


def shape_volume_F_quadrature(window: ShapeWindow, tol: float = 1e-10,
                              budget: Optional[int] = None) -> VolumeValue:
    """F by nested adaptive quadrature in the log variables"""
    if tol <= 0:
        raise InvalidInputError("tol must be positive")
    ell = window.ell
    if ell < 3:
        return VolumeValue(window=window, value=mpmath.mpf(1), method=QUADRATURE)
    if not window.is_bounded:
        return VolumeValue(window=window, value=mpmath.inf, method=QUADRATURE)
    logs = [float(x) for x in _log_bounds(window)]
    lowers = [logs[p - 2] for p in _region_lower_bounds(ell)]
    upper = logs[-1]
    scale = max(upper - lowers[-1], 1e-300) ** (ell - 1)
    absolute = tol * scale / (ell * 4.0)
    simpson = _Simpson(budget or get_settings().quadrature_budget)

    def level(j: int, y: float) -> float:
        # measure of y_2 <= ... <= y_j <= y with y_k >= lowers[k - 2]
        if j == 1:
            return 1.0
        return simpson.integrate(lambda t: level(j - 1, t), lowers[j - 2], y, absolute)

    value = simpson.integrate(lambda t: level(ell - 1, t), lowers[-1], upper, absolute)
    logger.debug(f"Quadrature for l = {ell} used {simpson.evaluations} evaluations")
    return VolumeValue(window=window, value=mpmath.mpf(max(value, 0.0)), method=QUADRATURE)


def region_volume(Y, window: ShapeWindow, n: int) -> mpmath.mpf:
    """Volume of one sigma-cell: c_l * Y * F"""
    if window.ell != ell_of(n):
        raise InvalidInputError(f"window has {len(window.bounds)} bounds, n = {n} needs {ell_of(n) - 1}")
    if Y <= 0:
        return mpmath.mpf(0)
    c = volume_constant(n)
    F = shape_volume_F(window).value
    return mpmath.mpf(c.numerator) / c.denominator * to_mpf(Fraction(Y) if isinstance(Y, int) else Y) * F


def total_region_volume(Y, window: ShapeWindow, n: int) -> mpmath.mpf:
    """l! * c_l * Y * F, the union over all orderings"""
    return math.factorial(ell_of(n)) * region_volume(Y, window, n)


@dataclass(frozen=True)
class MainTermConstant:
    n: int
    omega1: int
    c_ell: Fraction
    euler_value: mpmath.mpf
    euler_tail: mpmath.mpf
    value: mpmath.mpf
    pmax: int

    @property
    def rational_factor(self) -> Fraction:
        ell = ell_of(self.n)
        return Fraction(self.omega1 * math.factorial(ell), 4 ** ell * gl_order(self.n)) * self.c_ell

    @property
    def lower(self) -> mpmath.mpf:
        return self.value * (1 - self.euler_tail)

    @property
    def upper(self) -> mpmath.mpf:
        return self.value

    def contains(self, value: mpmath.mpf) -> bool:
        return self.lower <= value <= self.upper


def main_term_constant(n: int, pmax: int) -> MainTermConstant:
    """C_l = omega1 c_l l! / (4^l #GL_n(F_2)) times the Euler product"""
    ell = ell_of(n)
    euler = euler_product(ell, pmax)
    w = omega1(n)
    c = volume_constant(n)
    factor = Fraction(w * math.factorial(ell), 4 ** ell * gl_order(n)) * c
    value = mpmath.mpf(factor.numerator) / factor.denominator * euler.value
    return MainTermConstant(n=n, omega1=w, c_ell=c, euler_value=euler.value,
                            euler_tail=euler.tail_bound, value=value, pmax=pmax)


def product_scale(X, n: int) -> mpmath.mpf:
    """Y = X^(1 / 2^(n-1))"""
    return mpmath.power(to_mpf(Fraction(X) if isinstance(X, int) else X), mpmath.mpf(1) / (1 << (n - 1)))


def predicted_count(X, n: int, window: ShapeWindow, pmax: int = 1000,
                    constant: Optional[MainTermConstant] = None) -> mpmath.mpf:
    """C_l * F * X^(1 / 2^(n-1)); zero for X <= 0"""
    if X <= 0:
        return mpmath.mpf(0)
    constant = constant or main_term_constant(n, pmax)
    return constant.value * shape_volume_F(window).value * product_scale(X, n)


@dataclass
class ComparisonReport:
    n: int
    rows: List[Dict[str, object]] = field(default_factory=list)
    slope: Optional[float] = None
    approaching_one: Optional[bool] = None

    def ratios(self) -> List[mpmath.mpf]:
        return [row["ratio"] for row in self.rows]


def compare_asymptotic(empirical: Sequence[Tuple[int, int]], predicted_fn: Callable[[int], mpmath.mpf],
                       n: int) -> ComparisonReport:
    """Ratios and Y^((l-1)/l)-normalized residuals per checkpoint.

    ``slope`` is the least-squares slope of ratio against 1 / log X;
    ``approaching_one`` says whether |ratio - 1| never grows along the series.
    """
    if not empirical:
        raise InvalidInputError("at least one checkpoint is required")
    ell = ell_of(n)
    report = ComparisonReport(n=n)
    for X, count in empirical:
        predicted = predicted_fn(X)
        if predicted == 0:
            raise InvalidInputError(f"prediction at X = {X} is zero")
        Y = product_scale(X, n)
        report.rows.append({
            "X": X,
            "Y": Y,
            "empirical": count,
            "predicted": predicted,
            "ratio": count / predicted,
            "normalized_residual": (count - predicted) / mpmath.power(Y, mpmath.mpf(ell - 1) / ell),
        })
    distances = [abs(float(row["ratio"]) - 1.0) for row in report.rows]
    report.approaching_one = all(b <= a for a, b in zip(distances, distances[1:]))
    if len(report.rows) >= 2:
        xs = np.array([1.0 / math.log(row["X"]) for row in report.rows])
        ys = np.array([float(row["ratio"]) for row in report.rows])
        if np.ptp(xs) > 0:
            report.slope = float(np.polyfit(xs, ys, 1)[0])
    return report


def comparison_frame(report: ComparisonReport, digits: int = 15) -> pd.DataFrame:
    """One row per checkpoint; floating columns rendered to the given significant digits"""
    columns = ["X", "Y", "empirical", "predicted", "ratio", "normalized_residual"]
    frame = pd.DataFrame(report.rows, columns=columns)
    for name in ("Y", "predicted", "ratio", "normalized_residual"):
        frame[name] = frame[name].map(lambda v: mpmath.nstr(v, digits))
    return frame


@dataclass(frozen=True)
class CarefreeRatio:
    n: int
    Y: int
    window: ShapeWindow
    carefree: int
    total: int
    volume: mpmath.mpf
    ratio: mpmath.mpf
    density: EulerProduct

    @property
    def relative_error(self) -> mpmath.mpf:
        return abs(self.ratio / self.density.value - 1)


def carefree_count_ratio(n: int, Y: int, window: ShapeWindow, pmax: int = 1000,
                         workers: int = 1) -> CarefreeRatio:
    """Strongly carefree points in the region divided by its volume.

    Tends to the carefree density constant as Y grows.
    """
    query = LatticeQuery(n=n, Y=Y, window=window)
    report = count_lattice_points(query, carefree_only=False, workers=workers)
    volume = total_region_volume(Y, window, n)
    if volume == 0:
        raise InvalidInputError(f"region volume is zero for window {window}")
    ratio = report.carefree_total / volume
    density = carefree_density_constant(ell_of(n), pmax)
    logger.info(f"Carefree ratio at Y = {Y}: {mpmath.nstr(ratio, 8)} against {mpmath.nstr(density.value, 8)}")
    return CarefreeRatio(n=n, Y=Y, window=window, carefree=report.carefree_total, total=report.total,
                         volume=volume, ratio=ratio, density=density)
