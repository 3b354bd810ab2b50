#!/usr/bin/env python3
"""
Tests for the shape volume F, region volumes, the main-term constant and
the asymptotic comparison.

Usage: python3 test_analytic.py
"""

import os
import sys
from fractions import Fraction

import mpmath
import pytest

# Add lib to path for imports
lib_path = os.path.join(os.path.dirname(__file__), 'lib')
sys.path.insert(0, lib_path)

from analytic import (
    CLOSED_FORM, QUADRATURE, carefree_count_ratio, compare_asymptotic, comparison_frame, main_term_constant,
    predicted_count, product_scale, region_volume, shape_volume_F, shape_volume_F_displayed,
    shape_volume_F_quadrature, total_region_volume,
)
from errors import BudgetExceededError, InvalidInputError
from integral_basis import ShapeWindow
from parametrization import LatticeQuery, count_lattice_points, enumerate_fields
from sampling import make_rng
from sieve_density import euler_product

E_WINDOW = ShapeWindow.of(1, "e")


def close(a, b, rel=1e-9):
    return abs(mpmath.mpf(a) - mpmath.mpf(b)) <= rel * max(abs(mpmath.mpf(b)), mpmath.mpf(1e-300))


def test_F_closed_form_examples():
    print("🧪 Testing F for l = 3...")
    assert close(shape_volume_F(E_WINDOW).value, 0.5)
    assert shape_volume_F(E_WINDOW).method == CLOSED_FORM
    assert shape_volume_F(ShapeWindow.of(2, 2)).value == 0
    window = ShapeWindow.of(3, 12)
    assert close(shape_volume_F(window).value, mpmath.log(4) ** 2 / 2)
    print("  ✅ F(1, e) = 1/2, equal bounds give 0")


def test_F_edge_cases():
    assert shape_volume_F(ShapeWindow.of(1, "inf")).value == mpmath.inf
    assert shape_volume_F(ShapeWindow.of(5)).value == 1


def test_F_quadrature_agrees_on_random_windows():
    print("🧪 Testing quadrature against the closed form...")
    rng = make_rng(7)
    for _ in range(20):
        low = Fraction(int(rng.integers(100, 1000)), 100)
        high = low * Fraction(int(rng.integers(101, 5000)), 100)
        window = ShapeWindow.of(low, high)
        exact = shape_volume_F(window).value
        approx = shape_volume_F_quadrature(window, tol=1e-11)
        assert approx.method == QUADRATURE
        assert close(approx.value, exact, rel=1e-9)
    print("  ✅ 20 windows agree to 1e-9 relative")


def test_F_quadrature_higher_dimensions():
    for window in (ShapeWindow.of(1, 2, 5), ShapeWindow.of("3/2", 2, 3, 8)):
        exact = shape_volume_F(window).value
        approx = shape_volume_F_quadrature(window, tol=1e-9).value
        assert exact > 0
        assert close(approx, exact, rel=1e-6)


@pytest.mark.slow
def test_F_quadrature_ell_seven():
    window = ShapeWindow.of(1, "6/5", "3/2", 2, 3, 5)
    exact = shape_volume_F(window).value
    approx = shape_volume_F_quadrature(window, tol=1e-6, budget=10**9).value
    assert close(approx, exact, rel=1e-4)


def test_F_quadrature_limits():
    with pytest.raises(InvalidInputError):
        shape_volume_F_quadrature(E_WINDOW, tol=0)
    with pytest.raises(BudgetExceededError):
        shape_volume_F_quadrature(ShapeWindow.of(1, 2, 3, 4, 30), tol=1e-12, budget=100)


def test_displayed_variant():
    """The displayed iterated integral matches F when l = 3 and differs beyond"""
    rng = make_rng(21)
    for _ in range(10):
        low = Fraction(int(rng.integers(1, 50)), 7) + 1
        window = ShapeWindow.of(low, low * int(rng.integers(2, 40)))
        assert close(shape_volume_F_displayed(window).value, shape_volume_F(window).value)
    window = ShapeWindow.of(2, 3, 10)
    assert not close(shape_volume_F_displayed(window).value, shape_volume_F(window).value, rel=1e-6)


def test_F_monotone():
    values = [shape_volume_F(ShapeWindow.of(2, top)).value for top in (2, 3, 10, 100)]
    assert values == sorted(values)
    values = [shape_volume_F(ShapeWindow.of(low, 100)).value for low in (1, 2, 10, 50)]
    assert values == sorted(values, reverse=True)


def test_region_volume():
    print("🧪 Testing region volumes...")
    assert close(region_volume(3, E_WINDOW, 2), 0.5)
    assert close(total_region_volume(3, E_WINDOW, 2), 3)
    assert region_volume(0, E_WINDOW, 2) == 0
    with pytest.raises(InvalidInputError):
        region_volume(3, ShapeWindow.of(1, 2, 3), 2)
    print("  ✅ c_3 * 3 * F(1, e) = 1/2")


def test_main_term_constant():
    print("🧪 Testing the main-term constant...")
    constant = main_term_constant(2, 1000)
    assert constant.omega1 == 2
    assert constant.c_ell == Fraction(1, 3)
    assert constant.rational_factor == Fraction(1, 96)
    euler = euler_product(3, 1000)
    assert close(constant.value, euler.value / 96, rel=1e-14)
    assert constant.contains(constant.value)
    assert constant.lower < constant.upper
    assert constant.contains(main_term_constant(2, 10**4).value)
    print("  ✅ C_3 = E / 96")


def test_predicted_count():
    window = ShapeWindow.of(1, 10)
    constant = main_term_constant(2, 1000)
    base = predicted_count(10**6, 2, window, constant=constant)
    assert close(predicted_count(4 * 10**6, 2, window, constant=constant) / base, 2)
    assert close(base, constant.value * shape_volume_F(window).value * 1000)
    assert predicted_count(0, 2, window) == 0
    assert close(product_scale(10**8, 3), 100)


def test_compare_asymptotic_self_comparison():
    empirical = [(X, int(mpmath.sqrt(X))) for X in (10**6, 10**8, 10**10)]
    report = compare_asymptotic(empirical, lambda X: mpmath.sqrt(X), 2)
    assert all(close(r, 1) for r in report.ratios())
    assert all(row["normalized_residual"] == 0 for row in report.rows)
    assert report.approaching_one
    assert abs(report.slope) < 1e-9


def test_compare_asymptotic_residuals():
    """(empirical - predicted) / Y^(2/3) recovers a planted error term"""
    empirical = [(10**6, 1000 + 5 * 100), (10**9, 10**6 + 5 * 1000)]
    report = compare_asymptotic(empirical, lambda X: mpmath.mpf(X) / 1000, 2)
    for row in report.rows:
        assert close(row["normalized_residual"], 5)
    assert report.approaching_one
    frame = comparison_frame(report)
    assert list(frame.columns) == ["X", "Y", "empirical", "predicted", "ratio", "normalized_residual"]
    assert float(frame["Y"].tolist()[0]) == pytest.approx(1000)
    assert float(frame["ratio"].tolist()[0]) == pytest.approx(1.5)


def test_compare_asymptotic_errors():
    with pytest.raises(InvalidInputError):
        compare_asymptotic([], lambda X: mpmath.mpf(1), 2)
    with pytest.raises(InvalidInputError):
        compare_asymptotic([(10, 3)], lambda X: mpmath.mpf(0), 2)


def test_lattice_count_matches_region_volume():
    """N(Y; R) against l! c_l Y F, residuals measured in units of Y^(2/3)"""
    print("🧪 Testing lattice counts against the region volume...")
    window = ShapeWindow.of(1, 10)
    empirical = [(Y * Y, count_lattice_points(LatticeQuery(n=2, Y=Y, window=window)).total) for Y in (2500, 10**4)]
    report = compare_asymptotic(empirical, lambda X: total_region_volume(product_scale(X, 2), window, 2), 2)
    for row in report.rows:
        assert 0.75 <= float(row["ratio"]) <= 1.25
        assert abs(float(row["normalized_residual"])) <= 25
    assert close(report.rows[-1]["Y"], 10**4)
    print(f"  ✅ ratios {[mpmath.nstr(r, 6) for r in report.ratios()]}")


@pytest.mark.slow
def test_carefree_density_matches_euler_product():
    """n = 2, Y = 10^6: carefree points per unit volume within 5% of the density constant"""
    ratio = carefree_count_ratio(2, 10**6, ShapeWindow.of(1, 10), pmax=10**5, workers=4)
    assert ratio.carefree <= ratio.total
    assert ratio.relative_error <= 0.05


@pytest.mark.slow
def test_main_term_trend():
    """n = 2, window (1, 10), X up to 10^10: ratio near 1 and settling"""
    window = ShapeWindow.of(1, 10)
    checkpoints = [10**6, 10**7, 10**8, 10**9, 10**10]
    discriminants = sorted(r.discriminant for r in enumerate_fields(2, checkpoints[-1], (1,), window))
    empirical = [(X, sum(1 for d in discriminants if d <= X)) for X in checkpoints]
    constant = main_term_constant(2, 10**5)
    report = compare_asymptotic(empirical, lambda X: predicted_count(X, 2, window, constant=constant), 2)
    ratios = [float(r) for r in report.ratios()]
    assert 0.85 <= ratios[-1] <= 1.15
    distances = [abs(r - 1) for r in ratios[-3:]]
    assert distances == sorted(distances, reverse=True)


def main():
    """Run the analytic tests"""
    print("🚀 Analytic Test Suite\n")
    try:
        test_F_closed_form_examples()
        test_F_edge_cases()
        test_F_quadrature_agrees_on_random_windows()
        test_F_quadrature_higher_dimensions()
        test_displayed_variant()
        test_F_monotone()
        test_region_volume()
        test_main_term_constant()
        test_predicted_count()
        test_compare_asymptotic_self_comparison()
        test_compare_asymptotic_residuals()
        test_compare_asymptotic_errors()
        test_lattice_count_matches_region_volume()
        print("\n🎉 All analytic tests passed!")
        return True
    except Exception as e:
        print(f"\n❌ TEST FAILED: {e}")
        import traceback
        traceback.print_exc()
        return False


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
