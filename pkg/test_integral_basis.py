#!/usr/bin/env python3
"""
Tests for integral bases, Gram matrices, shapes and windows.

Usage: python3 test_integral_basis.py
"""

import math
import os
import sys
from fractions import Fraction

import pytest
import sympy

# Add lib to path for imports
lib_path = os.path.join(os.path.dirname(__file__), 'lib')
sys.path.insert(0, lib_path)

from errors import InvalidInputError
from f2_structure import reduced_sign_matrix
from field_algebra import (
    CASE_1, CASE_2, FieldElement, discriminant, inner_product, is_algebraic_integer, radicand_lattice, trace,
)
from integral_basis import (
    GramMatrix, MultiquadraticField, ShapeWindow, gram_closed_form, gram_full, gram_projected,
    gram_projected_closed_form, integral_basis, product_integral_basis, projected_elements, shape_params,
    window_contains,
)
from parametrization import CarefreeTuple, radicands_from_tuple
from sampling import make_rng, random_field


def test_case_one_basis():
    print("🧪 Testing Case 1 basis...")
    rad = radicand_lattice((85, 221))
    basis = integral_basis(rad)
    assert basis.case == CASE_1
    assert basis.dim == 4
    assert basis.elements[0] == FieldElement.one(rad)
    total = sum(basis.raw_elements, FieldElement.zero(rad))
    assert total == FieldElement.one(rad)
    assert abs(basis.change_of_basis_det()) == 1
    print("  ✅ Raw alpha basis sums to 1; refinement is unimodular")


def test_case_two_basis():
    field = MultiquadraticField.from_generators((2, 5))
    assert field.case == CASE_2
    assert field.rad.generators[0] == 5
    basis = field.basis()
    assert basis.dim == 4
    assert basis.elements[0] == FieldElement.one(field.rad)
    full = gram_full(basis)
    assert all(x.denominator == 1 for row in full.entries for x in row)
    assert all(full.entries[i][i] == trace(b * b) for i, b in enumerate(basis.elements))


def test_case_three_delta():
    rad = radicand_lattice((2, 3))
    basis = integral_basis(rad)
    beta0, eta0 = FieldElement.radical(rad, 1), FieldElement.radical(rad, 3)
    assert basis.raw_elements[3] == (beta0 + eta0).scale(Fraction(1, 2))
    square = basis.raw_elements[3] * basis.raw_elements[3]
    assert square == FieldElement.from_coefficients(rad, {0: 2, 2: 1})


def test_basis_rejects_mismatch():
    rad = radicand_lattice((2, 5))
    with pytest.raises(InvalidInputError):
        integral_basis(rad)
    with pytest.raises(InvalidInputError):
        integral_basis(radicand_lattice((85, 221)), CASE_2)


SHARED_PRIME_FIELDS = ((21, 33), (3337, 12737), (15, 35), (21, 33, 5), (6, 15, 35), (2, 3))


def test_basis_closed_under_multiplication():
    """Radicands sharing primes 3 mod 4 still give an order, with every element integral"""
    print("🧪 Testing ring closure of the basis...")
    for gens in SHARED_PRIME_FIELDS:
        field = MultiquadraticField.from_generators(gens)
        basis = field.basis()
        assert basis.is_closed_under_multiplication()
        assert all(is_algebraic_integer(b) for b in basis.elements)
        assert gram_full(basis).determinant() == field.discriminant
        assert basis.spans_same_lattice(field.product_basis())
    print(f"  ✅ {len(SHARED_PRIME_FIELDS)} fields with shared primes")


def test_coordinates():
    basis = integral_basis(radicand_lattice((85, 221)))
    assert basis.coordinates(FieldElement.one(basis.rad)) == [1, 0, 0, 0]
    assert basis.contains(FieldElement.radical(basis.rad, 1))
    assert not basis.contains(FieldElement.radical(basis.rad, 1, Fraction(1, 2)))


def test_product_basis_example():
    rad = radicand_lattice((2, 3))
    elements = product_integral_basis(rad)
    assert elements[0] == FieldElement.one(rad)
    assert elements[1] == FieldElement.from_coefficients(rad, {0: -2, 1: 1})
    assert elements[2] == FieldElement.from_coefficients(rad, {0: -3, 2: 1})
    assert elements[3] == FieldElement.from_coefficients(rad, {0: 3, 1: Fraction(-3, 2), 2: -1, 3: Fraction(1, 2)})
    assert integral_basis(rad).spans_same_lattice(elements)
    with pytest.raises(InvalidInputError):
        product_integral_basis(radicand_lattice((2, 5)))


def test_two_constructions_agree():
    """Sign-matrix blocks and generator products span the same lattice"""
    print("🧪 Testing the two integral basis constructions...")
    rng = make_rng(41)
    checked = 0
    for n in (1, 2, 3):
        for case in ((1, 2) if n == 1 else (1, 2, 3)):
            for shared in (False, True):
                for _ in range(8 if n == 3 else 15):
                    rad = random_field(rng, n, case, shared=shared and n > 1)
                    basis = integral_basis(rad)
                    elements = product_integral_basis(rad)
                    assert basis.is_closed_under_multiplication()
                    assert basis.spans_same_lattice(elements)
                    products = GramMatrix(tuple(tuple(inner_product(x, y) for y in elements) for x in elements))
                    assert products.determinant() == discriminant(rad)
                    checked += 1
    print(f"  ✅ {checked} random fields")


def test_gram_determinants():
    print("🧪 Testing det Gram = discriminant...")
    assert gram_full(integral_basis(radicand_lattice((85, 221)))).determinant() == 1221025
    assert gram_full(MultiquadraticField.from_generators((2, 5)).basis()).determinant() == 1600
    assert gram_full(integral_basis(radicand_lattice((2, 3)))).determinant() == 2304
    print("  ✅ 1221025, 1600, 2304")


def test_gram_determinant_random_fields():
    rng = make_rng(2024)
    for n in (2, 3):
        for case in (1, 2, 3):
            for _ in range(200):
                rad = random_field(rng, n, case)
                basis = integral_basis(rad)
                full = gram_full(basis)
                assert full.is_symmetric()
                assert full.is_positive_definite()
                assert full.determinant() == discriminant(rad)


def test_closed_form_grams():
    print("🧪 Testing closed-form Gram matrices...")
    rng = make_rng(99)
    for n in (2, 3):
        for case in (1, 2, 3):
            for _ in range(50):
                rad = random_field(rng, n, case)
                basis = integral_basis(rad)
                assert gram_full(basis) == gram_closed_form(rad)
                assert gram_projected(basis) == gram_projected_closed_form(rad)
    print("  ✅ Trace form and sign-matrix products agree in all cases")


def test_case_one_projected_closed_form():
    rad = radicand_lattice((85, 221))
    reduced = sympy.Matrix(reduced_sign_matrix(2).tolist())
    expected = sympy.Rational(1, 4) * reduced * sympy.diag(85, 221, 65) * reduced.T
    assert gram_projected(integral_basis(rad)) == GramMatrix.from_sympy(expected)


def test_case_one_projected_determinant():
    """2^(n l) det(projected Gram) = det(A~_n)^2 prod D_j"""
    rng = make_rng(8)
    for n in (1, 2, 3):
        for _ in range(5):
            rad = random_field(rng, n, 1)
            projected = gram_projected(integral_basis(rad))
            ell = rad.ell
            reduced = sympy.Matrix(reduced_sign_matrix(n).tolist())
            lhs = 2 ** (n * ell) * projected.determinant()
            assert lhs == reduced.det() ** 2 * math.prod(rad.radicands[1:])


def test_case_two_projected_blocks():
    field = MultiquadraticField.from_generators((2, 5))
    projected = gram_projected(field.basis())
    assert projected.dim == 3
    assert all(x == 0 for row in projected.block([0], [1, 2]) for x in row)


def test_projected_elements_have_zero_trace():
    rng = make_rng(4)
    for case in (1, 2, 3):
        rad = random_field(rng, 3, case)
        for element in projected_elements(integral_basis(rad)):
            assert trace(element) == 0


def test_shape_params():
    print("🧪 Testing shapes...")
    shape = shape_params(radicand_lattice((85, 221)))
    assert shape.lambdas == (Fraction(17, 13), Fraction(17, 5))
    assert shape.decimals()[0].startswith("1.3076923076923")
    degenerate = radicands_from_tuple(CarefreeTuple.of(5, 13, 1))
    assert degenerate.radicands == (1, 5, 13, 65)
    assert shape_params(degenerate).lambdas == (Fraction(13, 5), Fraction(13))
    with pytest.raises(InvalidInputError):
        shape_params(radicands_from_tuple(CarefreeTuple.of(5, 1, 1)))
    print("  ✅ (17/13, 17/5) and the degenerate (13/5, 13)")


def test_shape_is_scale_free():
    """Multiplying every D_j by the same factor leaves the ratios alone"""
    rad = radicand_lattice((5, 13, 17))
    scaled = type(rad)(n=rad.n, radicands=(1,) + tuple(11 * d for d in rad.radicands[1:]))
    assert shape_params(rad).lambdas == shape_params(scaled).lambdas


def test_window_contains():
    print("🧪 Testing windows...")
    shape = (Fraction(5, 3), Fraction(5, 2))
    assert window_contains(shape, ShapeWindow.of(1, 3))
    assert not window_contains(shape, ShapeWindow.of(1, 2))
    assert window_contains(shape, ShapeWindow.of(1, "inf"))
    assert window_contains(shape, ShapeWindow.vacuous(3))
    assert window_contains(shape, ShapeWindow.of("5/3", "5/2"))
    assert not window_contains(shape, ShapeWindow.of(2, 3))
    with pytest.raises(InvalidInputError):
        window_contains(shape, ShapeWindow.of(1, 2, 3))
    print("  ✅ Non-strict bounds, vacuous window, dimension check")


def test_window_validation():
    with pytest.raises(InvalidInputError):
        ShapeWindow.of(3, 2)
    with pytest.raises(InvalidInputError):
        ShapeWindow.of("1/2", 2)
    with pytest.raises(InvalidInputError):
        ShapeWindow.parse("1,abc")
    assert ShapeWindow.parse("1, 10").bounds == (Fraction(1), Fraction(10))
    assert str(ShapeWindow.parse("1,inf")) == "1,inf"


def main():
    """Run the integral basis tests"""
    print("🚀 Integral Basis Test Suite\n")
    try:
        test_case_one_basis()
        test_case_two_basis()
        test_case_three_delta()
        test_basis_rejects_mismatch()
        test_basis_closed_under_multiplication()
        test_coordinates()
        test_product_basis_example()
        test_two_constructions_agree()
        test_gram_determinants()
        test_gram_determinant_random_fields()
        test_closed_form_grams()
        test_case_one_projected_closed_form()
        test_case_one_projected_determinant()
        test_case_two_projected_blocks()
        test_projected_elements_have_zero_trace()
        test_shape_params()
        test_shape_is_scale_free()
        test_window_contains()
        test_window_validation()
        print("\n🎉 All integral basis tests passed!")
        return True
    except Exception as e:
        print(f"\n❌ TEST FAILED: {e}")
        import traceback
        traceback.print_exc()
        return False


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
