#!/usr/bin/env python3
"""
Tests for exact field arithmetic, radicands, case classification and discriminants.

Usage: python3 test_field_algebra.py
"""

import os
import sys
from fractions import Fraction
from itertools import combinations
from math import gcd

import pytest

# Add lib to path for imports
lib_path = os.path.join(os.path.dirname(__file__), 'lib')
sys.path.insert(0, lib_path)

from errors import FactorizationError, InvalidInputError
from field_algebra import (
    CASE_1, CASE_2, CASE_3, FieldElement, GeneratingSet, characteristic_polynomial, classify_case,
    discriminant, factorize, galois_conjugate, inner_product, is_algebraic_integer, is_normalized, multiply,
    normalize_by_orbit_search, normalize_radicands, odd_part_sign, radical_product_sign, radicand_lattice,
    radicands_from_generators_unchecked, squarefree_part, trace, trace_by_conjugates, validate_generating_set,
)
from sampling import make_rng, random_field


def _random_element(rng, rad):
    coeffs = {j: Fraction(int(rng.integers(-20, 21)), int(rng.integers(1, 7))) for j in range(1 << rad.n)}
    return FieldElement.from_coefficients(rad, coeffs)


def test_radicand_lattice_examples():
    print("🧪 Testing radicand_lattice...")
    assert radicand_lattice((5, 13)).radicands == (1, 5, 13, 65)
    assert radicand_lattice(GeneratingSet((85, 221))).radicands == (1, 85, 221, 65)
    assert radicand_lattice((2, 3)).radicands == (1, 2, 3, 6)
    assert radicand_lattice((2, 3, 5)).radicands == (1, 2, 3, 6, 5, 10, 15, 30)
    print("  ✅ (5,13), (85,221), (2,3), (2,3,5)")


def test_radicand_lattice_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        radicand_lattice((5, 45))
    with pytest.raises(InvalidInputError):
        radicand_lattice((0, 5))


def test_factorization_bound(monkeypatch):
    monkeypatch.setenv('MQ_TRIAL_DIVISION_BOUND', '100')
    assert factorize(9991) == {97: 1, 103: 1}
    with pytest.raises(FactorizationError):
        factorize(10007 * 10009)


def test_squarefree_part():
    assert squarefree_part(45) == 5
    assert squarefree_part(72) == 2
    assert squarefree_part(1) == 1


def test_validate_generating_set():
    print("🧪 Testing validate_generating_set...")
    assert validate_generating_set((5, 13))
    assert not validate_generating_set((5, 13, 65))
    assert not validate_generating_set((5, 45))
    assert not validate_generating_set((5, 5))
    assert not validate_generating_set((1, 5))
    print("  ✅ Degenerate sets reported as false")


def test_xor_coherence_random():
    rng = make_rng(11)
    for n in (1, 2, 3):
        for case in ((1, 2) if n == 1 else (1, 2, 3)):
            for _ in range(15):
                rad = random_field(rng, n, case)
                assert rad.is_coherent()
                assert rad.is_valid()


def test_multiply_examples():
    print("🧪 Testing multiplication...")
    rad = radicand_lattice((85, 221))
    r1 = FieldElement.radical(rad, 1)
    r2 = FieldElement.radical(rad, 2)
    assert multiply(r1, r2) == FieldElement.radical(rad, 3, 17)
    x = FieldElement.from_coefficients(rad, {0: Fraction(1, 2), 2: 3, 3: Fraction(-5, 7)})
    assert multiply(x, FieldElement.one(rad)) == x
    for j in range(4):
        square = multiply(FieldElement.radical(rad, j), FieldElement.radical(rad, j))
        assert square == FieldElement.one(rad).scale(rad[j])
    print("  ✅ sqrt(85) sqrt(221) = 17 sqrt(65), identity, squares")


def test_radical_product_signs():
    """Roots are normalized through p* = +-p = 1 mod 4, which fixes the sign of each product"""
    print("🧪 Testing radical product signs...")
    rad = radicand_lattice((21, 33))
    assert rad.radicands == (1, 21, 33, 77)
    assert multiply(FieldElement.radical(rad, 1), FieldElement.radical(rad, 2)) == FieldElement.radical(rad, 3, -3)
    rad = radicand_lattice((3, 7))
    assert multiply(FieldElement.radical(rad, 1), FieldElement.radical(rad, 2)) == FieldElement.radical(rad, 3, -1)
    rad = radicand_lattice((2, 3))
    assert multiply(FieldElement.radical(rad, 1), FieldElement.radical(rad, 2)) == FieldElement.radical(rad, 3)
    assert multiply(FieldElement.radical(rad, 3), FieldElement.radical(rad, 2)) == FieldElement.radical(rad, 1, 3)
    assert radical_product_sign(6, 10) == 1
    assert [odd_part_sign(d) for d in (1, 2, 3, 5, 6, 10, 21, 33)] == [1, 1, -1, 1, -1, 1, 1, 1]
    print("  ✅ sqrt(21) sqrt(33) = -3 sqrt(77), sqrt(3) sqrt(7) = -sqrt(21)")


def test_multiplication_is_associative():
    rng = make_rng(29)
    fields = [radicand_lattice((21, 33)), radicand_lattice((3, 7, 5)), radicand_lattice((6, 15, 35))]
    fields += [random_field(rng, n, case, shared=True) for n in (2, 3) for case in (1, 2, 3)]
    for rad in fields:
        for _ in range(5):
            x, y, z = (_random_element(rng, rad) for _ in range(3))
            assert multiply(multiply(x, y), z) == multiply(x, multiply(y, z))
            assert multiply(x, y) == multiply(y, x)
        for j in range(1 << rad.n):
            square = multiply(FieldElement.radical(rad, j), FieldElement.radical(rad, j))
            assert square == FieldElement.one(rad).scale(rad[j])


def test_shared_prime_sampling():
    """Shared draws give radicands with common factors, some of them 3 mod 4"""
    print("🧪 Testing random fields with shared primes...")
    rng = make_rng(5)
    seen_three_mod_four = False
    for n in (2, 3):
        for case in (1, 2, 3):
            for _ in range(6):
                rad = random_field(rng, n, case, shared=True)
                assert classify_case(rad).label == case and is_normalized(rad)
                common = [gcd(a, b) for a, b in combinations(rad.radicands[1:], 2)]
                assert max(common) > 1
                seen_three_mod_four |= any(odd_part_sign(g) < 0 for g in common)
    assert seen_three_mod_four
    print("  ✅ Every draw shares a prime")


def test_characteristic_polynomial():
    print("🧪 Testing characteristic polynomials...")
    rad = radicand_lattice((21, 33))
    assert characteristic_polynomial(FieldElement.radical(rad, 1)) == [1, 0, -42, 0, 441]
    quarter = Fraction(1, 4)
    x = FieldElement.from_coefficients(rad, {0: quarter, 1: -quarter, 2: quarter, 3: -quarter})
    assert is_algebraic_integer(x)
    assert is_algebraic_integer(FieldElement.from_coefficients(rad, {0: Fraction(1, 2), 1: Fraction(1, 2)}))
    assert not is_algebraic_integer(FieldElement.from_coefficients(rad, {0: quarter, 1: quarter}))
    assert not is_algebraic_integer(FieldElement.from_coefficients(radicand_lattice((3,)), {0: Fraction(1, 2), 1: Fraction(1, 2)}))
    print("  ✅ (1 - sqrt21 + sqrt33 - sqrt77) / 4 is integral, (1 + sqrt21) / 4 is not")


def test_mismatched_radicands():
    a = FieldElement.one(radicand_lattice((5, 13)))
    b = FieldElement.one(radicand_lattice((2, 3)))
    with pytest.raises(InvalidInputError):
        multiply(a, b)
    with pytest.raises(InvalidInputError):
        inner_product(a, b)


def test_trace_examples():
    rad = radicand_lattice((85, 221))
    assert trace(FieldElement.one(rad)) == 4
    assert all(trace(FieldElement.radical(rad, j)) == 0 for j in range(1, 4))
    r1 = FieldElement.radical(rad, 1)
    assert trace(multiply(r1, r1)) == 340


def test_inner_product_examples():
    rad = radicand_lattice((2, 3, 5))
    for i in range(8):
        for j in range(8):
            value = inner_product(FieldElement.radical(rad, i), FieldElement.radical(rad, j))
            assert value == (8 * rad[i] if i == j else 0)


def test_inner_product_is_trace_of_product():
    rng = make_rng(3)
    rad = radicand_lattice((5, 13, 17))
    for _ in range(30):
        x, y = _random_element(rng, rad), _random_element(rng, rad)
        assert inner_product(x, y) == trace(multiply(x, y))
        assert inner_product(x, y) == inner_product(y, x)
        assert inner_product(x, x) > 0 or x == FieldElement.zero(rad)


def test_galois_conjugates():
    print("🧪 Testing Galois action...")
    rng = make_rng(5)
    rad = radicand_lattice((2, 3))
    x = _random_element(rng, rad)
    assert galois_conjugate(0, x) == x
    assert galois_conjugate(1, FieldElement.radical(rad, 1)) == FieldElement.radical(rad, 1, -1)
    averaged = sum((galois_conjugate(i, x) for i in range(4)), FieldElement.zero(rad)).scale(Fraction(1, 4))
    assert averaged == FieldElement.one(rad).scale(x.coefficient(0))
    for n, gens in ((2, (5, 13)), (3, (2, 3, 5))):
        field = radicand_lattice(gens)
        for _ in range(30):
            x, y = _random_element(rng, field), _random_element(rng, field)
            for i in range(1 << n):
                lhs = galois_conjugate(i, multiply(x, y))
                rhs = multiply(galois_conjugate(i, x), galois_conjugate(i, y))
                assert lhs == rhs
            assert trace(x) == trace_by_conjugates(x)
    with pytest.raises(InvalidInputError):
        galois_conjugate(4, FieldElement.radical(rad, 1))
    print("  ✅ Ring homomorphism and both trace definitions")


def test_classify_case_examples():
    print("🧪 Testing case classification...")
    assert classify_case(radicand_lattice((85, 221))) == CASE_1
    assert classify_case(radicand_lattice((2, 5))) == CASE_2
    assert classify_case(radicand_lattice((2, 3))) == CASE_3
    assert classify_case(radicand_lattice((3, 7))) == CASE_2
    assert CASE_1.r == 0 and CASE_2.r == 2 and CASE_3.r == 3
    print("  ✅ Cases 1, 2, 3")


def test_discriminant_examples():
    print("🧪 Testing discriminants...")
    assert discriminant(radicand_lattice((85, 221))) == 1221025 == 1105 ** 2
    assert discriminant(radicand_lattice((2, 5))) == 1600
    assert discriminant(radicand_lattice((2, 3))) == 2304
    assert discriminant(radicand_lattice((5,))) == 5
    assert discriminant(radicand_lattice((3,))) == 12
    print("  ✅ 1221025, 1600, 2304 and the quadratic cases")


def test_classification_is_labelling_invariant():
    """Intrinsic classification agrees with explicit orbit normalization"""
    rng = make_rng(17)
    for n in (2, 3):
        for case in (1, 2, 3):
            for _ in range(10):
                rad = random_field(rng, n, case)
                picks = [int(j) for j in rng.permutation(rad.ell)[:n] + 1]
                relabelled = radicands_from_generators_unchecked([rad[j] for j in picks])
                if not relabelled.is_valid():
                    continue
                assert classify_case(relabelled) == classify_case(rad)
                normalized = normalize_radicands(relabelled)
                assert is_normalized(normalized)
                assert sorted(normalized.radicands) == sorted(rad.radicands)
                searched = normalize_by_orbit_search(relabelled)
                assert is_normalized(searched)
                assert sorted(searched.radicands) == sorted(rad.radicands)


def test_normalize_examples():
    rad = radicand_lattice((3, 2))
    assert not is_normalized(rad)
    normalized = normalize_radicands(rad)
    assert normalized.generators[-2] % 2 == 0 and normalized.generators[-1] % 4 == 3
    rad = radicand_lattice((7, 5))
    assert normalize_radicands(rad).generators == (5, 7)


def test_element_serialization():
    rad = radicand_lattice((5, 13))
    x = FieldElement.from_coefficients(rad, {0: Fraction(1, 2), 3: -2, 1: Fraction(3, 4)})
    assert x.serialize() == "0:1/2,1:3/4,3:-2"
    assert FieldElement.parse(x.serialize(), rad) == x
    assert FieldElement.parse("", rad) == FieldElement.zero(rad)
    with pytest.raises(InvalidInputError):
        FieldElement.parse("0-1", rad)


def main():
    """Run the field algebra tests"""
    print("🚀 Field Algebra Test Suite\n")
    try:
        test_radicand_lattice_examples()
        test_radicand_lattice_rejects_bad_input()
        test_squarefree_part()
        test_validate_generating_set()
        test_xor_coherence_random()
        test_multiply_examples()
        test_radical_product_signs()
        test_multiplication_is_associative()
        test_shared_prime_sampling()
        test_characteristic_polynomial()
        test_mismatched_radicands()
        test_trace_examples()
        test_inner_product_examples()
        test_inner_product_is_trace_of_product()
        test_galois_conjugates()
        test_classify_case_examples()
        test_discriminant_examples()
        test_classification_is_labelling_invariant()
        test_normalize_examples()
        test_element_serialization()
        print("\n🎉 All field algebra tests passed!")
        return True
    except Exception as e:
        print(f"\n❌ TEST FAILED: {e}")
        import traceback
        traceback.print_exc()
        return False


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
