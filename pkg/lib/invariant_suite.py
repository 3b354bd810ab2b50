"""
Self-checks across all modules.

Each check is a named function registered on the suite; running the suite
seeds one random generator so the same seed always selects the same random
fields, tuples and permutations. Results export to a JSON-ready dict.
"""

import json
import logging
import time
from dataclasses import asdict, dataclass
from datetime import datetime
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional

import numpy as np

try:
    from .errors import InvariantViolation
    from .f2_structure import (
        SignMatrix, character_difference_matrix, character_value, exponent_matrix, exponent_matrix_det,
        gl_order, sign_array, sign_matrix,
    )
    from .field_algebra import (
        FieldElement, classify_case, discriminant, galois_conjugate, is_normalized, multiply,
        normalize_by_orbit_search, normalize_radicands, radicands_from_generators_unchecked, trace,
        trace_by_conjugates,
    )
    from .integral_basis import (
        gram_closed_form, gram_full, gram_projected, gram_projected_closed_form, integral_basis,
        product_integral_basis, shape_params,
    )
    from .parametrization import (
        canonical_form, is_strongly_carefree, orbit, radicands_from_tuple, tuple_from_radicands,
    )
    from .sampling import make_rng, random_carefree_tuple, random_field
    from .sieve_density import local_count_bruteforce, local_count_formula, omega1, omega1_from_generators
except ImportError:
    from errors import InvariantViolation
    from f2_structure import (
        SignMatrix, character_difference_matrix, character_value, exponent_matrix, exponent_matrix_det,
        gl_order, sign_array, sign_matrix,
    )
    from field_algebra import (
        FieldElement, classify_case, discriminant, galois_conjugate, is_normalized, multiply,
        normalize_by_orbit_search, normalize_radicands, radicands_from_generators_unchecked, trace,
        trace_by_conjugates,
    )
    from integral_basis import (
        gram_closed_form, gram_full, gram_projected, gram_projected_closed_form, integral_basis,
        product_integral_basis, shape_params,
    )
    from parametrization import (
        canonical_form, is_strongly_carefree, orbit, radicands_from_tuple, tuple_from_radicands,
    )
    from sampling import make_rng, random_carefree_tuple, random_field
    from sieve_density import local_count_bruteforce, local_count_formula, omega1, omega1_from_generators

logger = logging.getLogger(__name__)


@dataclass
class CheckResult:
    """Outcome of one named invariant"""
    name: str
    passed: bool
    detail: str = ""
    cases: int = 0
    elapsed: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class SuiteContext:
    rng: np.random.Generator
    n_max: int
    corrupt_sign_matrix: bool = False
    samples: int = 20


CheckFunction = Callable[[SuiteContext], CheckResult]


class InvariantSuite:
    """Registry of checks, run in registration order"""

    def __init__(self):
        self.checks: Dict[str, CheckFunction] = {}
        self.results: List[CheckResult] = []
        self.seed: Optional[int] = None

    def register(self, name: str) -> Callable[[CheckFunction], CheckFunction]:
        def decorator(fn: CheckFunction) -> CheckFunction:
            self.checks[name] = fn
            return fn
        return decorator

    def run(self, seed: int = 0, n_max: int = 3, corrupt_sign_matrix: bool = False,
            samples: int = 20, only: Optional[List[str]] = None) -> List[CheckResult]:
        self.seed = seed
        context = SuiteContext(rng=make_rng(seed), n_max=n_max,
                               corrupt_sign_matrix=corrupt_sign_matrix, samples=samples)
        self.results = []
        for name, check in self.checks.items():
            if only and name not in only:
                continue
            started = time.perf_counter()
            try:
                result = check(context)
            except InvariantViolation as exc:
                result = CheckResult(name=name, passed=False, detail=str(exc))
            result.name = name
            result.elapsed = round(time.perf_counter() - started, 3)
            level = logging.INFO if result.passed else logging.ERROR
            logger.log(level, f"{name}: {'pass' if result.passed else 'FAIL'} {result.detail}")
            self.results.append(result)
        return self.results

    @property
    def passed(self) -> bool:
        return bool(self.results) and all(r.passed for r in self.results)

    def export_results(self) -> Dict[str, Any]:
        return {
            "results": [r.to_dict() for r in self.results],
            "metadata": {
                "seed": self.seed,
                "export_timestamp": datetime.now().isoformat(),
                "total_checks": len(self.results),
                "failed": [r.name for r in self.results if not r.passed],
            },
        }

    def to_json(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.export_results(), fh, indent=2)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise InvariantViolation(message)


def _cases_for(n: int) -> List[int]:
    return [1, 2, 3] if n >= 2 else [1, 2]


def _random_element(rng: np.random.Generator, rad) -> FieldElement:
    coeffs = {j: Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 5))) for j in range(1 << rad.n)}
    return FieldElement.from_coefficients(rad, coeffs)


suite = InvariantSuite()


@suite.register("sign_matrix_identity")
def _sign_matrix_identity(ctx: SuiteContext) -> CheckResult:
    for n in range(1, 7):
        matrix = sign_matrix(n)
        if ctx.corrupt_sign_matrix:
            entries = np.array(sign_array(n))
            entries[1, 1] = -entries[1, 1]
            matrix = SignMatrix(n=n, entries=entries)
        _require(matrix.is_symmetric(), f"A_{n} is not symmetric")
        _require(matrix.squares_to_scalar(), f"A_{n}^2 != 2^{n} I")
    return CheckResult("", True, "A_n^2 = 2^n I for n = 1..6", cases=6)


@suite.register("character_rows_orthogonal")
def _character_rows(ctx: SuiteContext) -> CheckResult:
    for n in range(1, 5):
        rows = sign_array(n)
        _require(np.array_equal(rows @ rows.T, (1 << n) * np.eye(1 << n, dtype=np.int64)),
                 f"character rows for n = {n} are not orthogonal with norm 2^{n}")
        for i in range(1 << n):
            for j in range(1 << n):
                _require(character_value(i, j, n) == rows[i, j], f"chi_{i}(v_{j}) disagrees with A_{n}")
    return CheckResult("", True, "n = 1..4", cases=4)


@suite.register("exponent_matrix_permutations")
def _exponent_matrix(ctx: SuiteContext) -> CheckResult:
    count = 0
    for n in range(1, min(ctx.n_max, 4) + 1):
        ell = (1 << n) - 1
        reference = exponent_matrix_det(n)
        _require(reference != 0, f"exponent matrix for n = {n} is singular")
        for _ in range(ctx.samples):
            sigma = tuple(int(s) + 1 for s in ctx.rng.permutation(ell))
            matrix = exponent_matrix(n, sigma)
            rows = matrix.rows()
            _require(all(sum(row) == 0 for row in rows[1:]), f"row sums nonzero for sigma {sigma}")
            _require(abs(matrix.determinant()) == reference, f"|det C| depends on sigma {sigma}")
            other = character_difference_matrix(n, sigma).rows()
            _require(all(a == -b for r1, r2 in zip(rows[1:], other[1:]) for a, b in zip(r1, r2)),
                     f"character-difference rows are not the negated exponent rows for sigma {sigma}")
            count += 1
    return CheckResult("", True, f"{count} permutations", cases=count)


@suite.register("field_arithmetic")
def _field_arithmetic(ctx: SuiteContext) -> CheckResult:
    count = 0
    for n in range(1, ctx.n_max + 1):
        for case in _cases_for(n):
            for _ in range(max(1, ctx.samples // 4)):
                rad = random_field(ctx.rng, n, case)
                _require(rad.is_coherent(), f"XOR coherence fails for {rad}")
                x, y = _random_element(ctx.rng, rad), _random_element(ctx.rng, rad)
                product = multiply(x, y)
                _require(multiply(product, x) == multiply(x, multiply(y, x)),
                         f"multiplication is not associative on {rad}")
                for i in range(1 << n):
                    _require(galois_conjugate(i, product) == multiply(galois_conjugate(i, x), galois_conjugate(i, y)),
                             f"sigma_{i} is not multiplicative on {rad}")
                _require(trace(x) == trace_by_conjugates(x), f"trace definitions disagree on {rad}")
                count += 1
    return CheckResult("", True, f"{count} random fields", cases=count)


@suite.register("discriminant_and_gram")
def _discriminant_and_gram(ctx: SuiteContext) -> CheckResult:
    count = 0
    for n in range(1, ctx.n_max + 1):
        for case in _cases_for(n):
            for _ in range(max(1, ctx.samples // 4)):
                rad = random_field(ctx.rng, n, case)
                basis = integral_basis(rad)
                full = gram_full(basis)
                _require(full.is_positive_definite(), f"Gram of {rad} is not positive definite")
                _require(full.determinant() == discriminant(rad), f"det Gram != discriminant for {rad}")
                _require(full == gram_closed_form(rad), f"closed-form Gram differs for {rad}")
                _require(gram_projected(basis) == gram_projected_closed_form(rad),
                         f"closed-form projected Gram differs for {rad}")
                _require(abs(basis.change_of_basis_det()) == 1, f"refinement is not unimodular for {rad}")
                if n <= 3:
                    _require(basis.is_closed_under_multiplication(), f"basis of {rad} is not closed under products")
                    _require(basis.spans_same_lattice(product_integral_basis(rad)),
                             f"product basis spans a different lattice for {rad}")
                count += 1
    return CheckResult("", True, f"{count} random fields", cases=count)


@suite.register("case_normalization")
def _case_normalization(ctx: SuiteContext) -> CheckResult:
    count = 0
    for n in range(2, min(ctx.n_max, 3) + 1):
        for case in (2, 3):
            for _ in range(max(1, ctx.samples // 4)):
                rad = random_field(ctx.rng, n, case)
                columns = [int(c) for c in ctx.rng.permutation(rad.ell)[:n] + 1]
                from_gens = [rad.radicands[c] for c in columns]
                scrambled = radicands_from_generators_unchecked(from_gens)
                if not scrambled.is_valid():
                    continue
                _require(classify_case(scrambled) == classify_case(rad), f"case changes under relabelling {rad}")
                _require(is_normalized(normalize_radicands(scrambled)), f"normalization failed for {scrambled}")
                _require(is_normalized(normalize_by_orbit_search(scrambled)), f"orbit search failed for {scrambled}")
                count += 1
    return CheckResult("", True, f"{count} relabelled fields", cases=count)


@suite.register("tuple_round_trip")
def _tuple_round_trip(ctx: SuiteContext) -> CheckResult:
    count = 0
    for n in range(2, min(ctx.n_max, 3) + 1):
        for _ in range(ctx.samples):
            t = random_carefree_tuple(ctx.rng, n, nondegenerate=False)
            _require(is_strongly_carefree(t), f"sampler produced {t}")
            rad = radicands_from_tuple(t)
            _require(tuple_from_radicands(rad) == t, f"round trip fails for {t}")
            count += 1
    return CheckResult("", True, f"{count} tuples", cases=count)


@suite.register("orbit_invariance")
def _orbit_invariance(ctx: SuiteContext) -> CheckResult:
    count = 0
    for n in range(2, min(ctx.n_max, 3) + 1):
        for _ in range(max(1, ctx.samples // 10)):
            t = random_carefree_tuple(ctx.rng, n)
            members = orbit(t)
            _require(len(members) == gl_order(n), f"orbit of {t} has {len(members)} members")
            reference = radicands_from_tuple(t)
            disc, case = discriminant(reference), classify_case(reference)
            lambdas = shape_params(reference).lambdas
            for member in members:
                rad = radicands_from_tuple(member)
                _require(discriminant(rad) == disc and classify_case(rad) == case
                         and shape_params(rad).lambdas == lambdas, f"invariants move along the orbit of {t}")
            _require(canonical_form(t) == min(members, key=lambda m: m.g), f"canonical form of {t} is not minimal")
            count += 1
    return CheckResult("", True, f"{count} orbits", cases=count)


@suite.register("local_counts")
def _local_counts(ctx: SuiteContext) -> CheckResult:
    pairs = [(3, 1), (3, 2), (3, 3), (5, 1), (5, 2), (7, 1), (7, 2)]
    for p, ell in pairs:
        _require(local_count_formula(p, ell) == local_count_bruteforce(p, ell), f"#C_{p} wrong for l = {ell}")
    return CheckResult("", True, f"{len(pairs)} (p, l) pairs", cases=len(pairs))


@suite.register("omega1")
def _omega1(ctx: SuiteContext) -> CheckResult:
    _require(omega1(2) == 2, "omega1(2) != 2")
    for n in range(1, min(ctx.n_max, 3) + 1):
        _require(omega1(n) == omega1_from_generators(n), f"omega1 enumerators disagree for n = {n}")
    return CheckResult("", True, "omega1 consistent", cases=min(ctx.n_max, 3))
