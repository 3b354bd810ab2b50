"""
Command handlers for the multiquad launcher.

Each handler takes parsed arguments and returns an exit code. Library errors
are caught once in ``main`` and turned into exit codes by ``exit_code_for``:
0 success, 1 invalid input or configuration, 2 refused by an enumeration or
quadrature budget, 3 failed self-check or formula cross-check.
"""

import argparse
import logging
import os
import sys
from typing import Callable, Dict, List, Optional, Sequence

import mpmath
import pandas as pd
import sympy

# Add the parent directory to the path so we can import from lib
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from lib.analytic import (
    compare_asymptotic, comparison_frame, main_term_constant, predicted_count, shape_volume_F,
    shape_volume_F_displayed, shape_volume_F_quadrature,
)
from lib.config import ExperimentConfig, get_settings, parse_int_list
from lib.csv_export import decimal, density_frame, fields_frame, gram_frame, write_frame
from lib.errors import (
    BudgetExceededError, InvalidInputError, InvariantViolation, MultiquadError,
)
from lib.integral_basis import (
    MultiquadraticField, ShapeWindow, gram_full, gram_projected, format_rational,
)
from lib.invariant_suite import suite
from lib.parametrization import FieldRecord, enumerate_fields, field_discriminants, tuple_from_radicands
from lib.sieve_density import carefree_density_constant, euler_product, local_density

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_BUDGET = 2
EXIT_CHECK_FAILED = 3

PREFLIGHT_CHECKS = ["discriminant_and_gram", "orbit_invariance"]
PREFLIGHT_SAMPLES = 4


def exit_code_for(error: Exception) -> int:
    if isinstance(error, BudgetExceededError):
        return EXIT_BUDGET
    if isinstance(error, InvariantViolation):
        return EXIT_CHECK_FAILED
    return EXIT_INVALID


def _output_path(out: Optional[str], default_name: str) -> str:
    if out is None:
        return os.path.join("results", default_name)
    if out.endswith(".csv") or out.endswith(".json"):
        return out
    return os.path.join(out, default_name)


def _cases(text: Optional[str]) -> Sequence[int]:
    return parse_int_list(text) if text else (1, 2, 3)


def _window(text: Optional[str]) -> Optional[ShapeWindow]:
    return ShapeWindow.parse(text) if text else None


def cmd_fields(args: argparse.Namespace) -> int:
    """Enumerate fields by discriminant, or describe one field given by --gens"""
    if args.gens:
        gens = parse_int_list(args.gens)
        field = MultiquadraticField.from_generators(gens)
        records: List[FieldRecord] = [FieldRecord(
            source=tuple_from_radicands(field.rad), rad=field.rad, case=field.case,
            discriminant=field.discriminant, shape=field.shape(),
        )]
    else:
        if args.n is None or args.max_disc is None:
            raise InvalidInputError("fields needs --n and --max-disc, or --gens")
        (max_disc,) = parse_int_list(args.max_disc)
        records = list(enumerate_fields(args.n, max_disc, _cases(args.case), _window(args.window)))
    frame = fields_frame(records)
    path = write_frame(frame, _output_path(args.out, "fields.csv"))
    print(f"✅ {len(records)} field(s) written to {path}")
    for record in records[:5]:
        print(f"   D = {';'.join(map(str, record.rad.radicands[1:]))}  {record.case}  disc = {record.discriminant}")
    return EXIT_OK


def cmd_density(args: argparse.Namespace) -> int:
    """Local densities per prime, or the Euler product with --euler"""
    ell = args.ell
    if args.euler:
        product = euler_product(ell, args.pmax)
        carefree = carefree_density_constant(ell, args.pmax)
        frame = pd.DataFrame([{
            "ell": ell,
            "pmax": args.pmax,
            "value": decimal(product.value),
            "tail_bound": decimal(product.tail_bound),
            "lower": decimal(product.lower),
            "carefree_value": decimal(carefree.value),
        }])
        path = write_frame(frame, _output_path(args.out, "euler.csv"))
        print(f"✅ Euler product l = {ell}, p <= {args.pmax}: {mpmath.nstr(product.value, 15)} "
              f"(relative tail <= {mpmath.nstr(product.tail_bound, 3)})")
        print(f"   written to {path}")
        return EXIT_OK

    primes = [args.p] if args.p else list(sympy.primerange(2, args.pmax + 1))
    frame = density_frame(primes, ell, bruteforce=args.bruteforce)
    status = EXIT_OK
    if args.bruteforce:
        for p, formula, exhaustive in zip(frame["p"], frame["count_formula"], frame["count_bruteforce"]):
            if exhaustive != "" and int(exhaustive) != int(formula):
                print(f"❌ p = {p}: formula {formula} != exhaustive {exhaustive}")
                status = EXIT_CHECK_FAILED
    path = write_frame(frame, _output_path(args.out, "density.csv"))
    for p in primes[:10]:
        local = local_density(p, ell)
        print(f"   mu_{p} = {format_rational(local.density)}")
    marker = "✅" if status == EXIT_OK else "❌"
    print(f"{marker} {len(primes)} prime(s) written to {path}")
    return status


def cmd_verify(args: argparse.Namespace) -> int:
    """Run the invariant suite; exit 3 if anything fails"""
    print("🧪 Running invariant suite")
    results = suite.run(seed=args.seed, n_max=args.n or 3, corrupt_sign_matrix=args.corrupt_sign_matrix,
                        samples=args.samples)
    for result in results:
        marker = "✅" if result.passed else "❌"
        print(f"  {marker} {result.name}: {result.detail} ({result.elapsed}s)")
    if args.out:
        path = _output_path(args.out, "verify.json")
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        suite.to_json(path)
    if suite.passed:
        print(f"🎉 All {len(results)} invariants hold (seed {args.seed})")
        return EXIT_OK
    print(f"⚠️  {sum(not r.passed for r in results)} invariant(s) failed")
    return EXIT_CHECK_FAILED


def _experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    overrides = {
        "n": args.n,
        "X_checkpoints": args.checkpoints,
        "window": args.window,
        "pmax": args.pmax if args.pmax != DEFAULT_PMAX else None,
        "case_filter": args.case,
        "seed": args.seed,
        "output_dir": args.out,
        "threads": args.threads if args.threads != 1 else None,
    }
    if args.config:
        return ExperimentConfig.load(args.config, overrides)
    return ExperimentConfig.from_sources(None, overrides)


def count_by_checkpoint(n: int, checkpoints: Sequence[int], case_filter: Sequence[int],
                        window: ShapeWindow, workers: int = 1) -> Dict[int, int]:
    """Fields with discriminant <= X for every X, from one enumeration at the largest X"""
    discriminants = field_discriminants(n, max(checkpoints), case_filter, window, workers)
    counts: Dict[int, int] = {}
    k = 0
    for X in sorted(checkpoints):
        while k < len(discriminants) and discriminants[k] <= X:
            k += 1
        counts[X] = k
    return counts


def cmd_experiment(args: argparse.Namespace) -> int:
    """Empirical field counts against the predicted main term"""
    config = _experiment_config(args)
    window = config.shape_window()
    print(f"🚀 Experiment n = {config.n}, window ({window}), checkpoints {list(config.X_checkpoints)}, "
          f"{config.threads} worker(s)")
    preflight = suite.run(seed=config.seed, n_max=min(config.n, 3), samples=PREFLIGHT_SAMPLES,
                          only=PREFLIGHT_CHECKS)
    failed = [r.name for r in preflight if not r.passed]
    if failed:
        print(f"❌ Pre-flight checks failed with seed {config.seed}: {', '.join(failed)}")
        return EXIT_CHECK_FAILED
    logger.info(f"Pre-flight checks passed with seed {config.seed}")
    counts = count_by_checkpoint(config.n, config.X_checkpoints, config.case_filter, window, config.threads)
    constant = main_term_constant(config.n, config.pmax)
    empirical = [(X, counts[X]) for X in config.X_checkpoints]
    if shape_volume_F(window).value == 0:
        print("⚠️  Empty window: every prediction is 0")
        frame = pd.DataFrame([{"X": X, "empirical": c, "predicted": "0"} for X, c in empirical])
        path = write_frame(frame, os.path.join(config.output_dir, "comparison.csv"))
        print(f"✅ written to {path}")
        return EXIT_OK
    report = compare_asymptotic(
        empirical, lambda X: predicted_count(X, config.n, window, config.pmax, constant), config.n)
    path = write_frame(comparison_frame(report), os.path.join(config.output_dir, "comparison.csv"))
    for row in report.rows:
        print(f"   X = {row['X']:>14}  count = {row['empirical']:>8}  ratio = {mpmath.nstr(row['ratio'], 6)}")
    if report.slope is not None:
        print(f"📊 slope of ratio against 1/log X: {report.slope:.6g}")
    print(f"✅ Comparison written to {path}")
    return EXIT_OK


def cmd_volume(args: argparse.Namespace) -> int:
    """F of a window by the closed form, the displayed integral and quadrature"""
    window = ShapeWindow.parse(args.window)
    closed = shape_volume_F(window)
    displayed = shape_volume_F_displayed(window)
    print(f"📐 F({window}) = {mpmath.nstr(closed.value, 15)}")
    print(f"   displayed integral: {mpmath.nstr(displayed.value, 15)}")
    if args.tol:
        quadrature = shape_volume_F_quadrature(window, tol=args.tol)
        print(f"   quadrature (tol {args.tol:g}): {mpmath.nstr(quadrature.value, 15)}")
    return EXIT_OK


def cmd_gram(args: argparse.Namespace) -> int:
    """Full and projected Gram matrices of the field with the given generators"""
    field = MultiquadraticField.from_generators(parse_int_list(args.gens))
    basis = field.basis()
    full = gram_full(basis)
    projected = gram_projected(basis)
    print(f"📋 {field.case}, radicands {field.rad}, discriminant {field.discriminant}")
    for title, gram in (("Gram", full), ("Projected Gram", projected)):
        print(f"   {title}:")
        for row in gram.to_rows():
            print("     " + "  ".join(f"{cell:>8}" for cell in row))
    print("   basis: " + " | ".join(e.serialize() for e in basis.elements))
    if args.out:
        write_frame(gram_frame(full), os.path.join(args.out, "gram.csv"))
        write_frame(gram_frame(projected), os.path.join(args.out, "gram_projected.csv"))
    return EXIT_OK


DEFAULT_PMAX = 1000

COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "fields": cmd_fields,
    "density": cmd_density,
    "verify": cmd_verify,
    "experiment": cmd_experiment,
    "volume": cmd_volume,
    "gram": cmd_gram,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multiquad", description="Multiquadratic field shapes toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    fields = sub.add_parser("fields", help="enumerate fields by discriminant")
    fields.add_argument("--n", type=int)
    fields.add_argument("--max-disc", dest="max_disc")
    fields.add_argument("--gens", help="comma list of generators (single-field mode)")
    fields.add_argument("--case", help="comma list of case labels, default 1,2,3")
    fields.add_argument("--window", help="R2,...,Rl")
    fields.add_argument("--out")

    density = sub.add_parser("density", help="local densities and Euler products")
    density.add_argument("--ell", type=int, required=True)
    density.add_argument("--p", type=int)
    density.add_argument("--pmax", type=int, default=DEFAULT_PMAX)
    density.add_argument("--bruteforce", action="store_true")
    density.add_argument("--euler", action="store_true")
    density.add_argument("--out")

    verify = sub.add_parser("verify", help="run the invariant suite")
    verify.add_argument("--n", type=int, default=3)
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--samples", type=int, default=20)
    verify.add_argument("--corrupt-sign-matrix", dest="corrupt_sign_matrix", action="store_true",
                        help=argparse.SUPPRESS)
    verify.add_argument("--out")

    experiment = sub.add_parser("experiment", help="compare field counts with the main term")
    experiment.add_argument("--config")
    experiment.add_argument("--n", type=int)
    experiment.add_argument("--checkpoints")
    experiment.add_argument("--window")
    experiment.add_argument("--case")
    experiment.add_argument("--pmax", type=int, default=DEFAULT_PMAX)
    experiment.add_argument("--seed", type=int)
    experiment.add_argument("--threads", type=int, default=1)
    experiment.add_argument("--out")

    volume = sub.add_parser("volume", help="evaluate F for a window")
    volume.add_argument("--window", required=True)
    volume.add_argument("--tol", type=float, default=1e-10)

    gram = sub.add_parser("gram", help="print Gram matrices for given generators")
    gram.add_argument("--gens", required=True)
    gram.add_argument("--out")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logger.debug(f"Running {args.command} with {get_settings().to_dict()}")
    try:
        return COMMANDS[args.command](args)
    except MultiquadError as exc:
        code = exit_code_for(exc)
        logger.error(f"{args.command} failed: {exc}")
        print(f"❌ {exc}")
        return code


if __name__ == "__main__":
    sys.exit(main())
