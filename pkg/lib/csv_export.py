"""
CSV reports: field streams, density tables, asymptotic comparisons, Gram matrices.

Every writer builds a pandas DataFrame and goes through ``write_frame``, which
writes into a temporary file beside the target and renames it into place, so a
failure never leaves a partial CSV behind.
"""

import logging
import os
import tempfile
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence

import mpmath
import pandas as pd

try:
    from .integral_basis import GramMatrix, ShapeParams, format_rational, to_mpf
    from .parametrization import FieldRecord
    from .sieve_density import local_count_bruteforce, local_density
except ImportError:
    from integral_basis import GramMatrix, ShapeParams, format_rational, to_mpf
    from parametrization import FieldRecord
    from sieve_density import local_count_bruteforce, local_density

logger = logging.getLogger(__name__)

DIGITS = 15

FIELD_COLUMNS = ["n", "g", "D", "case", "r", "discriminant", "lambda_exact", "lambda_decimal"]
DENSITY_COLUMNS = ["p", "ell", "count_formula", "count_bruteforce", "mu_p", "mu_p_decimal"]


def decimal(value, digits: int = DIGITS) -> str:
    if isinstance(value, Fraction):
        value = to_mpf(value)
    return mpmath.nstr(mpmath.mpf(value), digits)


def write_frame(frame: pd.DataFrame, path: str) -> str:
    """Write atomically; returns the final path"""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    handle, tmp_path = tempfile.mkstemp(prefix=".tmp_", suffix=".csv", dir=directory)
    try:
        with os.fdopen(handle, "w", encoding="utf-8", newline="") as fh:
            frame.to_csv(fh, index=False, lineterminator="\n")
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def _shape_cells(shape: ShapeParams) -> List[str]:
    return [";".join(format_rational(x) for x in shape.lambdas), ";".join(shape.decimals())]


def fields_frame(records: Iterable[FieldRecord]) -> pd.DataFrame:
    rows = []
    for record in records:
        rows.append([
            record.rad.n,
            str(record.source),
            ";".join(str(d) for d in record.rad.radicands[1:]),
            record.case.label,
            record.case.r,
            record.discriminant,
            *_shape_cells(record.shape),
        ])
    return pd.DataFrame(rows, columns=FIELD_COLUMNS)


def density_frame(primes: Sequence[int], ell: int, bruteforce: bool = False) -> pd.DataFrame:
    """One row per prime; the brute-force column is left empty unless requested"""
    rows = []
    for p in primes:
        local = local_density(p, ell)
        exhaustive: Optional[int] = local_count_bruteforce(p, ell) if bruteforce and p != 2 else None
        rows.append([
            p,
            ell,
            local.count,
            "" if exhaustive is None else exhaustive,
            format_rational(local.density),
            decimal(local.density),
        ])
    return pd.DataFrame(rows, columns=DENSITY_COLUMNS)


def gram_frame(gram: GramMatrix) -> pd.DataFrame:
    return pd.DataFrame(gram.to_rows(), columns=[f"c{k}" for k in range(gram.dim)])
