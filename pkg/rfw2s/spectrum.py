"""
Truncated power-law spectra and the diagonal trace algebra every deterministic equivalent reduces to.
"""

import csv
import logging
import math
from pathlib import Path

import numpy as np
from scipy.special import zeta

from rfw2s.constants import DEFAULT_MAX_DIMENSION, DEFAULT_TAIL_TOL, TRUNCATION_FLOOR_FACTOR
from rfw2s.exceptions import DimensionMismatch, InvalidParameter, ReportIOError, TruncationOverflow
from rfw2s.schemas import DiagOperator, FloatArray, Spectrum, TargetCoefs

logger = logging.getLogger(__name__)

SPECTRUM_COLUMNS = ("k", "xi2", "beta")


def make_power_law_spectrum(alpha: float, d: int) -> Spectrum:
    """
    Builds the capacity spectrum ξ²_k = k^(−alpha), k = 1..d.

    Args:
        alpha (float): Capacity exponent, must exceed 1.
        d (int): Truncation dimension.

    Returns:
        Spectrum: The truncated spectrum.

    Raises:
        InvalidParameter: If alpha <= 1 or d < 1.
    """
    if not alpha > 1:
        raise InvalidParameter(f"alpha must be > 1, got {alpha}")
    if d < 1:
        raise InvalidParameter(f"d must be >= 1, got {d}")
    k = np.arange(1, d + 1, dtype=np.float64)
    return Spectrum(k ** (-alpha))


def make_power_law_target(alpha: float, r: float, d: int) -> TargetCoefs:
    """
    Builds the source-condition target β*,k = k^(−(1 + 2·alpha·r)/2), k = 1..d.

    Args:
        alpha (float): Capacity exponent, must exceed 1.
        r (float): Source exponent, must be positive.
        d (int): Truncation dimension.

    Returns:
        TargetCoefs: The truncated target.

    Raises:
        InvalidParameter: On alpha <= 1, r <= 0 or d < 1.
    """
    if not alpha > 1:
        raise InvalidParameter(f"alpha must be > 1, got {alpha}")
    if not r > 0:
        raise InvalidParameter(f"r must be > 0, got {r}")
    if d < 1:
        raise InvalidParameter(f"d must be >= 1, got {d}")
    k = np.arange(1, d + 1, dtype=np.float64)
    return TargetCoefs(k ** (-(1.0 + 2.0 * alpha * r) / 2.0))


def make_flat_spectrum(value: float, d: int) -> Spectrum:
    """d equal eigenvalues; raises InvalidParameter when d < 1."""
    if d < 1:
        raise InvalidParameter(f"d must be >= 1, got {d}")
    return Spectrum(np.full(d, float(value)))


def default_truncation(
    alpha: float,
    n: int,
    p: int,
    tail_tol: float = DEFAULT_TAIL_TOL,
    max_dimension: int = DEFAULT_MAX_DIMENSION,
) -> int:
    """
    Chooses the truncation dimension of a k^(−alpha) spectrum.

    The result is the smallest d whose discarded tail Σ_{k>d} k^(−alpha) is at most
    tail_tol times the full trace ζ(alpha), raised to the floor 10·max(n, p)^(1/alpha)
    so that ξ²_d sits well below the effective regularization of an (n, p) problem.

    Args:
        alpha (float): Capacity exponent, must exceed 1.
        n (int): Sample count of the largest problem solved on the spectrum.
        p (int): Feature count of the largest problem solved on the spectrum.
        tail_tol (float): Relative tail tolerance in (0, 1).
        max_dimension (int): Largest admissible dimension.

    Returns:
        int: The truncation dimension.

    Raises:
        InvalidParameter: On alpha <= 1, non-positive counts or tail_tol outside (0, 1).
        TruncationOverflow: If the required dimension exceeds max_dimension.
    """
    if not alpha > 1:
        raise InvalidParameter(f"alpha must be > 1, got {alpha}")
    if n < 1 or p < 1:
        raise InvalidParameter("n and p must be >= 1")
    if not 0 < tail_tol < 1:
        raise InvalidParameter(f"tail_tol must lie in (0, 1), got {tail_tol}")

    budget = tail_tol * float(zeta(alpha))

    def tail(d: int) -> float:
        # Hurwitz zeta: Σ_{j>=0} (j + d + 1)^(−alpha) = Σ_{k>d} k^(−alpha)
        return float(zeta(alpha, d + 1))

    floor = max(1, math.ceil(round(TRUNCATION_FLOOR_FACTOR * max(n, p) ** (1.0 / alpha), 9)))

    if tail(max_dimension) > budget:
        raise TruncationOverflow(
            f"tail tolerance {tail_tol} needs more than max_dimension={max_dimension} eigenvalues at alpha={alpha}"
        )

    lo, hi = 0, 1
    while tail(hi) > budget:
        lo, hi = hi, min(2 * hi, max_dimension)
    # tail(lo) > budget >= tail(hi), unless lo == 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tail(mid) > budget:
            lo = mid
        else:
            hi = mid

    d = max(hi, floor)
    if d > max_dimension:
        raise TruncationOverflow(f"truncation floor {floor} exceeds max_dimension={max_dimension}")
    logger.debug("Truncation for alpha=%s n=%s p=%s: tail criterion %s, floor %s -> d=%s", alpha, n, p, hi, floor, d)
    return d


def _operator_entries(spec: Spectrum, A: DiagOperator | None) -> FloatArray | float:
    if A is None:
        return 1.0
    if len(A) != spec.d:
        raise DimensionMismatch(f"operator has length {len(A)} but the spectrum has d={spec.d}")
    return A.entries


def weighted_trace(spec: Spectrum, A: DiagOperator | None, a: int, b: int, mu: float) -> float:
    """
    Evaluates Tr(A Σ^a (Σ + μ)^(−b)) = Σ_k a_k (ξ²_k)^a / (ξ²_k + μ)^b.

    Args:
        spec (Spectrum): Diagonal covariance.
        A (DiagOperator | None): Diagonal weight; None stands for the identity.
        a (int): Power of Σ, >= 0.
        b (int): Power of the resolvent, >= 0.
        mu (float): Shift, > 0.

    Returns:
        float: The trace.

    Raises:
        DimensionMismatch: If A does not have length d.
        InvalidParameter: On negative powers or non-positive mu.
    """
    if a < 0 or b < 0:
        raise InvalidParameter("trace powers must be non-negative")
    if not mu > 0:
        raise InvalidParameter(f"mu must be > 0, got {mu}")
    weights = _operator_entries(spec, A)
    xi2 = spec.eigenvalues
    return float(np.sum(weights * xi2**a / (xi2 + mu) ** b))


def cross_trace(spec: Spectrum, A: DiagOperator | None, a: int, mu_s: float, b_s: int, mu_t: float, b_t: int) -> float:
    """
    Evaluates the mixed trace Tr(A Σ^a (Σ + μ_s)^(−b_s) (Σ + μ_t)^(−b_t)). The shifts may be 0
    since every ξ²_k is positive.
    """
    if mu_s < 0 or mu_t < 0:
        raise InvalidParameter("shifts must be non-negative")
    weights = _operator_entries(spec, A)
    xi2 = spec.eigenvalues
    return float(np.sum(weights * xi2**a / ((xi2 + mu_s) ** b_s * (xi2 + mu_t) ** b_t)))


def quadratic_form(beta: TargetCoefs, D: DiagOperator) -> float:
    """
    Evaluates ⟨β, Dβ⟩ = Σ_k β²_k d_k.

    Raises:
        DimensionMismatch: If the lengths differ.
    """
    if len(beta) != len(D):
        raise DimensionMismatch(f"target has length {len(beta)} but the operator has length {len(D)}")
    return float(np.sum(beta.coefficients**2 * D.entries))


def spectrum_to_csv(spec: Spectrum, beta: TargetCoefs, path: Path | str) -> None:
    """
    Writes the spectrum and target as CSV rows (k, xi2, beta) for debugging.
    """
    if len(beta) != spec.d:
        raise DimensionMismatch(f"target has length {len(beta)} but the spectrum has d={spec.d}")
    try:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(SPECTRUM_COLUMNS)
            for k, (xi2, b) in enumerate(zip(spec.eigenvalues, beta.coefficients), start=1):
                writer.writerow((k, format(xi2, ".17g"), format(b, ".17g")))
    except OSError as e:
        raise ReportIOError(f"cannot write spectrum to {path}: {e}") from e


def spectrum_from_csv(path: Path | str) -> tuple[Spectrum, TargetCoefs]:
    """
    Reads a spectrum and its target coefficients from a CSV file with the SPECTRUM_COLUMNS header.

    Raises:
        ReportIOError: If the file cannot be read.
        InvalidParameter: On a wrong header or rows out of k order.
    """
    try:
        with open(path, newline="", encoding="utf-8") as f:
            reader = csv.DictReader(f)
            if tuple(reader.fieldnames or ()) != SPECTRUM_COLUMNS:
                raise InvalidParameter(f"expected columns {SPECTRUM_COLUMNS}, got {reader.fieldnames}")
            rows = list(reader)
    except OSError as e:
        raise ReportIOError(f"cannot read spectrum from {path}: {e}") from e

    ks = [int(row["k"]) for row in rows]
    if ks != list(range(1, len(rows) + 1)):
        raise InvalidParameter("rows must be ordered by k = 1..d")
    xi2 = [float(row["xi2"]) for row in rows]
    beta = [float(row["beta"]) for row in rows]
    return Spectrum(xi2), TargetCoefs(beta)
