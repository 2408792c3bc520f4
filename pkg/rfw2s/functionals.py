"""
Trace functionals Υ and χ evaluated at a fixed point, and the spectrum regularity diagnostics
that control how closely the deterministic equivalents track the random errors.
"""

import logging
import math
from functools import partial

import numpy as np

from rfw2s.constants import DEFAULT_ETA_STAR
from rfw2s.exceptions import DegenerateDenominator, InvalidParameter
from rfw2s.schemas import DiagOperator, Diagnostics, FixedPoint, Spectrum, TargetCoefs
from rfw2s.spectrum import quadratic_form, weighted_trace

logger = logging.getLogger(__name__)


def _denominator(spec: Spectrum, p: int, mu2: float) -> float:
    """p − Tr(Σ²(Σ+μ₂)⁻²)"""
    denom = p - weighted_trace(spec, None, 2, 2, mu2)
    if not denom > 0:
        raise DegenerateDenominator(
            f"p={p} does not exceed Tr(Σ²(Σ+μ₂)⁻²) at mu2={mu2:.6e}; the fixed point does not belong to this problem"
        )
    return denom


def upsilon(spec: Spectrum, A: DiagOperator | None, n: int, p: int, fp: FixedPoint) -> float:
    """
    Evaluates Υ(A) = (1/n)·Tr(AΣ(Σ+μ₂)⁻¹) − (μ₁/n)·Tr(AΣ(Σ+μ₂)⁻²) / (1 − (1/p)·Tr(Σ²(Σ+μ₂)⁻²)).

    Args:
        spec (Spectrum): Diagonal covariance.
        A (DiagOperator | None): Diagonal weight; None stands for the identity.
        n (int): Sample count the fixed point was solved for.
        p (int): Feature count the fixed point was solved for.
        fp (FixedPoint): Fixed point of (n, p, λ) on spec.

    Returns:
        float: Υ(A), non-negative for PSD A.

    Raises:
        DegenerateDenominator: If p <= Tr(Σ²(Σ+μ₂)⁻²).
    """
    mu2 = fp.mu2
    denom = _denominator(spec, p, mu2) / p
    first = weighted_trace(spec, A, 1, 1, mu2) / n
    second = fp.mu1 * weighted_trace(spec, A, 1, 2, mu2) / n
    return first - second / denom


def chi(spec: Spectrum, A: DiagOperator | None, p: int, mu2: float) -> float:
    """
    Evaluates χ(A) = Tr(AΣ(Σ+μ₂)⁻²) / (p − Tr(Σ²(Σ+μ₂)⁻²)).

    Raises:
        DegenerateDenominator: If p <= Tr(Σ²(Σ+μ₂)⁻²).
    """
    return weighted_trace(spec, A, 1, 2, mu2) / _denominator(spec, p, mu2)


def intrinsic_dimension(spec: Spectrum, k: int) -> float:
    """
    r_Σ(k) = Σ_{j>=k} ξ²_j / ξ²_k, at least 1 since the k-th term is part of its own tail.

    Raises:
        InvalidParameter: If k lies outside 1..d.
    """
    if not 1 <= k <= spec.d:
        raise InvalidParameter(f"k must lie in 1..{spec.d}, got {k}")
    xi2 = spec.eigenvalues
    return float(np.sum(xi2[k - 1 :]) / xi2[k - 1])


def _check_eta(eta_star: float) -> None:
    if not 0 < eta_star < 0.5:
        raise InvalidParameter(f"eta_star must lie in (0, 1/2), got {eta_star}")


def _lower_index(spec: Spectrum, k: int, eta_star: float) -> int:
    """k* = ⌊η*·k⌋ clamped to 1..d."""
    k_star = max(1, math.floor(eta_star * k))
    if k_star > spec.d:
        logger.warning("k*=%s exceeds the truncation d=%s; clamping to d", k_star, spec.d)
        k_star = spec.d
    return k_star


def m_sigma(spec: Spectrum, k: int, eta_star: float = DEFAULT_ETA_STAR) -> float:
    """
    M_Σ(k) = 1 + ((r_Σ(k*) ∨ k)/k)·log(r_Σ(k*) ∨ k), with the log argument clamped at e.
    """
    _check_eta(eta_star)
    if k < 1:
        raise InvalidParameter(f"k must be >= 1, got {k}")
    top = max(intrinsic_dimension(spec, _lower_index(spec, k, eta_star)), float(k))
    return 1.0 + (top / k) * math.log(max(top, math.e))


def _eigenvalue(spec: Spectrum, k: int) -> float:
    return float(spec.eigenvalues[min(k, spec.d) - 1])


def rho(spec: Spectrum, p: int, lam: float, eta_star: float = DEFAULT_ETA_STAR) -> float:
    """
    ρ_λ(p) = 1 + (p·ξ²_{p*}/λ)·M_Σ(p).
    """
    _check_eta(eta_star)
    if not lam > 0:
        raise InvalidParameter(f"lam must be > 0, got {lam}")
    p_star = _lower_index(spec, p, eta_star)
    return 1.0 + (p * _eigenvalue(spec, p_star) / lam) * m_sigma(spec, p, eta_star)


def rho_tilde(spec: Spectrum, n: int, p: int, lam: float, eta_star: float = DEFAULT_ETA_STAR) -> float:
    """
    ρ̃_λ(n, p) = 1 + {n·ξ²_{n*}/λ + (n/p)·ρ_λ(p)}·M_Σ(n)·1{n* <= p}.
    """
    _check_eta(eta_star)
    if not lam > 0:
        raise InvalidParameter(f"lam must be > 0, got {lam}")
    n_star = _lower_index(spec, n, eta_star)
    if n_star > p:
        return 1.0
    brace = n * _eigenvalue(spec, n_star) / lam + (n / p) * rho(spec, p, lam, eta_star)
    return 1.0 + brace * m_sigma(spec, n, eta_star)


def rho_diagnostics(spec: Spectrum, n: int, p: int, lam: float, eta_star: float, fp: FixedPoint) -> Diagnostics:
    """
    Computes the regularity diagnostics of one stage.

    ρ is evaluated at the regularization p·μ₁ and ρ̃ at p·λ/n, whose inner ρ uses that same
    regularization.

    Args:
        spec (Spectrum): Diagonal covariance.
        n (int): Sample count.
        p (int): Feature count.
        lam (float): Ridge parameter.
        eta_star (float): Constant η* in (0, 1/2).
        fp (FixedPoint): Fixed point of (n, p, lam) on spec.

    Returns:
        Diagnostics: The diagnostics; informational only.

    Raises:
        InvalidParameter: If eta_star lies outside (0, 1/2).
    """
    _check_eta(eta_star)
    lam_rho = p * fp.mu1
    lam_rho_tilde = p * lam / n
    return Diagnostics(
        r_sigma=partial(intrinsic_dimension, spec),
        m_sigma=partial(m_sigma, spec, eta_star=eta_star),
        rho=rho(spec, p, lam_rho, eta_star),
        rho_tilde=rho_tilde(spec, n, p, lam_rho_tilde, eta_star),
        eta_star=eta_star,
        lam_rho=lam_rho,
        lam_rho_tilde=lam_rho_tilde,
    )


def assumption_ratios(spec: Spectrum, beta: TargetCoefs, mu2: float) -> tuple[float, float]:
    """
    Returns the two ratios whose boundedness the approximation guarantees assume:
    Tr(Σ(Σ+μ₂)⁻¹)/Tr(Σ²(Σ+μ₂)⁻²) and ⟨β, (Σ+μ₂)⁻¹β⟩/(μ₂·⟨β, (Σ+μ₂)⁻²β⟩).

    The second ratio is NaN for a zero target.
    """
    if not mu2 > 0:
        raise InvalidParameter(f"mu2 must be > 0, got {mu2}")
    trace_ratio = weighted_trace(spec, None, 1, 1, mu2) / weighted_trace(spec, None, 2, 2, mu2)
    shifted = spec.eigenvalues + mu2
    num = quadratic_form(beta, DiagOperator(1.0 / shifted))
    den = mu2 * quadratic_form(beta, DiagOperator(1.0 / shifted**2))
    target_ratio = num / den if den > 0 else math.nan
    return trace_ratio, target_ratio


def approximation_rate(diag: Diagnostics, n: int, p: int, c1: float = 1.0) -> float:
    """
    Structural approximation rate (ρ̃·log n)^C₁/√n + (ρ̃·ρ·log p)^C₁/√p of one stage. The
    absolute constant C₁ is unknown; the value is a diagnostic, not a bound.
    """
    sample_term = (diag.rho_tilde * math.log(n)) ** c1 / math.sqrt(n)
    feature_term = (diag.rho_tilde * diag.rho * math.log(p)) ** c1 / math.sqrt(p)
    return sample_term + feature_term


def student_approximation_rate(
    diag_t: Diagnostics, n_t: int, p_t: int, diag_s: Diagnostics, n_s: int, p_s: int, c1: float = 1.0
) -> float:
    """Sum of the teacher and student approximation rates."""
    return approximation_rate(diag_t, n_t, p_t, c1) + approximation_rate(diag_s, n_s, p_s, c1)
