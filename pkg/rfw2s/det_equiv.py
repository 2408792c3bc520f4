"""
Deterministic equivalents of the teacher and student excess test errors.

Every operator is diagonal in the eigenbasis of Σ, so each formula is evaluated entrywise over
the truncated spectrum and contracted with the target through quadratic_form.
"""

import logging

import numpy as np

from rfw2s.constants import DEFAULT_TOL, PSD_TOLERANCE
from rfw2s.exceptions import DimensionMismatch, InvalidParameter, PSDViolation, RegimeError
from rfw2s.fixed_point import solve_fixed_point_scalar
from rfw2s.functionals import chi, upsilon
from rfw2s.schemas import (
    DiagOperator,
    FixedPoint,
    FloatArray,
    RidgeConfig,
    Spectrum,
    StudentContext,
    StudentEquiv,
    TargetCoefs,
    TeacherEquiv,
)
from rfw2s.spectrum import quadratic_form, weighted_trace

logger = logging.getLogger(__name__)


def _check_inputs(spec: Spectrum, beta: TargetCoefs, tau_t: float) -> None:
    if len(beta) != spec.d:
        raise DimensionMismatch(f"target has length {len(beta)} but the spectrum has d={spec.d}")
    if not tau_t >= 0:
        raise InvalidParameter(f"tau_t must be >= 0, got {tau_t}")


def _check_regime(value: float, role: str) -> None:
    if not value < 1:
        raise RegimeError(f"Upsilon_{role} = {value:.6g} >= 1; the {role} error is not defined in this regime")


def _clamp_psd(entries: FloatArray, name: str) -> DiagOperator:
    lowest = float(np.min(entries))
    if lowest < -PSD_TOLERANCE:
        raise PSDViolation(f"{name} has an entry {lowest:.3e} below -{PSD_TOLERANCE:g}")
    negative = int(np.count_nonzero(entries < 0))
    if negative:
        logger.warning("Clamped %s negative entries of %s to zero (lowest %.3e)", negative, name, lowest)
        entries = np.maximum(entries, 0.0)
    return DiagOperator(entries)


def teacher_lambda_op(spec: Spectrum, fp: FixedPoint, upsilon_t: float, chi_t: float) -> DiagOperator:
    """
    Λ_t = (μ₂²/(1 − Υ_t))·[(Σ+μ₂)⁻² + χ_t·Σ(Σ+μ₂)⁻²], unclamped.
    """
    xi2 = spec.eigenvalues
    mu2 = fp.mu2
    return DiagOperator(mu2**2 / (1.0 - upsilon_t) * (1.0 + chi_t * xi2) / (xi2 + mu2) ** 2)


def teacher_equivalent(
    spec: Spectrum, beta: TargetCoefs, cfg_t: RidgeConfig, tau_t: float, tol: float = DEFAULT_TOL
) -> TeacherEquiv:
    """
    Deterministic equivalent R_t = B_t + V_t of the teacher excess test error.

    B_t = ⟨β*, Λ_t β*⟩ and V_t = τ_t²·Υ_t/(1 − Υ_t), with Υ_t = Υ(I) and χ_t = χ(I) at the
    teacher fixed point.

    Args:
        spec (Spectrum): Diagonal covariance.
        beta (TargetCoefs): Target coefficients.
        cfg_t (RidgeConfig): Teacher (n_t, p_t, λ_t).
        tau_t (float): Label noise standard deviation, >= 0.
        tol (float): Fixed-point tolerance.

    Returns:
        TeacherEquiv: Bias, variance, risk and every intermediate quantity.

    Raises:
        RegimeError: If Υ_t >= 1.
        PSDViolation: If Λ_t has an entry below -PSD_TOLERANCE.
    """
    _check_inputs(spec, beta, tau_t)
    fp = solve_fixed_point_scalar(spec, cfg_t, tol)
    upsilon_t = upsilon(spec, None, cfg_t.n, cfg_t.p, fp)
    _check_regime(upsilon_t, "t")
    chi_t = chi(spec, None, cfg_t.p, fp.mu2)

    lambda_t_op = _clamp_psd(teacher_lambda_op(spec, fp, upsilon_t, chi_t).entries, "Lambda_t")
    bias = quadratic_form(beta, lambda_t_op)
    variance = tau_t**2 * upsilon_t / (1.0 - upsilon_t)
    logger.debug("Teacher n=%s p=%s lam=%s: bias=%.6e variance=%.6e", cfg_t.n, cfg_t.p, cfg_t.lam, bias, variance)
    return TeacherEquiv(
        bias=bias,
        variance=variance,
        risk=bias + variance,
        lambda_t_op=lambda_t_op,
        upsilon_t=upsilon_t,
        chi_t=chi_t,
        fixed_point=fp,
    )


def student_lambda0(
    spec: Spectrum, cfg_s: RidgeConfig, tol: float = DEFAULT_TOL
) -> tuple[DiagOperator, StudentContext]:
    """
    Builds the student operator
    Λ₀ = Σ²(Σ+μ_{s,2})⁻² + (Υ_s/(1−Υ_s))·μ_{s,2}²(Σ+μ_{s,2})⁻² + (χ_s/(1−Υ_s))·μ_{s,2}²Σ(Σ+μ_{s,2})⁻².

    Returns:
        tuple[DiagOperator, StudentContext]: Λ₀ and the student fixed point and functionals.

    Raises:
        RegimeError: If Υ_s >= 1.
    """
    fp_s = solve_fixed_point_scalar(spec, cfg_s, tol)
    upsilon_s = upsilon(spec, None, cfg_s.n, cfg_s.p, fp_s)
    _check_regime(upsilon_s, "s")
    chi_s = chi(spec, None, cfg_s.p, fp_s.mu2)

    xi2 = spec.eigenvalues
    mu = fp_s.mu2
    shifted_sq = (xi2 + mu) ** 2
    entries = (xi2**2 + (upsilon_s + chi_s * xi2) / (1.0 - upsilon_s) * mu**2) / shifted_sq
    lambda0 = _clamp_psd(entries, "Lambda_0")
    return lambda0, StudentContext(fixed_point=fp_s, upsilon_s=upsilon_s, chi_s=chi_s)


def assemble_student_lambda(
    spec: Spectrum,
    lambda0: DiagOperator,
    mu_s2: float,
    mu_t2: float,
    upsilon_t: float,
    chi_t: float,
    upsilon_t_lambda0: float,
    chi_t_lambda0: float,
) -> DiagOperator:
    """
    Assembles the student operator Λ from Λ₀ and the teacher quantities, unclamped.

    Λ = I − 2Σ²(Σ+μ_{s,2})⁻¹(Σ+μ_{t,2})⁻¹ + Λ₀Σ²(Σ+μ_{t,2})⁻² + (Υ_t(Λ₀)/(1−Υ_t))·μ_{t,2}²(Σ+μ_{t,2})⁻²
        + [Υ_t(Λ₀)·χ_t/(1−Υ_t) + χ_t(Λ₀)]·μ_{t,2}²Σ(Σ+μ_{t,2})⁻²

    With Λ₀ = I, μ_{s,2} = 0 and the teacher functionals of I this reduces to Λ_t.
    """
    if len(lambda0) != spec.d:
        raise DimensionMismatch(f"Lambda_0 has length {len(lambda0)} but the spectrum has d={spec.d}")
    if mu_s2 < 0:
        raise InvalidParameter(f"mu_s2 must be >= 0, got {mu_s2}")
    xi2 = spec.eigenvalues
    teacher_shift = xi2 + mu_t2
    cross = 2.0 * xi2**2 / ((xi2 + mu_s2) * teacher_shift)
    inherited = lambda0.entries * xi2**2 / teacher_shift**2
    noise = upsilon_t_lambda0 / (1.0 - upsilon_t) * mu_t2**2 / teacher_shift**2
    coupling = (upsilon_t_lambda0 * chi_t / (1.0 - upsilon_t) + chi_t_lambda0) * mu_t2**2 * xi2 / teacher_shift**2
    return DiagOperator(1.0 - cross + inherited + noise + coupling)


def student_equivalent(
    spec: Spectrum,
    beta: TargetCoefs,
    cfg_t: RidgeConfig,
    tau_t: float,
    cfg_s: RidgeConfig,
    tol: float = DEFAULT_TOL,
    teacher: TeacherEquiv | None = None,
) -> StudentEquiv:
    """
    Deterministic equivalent of the student excess test error, measured against the original
    target.

    R_s = ⟨β*, Λβ*⟩ + τ_t²·Υ_t(Λ₀)/(1 − Υ_t). Υ_t(Λ₀) and χ_t(Λ₀) are the teacher functionals
    with weight Λ₀.

    Args:
        spec (Spectrum): Diagonal covariance.
        beta (TargetCoefs): Target coefficients.
        cfg_t (RidgeConfig): Teacher (n_t, p_t, λ_t).
        tau_t (float): Teacher label noise standard deviation, >= 0.
        cfg_s (RidgeConfig): Student (n_s, p_s, λ_s).
        tol (float): Fixed-point tolerance.
        teacher (TeacherEquiv | None): Teacher equivalent already computed for (cfg_t, tau_t),
            reused instead of solving again.

    Returns:
        StudentEquiv: Both risk terms, Λ, Λ₀ and every intermediate quantity.

    Raises:
        RegimeError: If Υ_t >= 1 or Υ_s >= 1.
        PSDViolation: If Λ or Λ₀ has an entry below -PSD_TOLERANCE.
    """
    _check_inputs(spec, beta, tau_t)
    if teacher is None:
        teacher = teacher_equivalent(spec, beta, cfg_t, tau_t, tol)
    fp_t = teacher.fixed_point
    lambda0, context = student_lambda0(spec, cfg_s, tol)

    upsilon_t_l0 = upsilon(spec, lambda0, cfg_t.n, cfg_t.p, fp_t)
    chi_t_l0 = chi(spec, lambda0, cfg_t.p, fp_t.mu2)
    raw = assemble_student_lambda(
        spec,
        lambda0,
        context.fixed_point.mu2,
        fp_t.mu2,
        teacher.upsilon_t,
        teacher.chi_t,
        upsilon_t_l0,
        chi_t_l0,
    )
    lambda_op = _clamp_psd(raw.entries, "Lambda")

    bias_from_bias = quadratic_form(beta, lambda_op)
    bias_from_var = tau_t**2 * upsilon_t_l0 / (1.0 - teacher.upsilon_t)
    logger.debug(
        "Student n=%s p=%s lam=%s: bias_bias=%.6e bias_var=%.6e",
        cfg_s.n,
        cfg_s.p,
        cfg_s.lam,
        bias_from_bias,
        bias_from_var,
    )
    return StudentEquiv(
        bias_from_bias=bias_from_bias,
        bias_from_var=bias_from_var,
        risk=bias_from_bias + bias_from_var,
        lambda_op=lambda_op,
        lambda0_op=lambda0,
        upsilon_t_of_lambda0=upsilon_t_l0,
        chi_t_of_lambda0=chi_t_l0,
        context=context,
        teacher=teacher,
    )


def student_error_budget(
    spec: Spectrum,
    beta: TargetCoefs,
    teacher_run_beta_t_norms: tuple[float, float],
    cfg_t: RidgeConfig,
    cfg_s: RidgeConfig,
    tol: float = DEFAULT_TOL,
) -> float:
    """
    Approximation budget R̃_s = ‖β_t‖·‖β* − β_t‖ + ‖β*‖²·(‖Λ₀‖_op ∨ 1)
    + (1/n_t)·(μ_{t,2}/(1 − Υ_t))·Tr(Λ₀(Σ+μ_{t,2})⁻¹).

    Args:
        spec (Spectrum): Diagonal covariance.
        beta (TargetCoefs): Target coefficients.
        teacher_run_beta_t_norms (tuple[float, float]): ‖β_t‖₂ and ‖β* − β_t‖₂ from a simulated
            teacher, or zeros for the deterministic part only.
        cfg_t (RidgeConfig): Teacher (n_t, p_t, λ_t).
        cfg_s (RidgeConfig): Student (n_s, p_s, λ_s).
        tol (float): Fixed-point tolerance.

    Returns:
        float: The budget. Reported, never asserted against a threshold.
    """
    _check_inputs(spec, beta, 0.0)
    beta_t_norm, beta_gap_norm = teacher_run_beta_t_norms
    if beta_t_norm < 0 or beta_gap_norm < 0:
        raise InvalidParameter("norms must be non-negative")
    fp_t = solve_fixed_point_scalar(spec, cfg_t, tol)
    upsilon_t = upsilon(spec, None, cfg_t.n, cfg_t.p, fp_t)
    _check_regime(upsilon_t, "t")
    lambda0, _ = student_lambda0(spec, cfg_s, tol)

    empirical = beta_t_norm * beta_gap_norm
    target = beta.norm**2 * max(lambda0.op_norm, 1.0)
    trace = fp_t.mu2 / (1.0 - upsilon_t) * weighted_trace(spec, lambda0, 0, 1, fp_t.mu2) / cfg_t.n
    return empirical + target + trace


def equiv_report(teacher: TeacherEquiv, student: StudentEquiv | None = None) -> dict[str, float]:
    """
    Flat key-value view of the deterministic equivalents, teacher keys first.
    """
    report = teacher.to_dict()
    if student is not None:
        report.update(student.to_dict())
    return report
