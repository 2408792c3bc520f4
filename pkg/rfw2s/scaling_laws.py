"""
Closed-form decay exponents of the teacher and student excess test errors under power-law
scalings of every resource in n_t, and the weak-to-strong region predicates built on them.
"""

import logging
import math
from typing import Any, Sequence

import numpy as np
from pydantic import ValidationError

from rfw2s.constants import BOUNDARY_TOLERANCE, Branch, Region, TauOrder
from rfw2s.exceptions import InvalidParameter
from rfw2s.schemas import ExponentReport, ScalingParams, Witness

logger = logging.getLogger(__name__)

REGION_COLUMNS = (
    "alpha",
    "r",
    "gamma_pt",
    "gamma_lt",
    "gamma_ns",
    "gamma_ps",
    "gamma_ls",
    "z_t",
    "z_s",
    "teacher_exponent",
    "student_exponent",
    "region",
    "binding_witness",
)


def _source_caps(p: ScalingParams) -> tuple[float, float]:
    """(2α(r∧1), 2α(r∧½))"""
    return 2.0 * p.alpha * min(p.r, 1.0), 2.0 * p.alpha * min(p.r, 0.5)


def z_exponents(p: ScalingParams) -> tuple[float, float]:
    """
    Effective resolution exponents of teacher and student.

    z_t = ((1 + γ_{λ_t})/α) ∧ 1 ∧ γ_{p_t} and z_s = ((γ_{n_s} + γ_{λ_s})/α) ∧ γ_{n_s} ∧ γ_{p_s}:
    whichever of regularization, samples or width resolves the fewest eigen-directions binds.
    """
    z_t = min((1.0 + p.gamma_lt) / p.alpha, 1.0, p.gamma_pt)
    z_s = min((p.gamma_ns + p.gamma_ls) / p.alpha, p.gamma_ns, p.gamma_ps)
    return z_t, z_s


def teacher_exponents(p: ScalingParams) -> tuple[float, float]:
    """
    Decay exponents (γ_{t,B}, γ_{t,V}) of the teacher bias and variance.
    """
    two_a_r1, two_a_r2 = _source_caps(p)
    z_t, _ = z_exponents(p)
    gamma_tB = min(two_a_r1 * z_t, p.gamma_pt + (two_a_r2 - 1.0) * z_t)
    gamma_tV = 1.0 - z_t
    return gamma_tB, gamma_tV


def student_exponents(p: ScalingParams) -> tuple[float, float, Branch]:
    """
    Decay exponents of the two student error terms.

    The bias inherited from the teacher's bias takes one of two forms depending on whether the
    teacher resolves fewer directions than the student (z_t <= z_s, ties included) or more.
    The term inherited from the teacher's noise always decays as n_t^(−(1 − z_s∧z_t)).

    Args:
        p (ScalingParams): Exponents.

    Returns:
        tuple[float, float, Branch]: γ_{s,bias}, γ_{s,var} and the branch used.
    """
    two_a_r1, two_a_r2 = _source_caps(p)
    alpha = p.alpha
    z_t, z_s = z_exponents(p)

    if z_t <= z_s:
        branch = Branch.TEACHER_RESOLVES_LESS
        gamma_bias = min(
            two_a_r1 * z_t,
            p.gamma_pt + (two_a_r2 - 1.0) * z_t,
            (two_a_r2 - alpha) * z_t + (alpha - 1.0) * z_s + p.gamma_ps,
        )
    else:
        branch = Branch.TEACHER_RESOLVES_MORE
        gamma_bias = min(
            two_a_r1 * z_s,
            two_a_r2 * z_s - z_s + p.gamma_ps,
            two_a_r2 * z_t + alpha * (z_t - z_s) - z_s + p.gamma_pt,
            two_a_r2 * z_t - z_t + 1.0 - z_s + p.gamma_pt,
        )
    gamma_var = 1.0 - min(z_s, z_t)
    return gamma_bias, gamma_var, branch


def optimal_exponents(alpha: float, r: float) -> tuple[float, float, float]:
    """
    Best achievable teacher and student exponents and the minimax rate.

    Returns:
        tuple[float, float, float]: (γ_{t,*}, γ_{s,*}, minimax). The first two coincide; both
            fall short of the minimax exponent 2αr/(1 + 2αr) when r > 1.
    """
    if not alpha > 1:
        raise InvalidParameter(f"alpha must be > 1, got {alpha}")
    if not r > 0:
        raise InvalidParameter(f"r must be > 0, got {r}")
    two_a_r1 = 2.0 * alpha * min(r, 1.0)
    best = two_a_r1 / (1.0 + two_a_r1)
    minimax = 2.0 * alpha * r / (1.0 + 2.0 * alpha * r)
    return best, best, minimax


def stable_check(p: ScalingParams) -> bool:
    """True when both ridge parameters decay no faster than the matching sample counts grow."""
    return p.gamma_lt >= -1.0 and p.gamma_ls >= -p.gamma_ns


def _strict(name: str, lhs: float, rhs: float) -> Witness:
    margin = lhs - rhs
    return Witness(name=name, margin=margin, holds=bool(margin > 0))


def _weak(name: str, lhs: float, rhs: float) -> Witness:
    margin = lhs - rhs
    return Witness(name=name, margin=margin, holds=bool(margin >= 0))


def _variance_witnesses(p: ScalingParams, z_t: float, z_s: float) -> list[Witness]:
    two_a_r1, two_a_r2 = _source_caps(p)
    return [
        _strict("z_t > 1/(1+2a(r^1))", z_t, 1.0 / (1.0 + two_a_r1)),
        _strict("z_t > (1-g_pt)/(2a(r^1/2))", z_t, (1.0 - p.gamma_pt) / two_a_r2),
        _strict("g_pt > 1/(1+2a(r^1/2))", p.gamma_pt, 1.0 / (1.0 + two_a_r2)),
        _strict("2a(r^1/2)z_s - z_s + g_ps > 1 - z_t", two_a_r2 * z_s - z_s + p.gamma_ps, 1.0 - z_t),
        _strict("z_t > z_s", z_t, z_s),
        _strict("z_s > (1-z_t)/(2a(r^1))", z_s, (1.0 - z_t) / two_a_r1),
    ]


def _bias_witnesses(p: ScalingParams, z_t: float, z_s: float) -> list[Witness]:
    two_a_r1, two_a_r2 = _source_caps(p)
    alpha = p.alpha
    best = two_a_r1 / (1.0 + two_a_r1)
    witnesses = []
    if p.tau_order == TauOrder.THETA_ONE:
        gamma_tB, gamma_tV = teacher_exponents(p)
        witnesses.append(_weak("g_tV >= g_tB", gamma_tV, gamma_tB))
    witnesses += [
        _strict("z_t > g_pt/(1+2a(r^1)-2a(r^1/2))", z_t, p.gamma_pt / (1.0 + two_a_r1 - two_a_r2)),
        _strict("z_t < g_pt", p.gamma_pt, z_t),
        _strict("z_t < (g*-g_pt)/(a-1)", (best - p.gamma_pt) / (alpha - 1.0), z_t),
        _strict("g_pt < 1 - 2a(r^1/2)/(1+2a(r^1))", 1.0 - two_a_r2 / (1.0 + two_a_r1), p.gamma_pt),
        _strict("z_s < 1 - (a-1)z_t - g_pt", 1.0 - (alpha - 1.0) * z_t - p.gamma_pt, z_s),
        _strict("z_s > ((a-1)z_t + g_pt)/(2a(r^1))", z_s, ((alpha - 1.0) * z_t + p.gamma_pt) / two_a_r1),
        _strict("g_ps - g_pt > (a-1)(z_t-z_s)", p.gamma_ps - p.gamma_pt, (alpha - 1.0) * (z_t - z_s)),
    ]
    return witnesses


def classify_w2sg(p: ScalingParams) -> tuple[Region, list[Witness]]:
    """
    Decides whether the student's error decays strictly faster than the teacher's.

    A strictly better student requires z_t > z_s. Beyond that, the variance-dominated
    characterization is tried first and the bias-dominated one second; every inequality checked
    is returned as a witness with its margin. The variance characterization assumes label noise
    of order one and is skipped when tau_order is ZERO. When any margin lies within
    BOUNDARY_TOLERANCE a trailing "boundary" witness is appended: the region is then a boundary
    case rather than a firm classification.

    Args:
        p (ScalingParams): Exponents; must be stable.

    Returns:
        tuple[Region, list[Witness]]: The region and the witnesses checked.

    Raises:
        InvalidParameter: On unstable regularization.
    """
    if not stable_check(p):
        raise InvalidParameter("region classification needs stable regularization")
    z_t, z_s = z_exponents(p)

    region = Region.NONE
    gate = _strict("z_t > z_s", z_t, z_s)
    witnesses = [gate]
    if gate.holds:
        variance: list[Witness] = []
        if p.tau_order == TauOrder.THETA_ONE:
            variance = _variance_witnesses(p, z_t, z_s)
            witnesses += variance
        if variance and all(w.holds for w in variance):
            region = Region.VARIANCE_W2SG
        else:
            bias = _bias_witnesses(p, z_t, z_s)
            witnesses += bias
            if all(w.holds for w in bias):
                region = Region.BIAS_W2SG

    closest = min((abs(w.margin) for w in witnesses if not math.isnan(w.margin)), default=math.inf)
    if closest <= BOUNDARY_TOLERANCE:
        witnesses.append(Witness(name="boundary", margin=closest, holds=True))
    return region, witnesses


def exponent_report(p: ScalingParams) -> ExponentReport:
    """
    Collects z-exponents, teacher and student exponents and the region of one parameter tuple.
    The reported exponents are always the minimum of the bias and variance exponents.
    """
    z_t, z_s = z_exponents(p)
    gamma_tB, gamma_tV = teacher_exponents(p)
    gamma_s_bias, gamma_s_var, branch = student_exponents(p)
    region, witnesses = classify_w2sg(p)
    return ExponentReport(
        z_t=z_t,
        z_s=z_s,
        gamma_tB=gamma_tB,
        gamma_tV=gamma_tV,
        teacher_exponent=min(gamma_tB, gamma_tV),
        gamma_s_bias=gamma_s_bias,
        gamma_s_var=gamma_s_var,
        student_exponent=min(gamma_s_bias, gamma_s_var),
        branch=branch,
        region=region,
        witnesses=witnesses,
        boundary=any(w.name == "boundary" for w in witnesses),
    )


def fit_log_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """
    Least-squares slope of log y against log x.

    Raises:
        InvalidParameter: With fewer than three points, non-positive values, mismatched lengths
            or all x equal.
    """
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise InvalidParameter("xs and ys must be one-dimensional and of equal length")
    if x.size < 3:
        raise InvalidParameter("a slope fit needs at least 3 points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise InvalidParameter("a log-log fit needs positive values")
    log_x, log_y = np.log(x), np.log(y)
    centered = log_x - log_x.mean()
    spread = float(np.dot(centered, centered))
    if spread == 0.0:
        raise InvalidParameter("degenerate slope fit: all x are equal")
    return float(np.dot(centered, log_y - log_y.mean()) / spread)


def optimal_teacher_scaling(alpha: float, r: float) -> tuple[float, float]:
    """
    Teacher scaling that attains the optimal exponent.

    Returns:
        tuple[float, float]: γ_{λ_t} placing z_t at 1/(1 + 2α(r∧1)), and the smallest γ_{p_t}
            for which width does not limit the bias.
    """
    best, _, _ = optimal_exponents(alpha, r)
    two_a_r1 = 2.0 * alpha * min(r, 1.0)
    two_a_r2 = 2.0 * alpha * min(r, 0.5)
    z_star = 1.0 / (1.0 + two_a_r1)
    logger.debug("Optimal teacher exponent %.6f at z_t=%.6f", best, z_star)
    return alpha * z_star - 1.0, 1.0 - two_a_r2 / (1.0 + two_a_r1)


def achieves_optimal_student(p: ScalingParams) -> int | None:
    """
    Checks the two sufficient condition sets under which the student attains the optimal
    exponent, both of which require z_s ∧ z_t = 1/(1 + 2α(r∧1)).

    Returns:
        int | None: 1 (z_t <= z_s set), 2 (z_t > z_s set) or None when neither holds.
    """
    two_a_r1, two_a_r2 = _source_caps(p)
    alpha = p.alpha
    z_t, z_s = z_exponents(p)
    z_star = 1.0 / (1.0 + two_a_r1)
    if abs(min(z_s, z_t) - z_star) > BOUNDARY_TOLERANCE:
        return None
    width_floor = 1.0 - two_a_r2 / (1.0 + two_a_r1)
    slack = BOUNDARY_TOLERANCE

    if z_t <= z_s:
        ps_floor = (1.0 - alpha) * z_s + (two_a_r1 - two_a_r2 + alpha) / (1.0 + two_a_r1)
        if p.gamma_ps >= ps_floor - slack and p.gamma_pt >= width_floor - slack:
            return 1
        return None

    if (
        p.gamma_ps >= width_floor - slack
        and z_s <= (two_a_r2 * z_t + p.gamma_pt + alpha * z_t - 1.0) / alpha + slack
        and two_a_r2 * z_t + p.gamma_pt - z_t >= -slack
    ):
        return 2
    return None


def student_regularization_window(p: ScalingParams) -> tuple[float, float] | None:
    """
    Range of γ_{λ_s} for which a kernel-limit student with γ_{n_s} > z_t reduces the teacher's
    variance: ((1 − z_t)/(2(r∧1)) − γ_{n_s}, α·z_t − γ_{n_s}).

    Returns:
        tuple[float, float] | None: Open interval of admissible γ_{λ_s}, or None when it is empty
            or the student has no more samples than the teacher resolves.
    """
    z_t, _ = z_exponents(p)
    if p.gamma_ns <= z_t:
        return None
    lower = (1.0 - z_t) / (2.0 * min(p.r, 1.0)) - p.gamma_ns
    upper = p.alpha * z_t - p.gamma_ns
    if lower >= upper:
        return None
    return lower, upper


def _binding_witness(region: Region, witnesses: list[Witness]) -> str:
    if region == Region.NONE:
        failing = [w for w in witnesses if not w.holds and w.name != "boundary"]
        if failing:
            return failing[-1].name
    finite = [w for w in witnesses if w.name != "boundary" and not math.isnan(w.margin)]
    if not finite:
        return ""
    return min(finite, key=lambda w: abs(w.margin)).name


def region_sweep(
    base: ScalingParams,
    grid_ns: Sequence[float],
    grid_ls: Sequence[float],
    grid_ps: Sequence[float],
) -> list[dict[str, Any]]:
    """
    Classifies every student scaling (γ_{n_s}, γ_{λ_s}, γ_{p_s}) of a grid against a fixed
    teacher. Unstable grid points are skipped.

    Returns:
        list[dict[str, Any]]: One row per stable grid point, keyed by REGION_COLUMNS.
    """
    rows = []
    skipped = 0
    for gamma_ns in grid_ns:
        for gamma_ls in grid_ls:
            for gamma_ps in grid_ps:
                try:
                    p = ScalingParams.model_validate(
                        {**base.model_dump(), "gamma_ns": gamma_ns, "gamma_ls": gamma_ls, "gamma_ps": gamma_ps}
                    )
                except ValidationError as e:
                    raise InvalidParameter(str(e)) from e
                if not stable_check(p):
                    skipped += 1
                    continue
                report = exponent_report(p)
                binding = _binding_witness(report.region, report.witnesses)
                if report.boundary:
                    binding = f"{binding};boundary" if binding else "boundary"
                rows.append(
                    {
                        "alpha": p.alpha,
                        "r": p.r,
                        "gamma_pt": p.gamma_pt,
                        "gamma_lt": p.gamma_lt,
                        "gamma_ns": p.gamma_ns,
                        "gamma_ps": p.gamma_ps,
                        "gamma_ls": p.gamma_ls,
                        "z_t": report.z_t,
                        "z_s": report.z_s,
                        "teacher_exponent": report.teacher_exponent,
                        "student_exponent": report.student_exponent,
                        "region": report.region.value,
                        "binding_witness": binding,
                    }
                )
    if skipped:
        logger.info("Region sweep skipped %s unstable grid points", skipped)
    return rows
