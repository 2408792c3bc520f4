"""
Self-consistent fixed points (μ₁, μ₂) of random-feature ridge regression.

For a diagonal covariance with T₁(μ) = Tr(Σ(Σ+μ)⁻¹) the system reads

    1 + n/p − s(μ₂) = (2/p)·T₁(μ₂),        1 − n/p + s(μ₂) = 2μ₁/μ₂,
    s(μ₂) = sqrt((1 − n/p)² + 4λ/(p·μ₂)),

which is equivalent to μ₁ = μ₂(1 − T₁/p) together with μ₁(n − T₁) = λ.
"""

import logging
import math
from typing import Callable

from scipy.optimize import brentq

from rfw2s.constants import DEFAULT_MAX_ITER, DEFAULT_TOL, Role
from rfw2s.exceptions import ConvergenceError, InvalidParameter
from rfw2s.scaling_laws import stable_check, z_exponents
from rfw2s.schemas import AsymptoticScalings, FixedPoint, RidgeConfig, ScalingParams, Spectrum
from rfw2s.spectrum import weighted_trace

logger = logging.getLogger(__name__)


def _t1(spec: Spectrum, mu: float) -> float:
    return weighted_trace(spec, None, 1, 1, mu)


def _check_tol(tol: float) -> None:
    if not 0 < tol <= 1e-6:
        raise InvalidParameter(f"tol must lie in (0, 1e-6], got {tol}")


def _sqrt_term(cfg: RidgeConfig, mu2: float) -> float:
    ratio = cfg.n / cfg.p
    return math.sqrt((1.0 - ratio) ** 2 + 4.0 * cfg.lam / (cfg.p * mu2))


def _mu1_from_second_equation(cfg: RidgeConfig, mu2: float) -> float:
    """μ₁ = μ₂(1 − n/p + s)/2, written so that 1 − n/p never cancels against s."""
    ratio = cfg.n / cfg.p
    s = _sqrt_term(cfg, mu2)
    if ratio <= 1.0:
        return 0.5 * mu2 * (1.0 - ratio + s)
    return 2.0 * cfg.lam / (cfg.p * (s + ratio - 1.0))


def _solve_log(
    f: Callable[[float], float], lo: float, hi: float, tol: float, max_iter: int, what: str
) -> tuple[float, int]:
    """Root of an increasing f on [lo, hi], searched in log μ."""
    try:
        x, info = brentq(
            lambda x: f(math.exp(x)),
            math.log(lo),
            math.log(hi),
            xtol=tol * 1e-3,
            maxiter=max_iter,
            full_output=True,
            disp=False,
        )
    except ValueError as e:
        raise ConvergenceError(f"{what}: invalid bracket [{lo:.3e}, {hi:.3e}]: {e}") from e
    if not info.converged:
        raise ConvergenceError(f"{what}: no convergence after {info.iterations} iterations ({info.flag})")
    return math.exp(x), int(info.iterations)


def _expand_down(f: Callable[[float], float], start: float, factor: float, max_iter: int, what: str) -> float:
    """Shrinks start until f < 0."""
    mu = start
    for _ in range(max_iter):
        if f(mu) < 0:
            return mu
        mu /= factor
        if mu == 0.0:
            break
    raise ConvergenceError(f"{what}: could not find a lower bracket below {start:.3e}")


def _expand_up(f: Callable[[float], float], start: float, factor: float, max_iter: int, what: str) -> float:
    """Grows start until f >= 0."""
    mu = start
    for _ in range(max_iter):
        if f(mu) >= 0:
            return mu
        mu *= factor
        if not math.isfinite(mu):
            break
    raise ConvergenceError(f"{what}: could not find an upper bracket above {start:.3e}")


def fixed_point_residuals(spec: Spectrum, cfg: RidgeConfig, mu1: float, mu2: float) -> tuple[float, float]:
    """
    Evaluates both equations of the self-consistency system at (mu1, mu2).

    Returns:
        tuple[float, float]: r1 = [1 + n/p − s] − (2/p)·T₁(μ₂) and r2 = [1 − n/p + s] − 2μ₁/μ₂.
    """
    if not (mu1 > 0 and mu2 > 0):
        raise InvalidParameter("mu1 and mu2 must be positive")
    s = _sqrt_term(cfg, mu2)
    ratio = cfg.n / cfg.p
    r1 = (1.0 + ratio - s) - 2.0 * _t1(spec, mu2) / cfg.p
    r2 = (1.0 - ratio + s) - 2.0 * mu1 / mu2
    return r1, r2


def _critical_mu(spec: Spectrum, m: int, tol: float, max_iter: int) -> float:
    """The μ at which T₁(μ) = m, for d > m."""

    def g(mu: float) -> float:
        return m - _t1(spec, mu)

    hi = 2.0 * spec.trace / m
    lo = _expand_down(g, hi, 10.0, max_iter, "critical shift")
    mu_c, _ = _solve_log(g, lo, hi, tol, max_iter, "critical shift")
    return mu_c


def solve_fixed_point_scalar(
    spec: Spectrum, cfg: RidgeConfig, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER
) -> FixedPoint:
    """
    Solves the scalar reformulation F(μ₂) = μ₂·(1 − T₁(μ₂)/p)·(n − T₁(μ₂)) = λ.

    F is strictly increasing where both factors are positive, i.e. for μ₂ above the shift at
    which T₁ reaches min(n, p) (or for every μ₂ > 0 when d <= min(n, p)). At the root
    μ₁ = λ/(n − T₁(μ₂)); it is read off the second equation instead, which stays accurate when
    T₁ approaches n.

    Args:
        spec (Spectrum): Diagonal covariance.
        cfg (RidgeConfig): Sample count, feature count and ridge parameter.
        tol (float): Relative tolerance in (0, 1e-6].
        max_iter (int): Iteration cap of the bracket search and of the root finder.

    Returns:
        FixedPoint: The positive solution.

    Raises:
        ConvergenceError: If no bracket is found or the root finder does not converge.
    """
    _check_tol(tol)
    n, p, lam = cfg.n, cfg.p, cfg.lam
    m = min(n, p)

    def excess(mu: float) -> float:
        t1 = _t1(spec, mu)
        return mu * (1.0 - t1 / p) * (n - t1) - lam

    if spec.d <= m:
        lo = 0.5 * lam / n
    else:
        lo = _critical_mu(spec, m, tol, max_iter)
    hi = _expand_up(excess, max(2.0 * (lam / n + spec.trace), lo), 2.0, max_iter, "scalar fixed point")
    logger.debug("Scalar fixed-point bracket for n=%s p=%s lam=%s: [%.3e, %.3e]", n, p, lam, lo, hi)

    mu2, iterations = _solve_log(excess, lo, hi, tol, max_iter, "scalar fixed point")
    t1 = _t1(spec, mu2)
    mu1 = _mu1_from_second_equation(cfg, mu2)
    logger.debug("Scalar fixed point: mu1=%.6e mu2=%.6e after %s iterations", mu1, mu2, iterations)
    return FixedPoint(mu1=mu1, mu2=mu2, t1=t1, iterations=iterations)


def solve_fixed_point(
    spec: Spectrum, cfg: RidgeConfig, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER
) -> FixedPoint:
    """
    Solves the two-equation self-consistency system directly.

    The first equation involves μ₂ alone and its left-minus-right side is strictly increasing
    in μ₂ (from −∞ at 0 to 2·min(1, n/p) at ∞), so μ₂ is its unique root; μ₁ is then read off
    the second equation. This route is independent of solve_fixed_point_scalar and the two
    agree to the solver tolerance.

    Args:
        spec (Spectrum): Diagonal covariance.
        cfg (RidgeConfig): Sample count, feature count and ridge parameter.
        tol (float): Relative tolerance in (0, 1e-6].
        max_iter (int): Iteration cap of the bracket search and of the root finder.

    Returns:
        FixedPoint: The positive solution.

    Raises:
        ConvergenceError: If no bracket is found or the root finder does not converge.
    """
    _check_tol(tol)
    n, p, lam = cfg.n, cfg.p, cfg.lam
    ratio = n / p

    def first_equation(mu: float) -> float:
        # 1 + n/p − s rewritten without cancellation
        shortfall = 4.0 * (ratio - lam / (p * mu)) / (1.0 + ratio + _sqrt_term(cfg, mu))
        return shortfall - 2.0 * _t1(spec, mu) / p

    start = lam / n
    lo = _expand_down(first_equation, start, 10.0, max_iter, "fixed point")
    hi = _expand_up(first_equation, max(2.0 * (lam / n + spec.trace), lo), 2.0, max_iter, "fixed point")
    logger.debug("Fixed-point bracket for n=%s p=%s lam=%s: [%.3e, %.3e]", n, p, lam, lo, hi)

    mu2, iterations = _solve_log(first_equation, lo, hi, tol, max_iter, "fixed point")
    mu1 = _mu1_from_second_equation(cfg, mu2)
    return FixedPoint(mu1=mu1, mu2=mu2, t1=_t1(spec, mu2), iterations=iterations)


def asymptotic_fixed_point(scaling: ScalingParams, role: Role = Role.TEACHER) -> AsymptoticScalings:
    """
    Predicts the log-log slopes in n_t of μ₁, μ₂, Υ(I) and χ(I) under power-law scalings.

    For the teacher, μ₂ ≍ n_t^(−α·z_t), Υ ≍ n_t^(−1+z_t) and χ ≍ p_t⁻¹·μ₂^(−1−1/α). The student
    follows the same laws in n_s, rewritten in n_t through γ_{n_s}.

    Args:
        scaling (ScalingParams): Exponents; alpha is taken from here.
        role (Role): Which stage to describe.

    Returns:
        AsymptoticScalings: Resolution exponent and predicted slopes.

    Raises:
        InvalidParameter: If the scaling is not stable.
    """
    if not stable_check(scaling):
        raise InvalidParameter("asymptotic scalings are only defined for stable regularization")
    alpha = scaling.alpha
    z_t, z_s = z_exponents(scaling)

    if role == Role.TEACHER:
        lam_exponent = 1.0 + scaling.gamma_lt
        if 1.0 < min(lam_exponent / alpha, scaling.gamma_pt):
            slope_mu1 = -alpha
        else:
            slope_mu1 = -lam_exponent
        return AsymptoticScalings(
            z=z_t,
            slope_mu1=slope_mu1,
            slope_mu2=-alpha * z_t,
            slope_upsilon=-1.0 + z_t,
            slope_chi=-scaling.gamma_pt + (1.0 + alpha) * z_t,
        )

    ns = scaling.gamma_ns
    lam_exponent = ns + scaling.gamma_ls
    if 1.0 < min(lam_exponent / (alpha * ns), scaling.gamma_ps / ns):
        slope_mu1 = -alpha * ns
    else:
        slope_mu1 = -lam_exponent
    return AsymptoticScalings(
        z=z_s,
        slope_mu1=slope_mu1,
        slope_mu2=-alpha * z_s,
        slope_upsilon=-ns + z_s,
        slope_chi=-scaling.gamma_ps + (1.0 + alpha) * z_s,
    )
