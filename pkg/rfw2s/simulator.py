"""
Seeded Monte-Carlo teacher/student pipeline on the Gaussian linear model.

Inputs are standard Gaussian vectors g in the eigenbasis of Σ, the target is f*(g) = ⟨β*, g⟩
and each random feature is a row f of F with covariance Σ, so the feature matrix is
Z = G·Fᵀ/√p and a fitted predictor has coefficients β̂ = Fᵀâ/√p in the same basis. The excess
test error is then the exact squared distance ‖β* − β̂‖².
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from rfw2s.constants import MAX_SAMPLE_ENTRIES
from rfw2s.exceptions import DimensionMismatch, FactorizationError, HookError, InvalidParameter
from rfw2s.schemas import (
    ErrorSummary,
    ExperimentConfig,
    FloatArray,
    MonteCarloSummary,
    RunResult,
    Spectrum,
    TargetCoefs,
)
from rfw2s.types import ReplicateHook

logger = logging.getLogger(__name__)


def replicate_rng(seed: int) -> np.random.Generator:
    """
    Counter-based generator stream of one replicate. Streams of different seeds are
    independent, so replicates may run in any order or concurrently.
    """
    return np.random.Generator(np.random.Philox(seed))


def sample_design(spec: Spectrum, n: int, p: int, rng: np.random.Generator) -> tuple[FloatArray, FloatArray]:
    """
    Draws the input matrix G (n×d, i.i.d. standard normal) and the feature matrix F (p×d) with
    F_jk = ξ_k·z_jk, so every row of F has covariance Σ.

    Raises:
        InvalidParameter: On non-positive sizes or when (n + p)·d exceeds MAX_SAMPLE_ENTRIES.
    """
    if n < 1 or p < 1:
        raise InvalidParameter("n and p must be >= 1")
    if (n + p) * spec.d > MAX_SAMPLE_ENTRIES:
        raise InvalidParameter(f"design of {(n + p) * spec.d} entries exceeds the cap of {MAX_SAMPLE_ENTRIES}")
    G = rng.standard_normal((n, spec.d))
    F = rng.standard_normal((p, spec.d)) * np.sqrt(spec.eigenvalues)
    return G, F


def rfrr_fit(Z: FloatArray, y: FloatArray, lam: float) -> FloatArray:
    """
    Ridge coefficients â = (ZᵀZ + λI_p)⁻¹Zᵀy.

    The smaller Gram system is factorized: the primal p×p system when p <= n, otherwise the
    dual â = Zᵀ(ZZᵀ + λI_n)⁻¹y.

    Args:
        Z (FloatArray): n×p feature matrix.
        y (FloatArray): n labels.
        lam (float): Ridge parameter, > 0.

    Returns:
        FloatArray: The p coefficients.

    Raises:
        InvalidParameter: If lam <= 0.
        DimensionMismatch: If y does not have n entries.
        FactorizationError: If the Cholesky factorization fails.
    """
    if not lam > 0:
        raise InvalidParameter(f"lam must be > 0, got {lam}")
    n, p = Z.shape
    if y.shape != (n,):
        raise DimensionMismatch(f"labels have shape {y.shape}, expected ({n},)")
    try:
        if p <= n:
            gram = Z.T @ Z
            gram[np.diag_indices_from(gram)] += lam
            return cho_solve(cho_factor(gram, lower=True), Z.T @ y)
        gram = Z @ Z.T
        gram[np.diag_indices_from(gram)] += lam
        return Z.T @ cho_solve(cho_factor(gram, lower=True), y)
    except LinAlgError as e:
        raise FactorizationError(f"ridge Gram system is not positive definite at lam={lam:g}: {e}") from e


def excess_error(beta_star: TargetCoefs, F: FloatArray, a: FloatArray) -> float:
    """
    ‖β* − Fᵀa/√p‖², the population excess risk of the predictor with feature coefficients a.
    """
    p, d = F.shape
    if len(beta_star) != d or a.shape != (p,):
        raise DimensionMismatch(f"incompatible shapes: beta {len(beta_star)}, F {F.shape}, a {a.shape}")
    residual = beta_star.coefficients - F.T @ a / math.sqrt(p)
    return float(residual @ residual)


def run_teacher_student(cfg: ExperimentConfig, rng: np.random.Generator, seed: int | None = None) -> RunResult:
    """
    Runs one teacher/student replicate.

    The teacher is fit on y = Gβ* + τε, ε ~ N(0, I). Fresh inputs are then labelled by the
    teacher without additional noise and the student is fit on them. Both errors are measured
    against the original target.

    Args:
        cfg (ExperimentConfig): Experiment definition.
        rng (np.random.Generator): Generator stream consumed by this replicate.
        seed (int | None): Seed of rng, recorded in the result.

    Returns:
        RunResult: Teacher and student errors together with ‖β_t‖ and ‖β* − β_t‖.

    Raises:
        FactorizationError: Propagated from rfrr_fit.
    """
    spec, beta = cfg.spectrum, cfg.beta
    teacher, student = cfg.teacher, cfg.student

    G_t, F_t = sample_design(spec, teacher.n, teacher.p, rng)
    noise = rng.standard_normal(teacher.n)
    y_t = G_t @ beta.coefficients + cfg.tau * noise
    a_t = rfrr_fit(G_t @ F_t.T / math.sqrt(teacher.p), y_t, teacher.lam)
    beta_t = F_t.T @ a_t / math.sqrt(teacher.p)
    gap = beta.coefficients - beta_t

    G_s, F_s = sample_design(spec, student.n, student.p, rng)
    y_s = G_s @ beta_t
    a_s = rfrr_fit(G_s @ F_s.T / math.sqrt(student.p), y_s, student.lam)

    return RunResult(
        teacher_error=float(gap @ gap),
        student_error=excess_error(beta, F_s, a_s),
        beta_t_norm=float(np.linalg.norm(beta_t)),
        beta_gap_norm=float(np.linalg.norm(gap)),
        seed=seed,
    )


def _summarize(values: list[float]) -> ErrorSummary:
    arr = np.array(values, dtype=np.float64)
    count = int(arr.size)
    std = float(np.std(arr, ddof=1))
    return ErrorSummary(mean=float(np.mean(arr)), std=std, stderr=std / math.sqrt(count), count=count)


def monte_carlo(
    cfg: ExperimentConfig,
    hooks: Iterable[ReplicateHook] | None = None,
    workers: int | None = None,
) -> MonteCarloSummary:
    """
    Runs cfg.replicates independent replicates with seeds seed+0 … seed+R−1 and aggregates them.

    Replicates may execute concurrently; results are folded and hooks are called in ascending
    replicate order, so the summary does not depend on the number of workers.

    Args:
        cfg (ExperimentConfig): Experiment definition.
        hooks (Iterable[ReplicateHook] | None): Callables notified after each replicate.
        workers (int | None): Thread count; defaults to cfg.workers.

    Returns:
        MonteCarloSummary: Mean, sample standard deviation and standard error of each error,
            plus the per-replicate results.

    Raises:
        InvalidParameter: If fewer than 2 replicates are requested.
        HookError: If a hook raises.
    """
    if cfg.replicates < 2:
        raise InvalidParameter(f"monte_carlo needs at least 2 replicates, got {cfg.replicates}")
    hooks = list(hooks or [])
    workers = workers or cfg.workers
    seeds = [cfg.seed + r for r in range(cfg.replicates)]

    def run(seed: int) -> RunResult:
        return run_teacher_student(cfg, replicate_rng(seed), seed)

    results: list[RunResult] = []
    with ThreadPoolExecutor(max_workers=workers) as executor:
        for replicate, (seed, result) in enumerate(zip(seeds, executor.map(run, seeds))):
            results.append(result)
            logger.debug(
                "Replicate %s (seed %s): teacher=%.6e student=%.6e",
                replicate,
                seed,
                result.teacher_error,
                result.student_error,
            )
            for hook in hooks:
                try:
                    hook(replicate, seed, result)
                except Exception as e:
                    executor.shutdown(wait=False, cancel_futures=True)
                    raise HookError(e) from e

    summary = MonteCarloSummary(
        teacher=_summarize([r.teacher_error for r in results]),
        student=_summarize([r.student_error for r in results]),
        results=results,
    )
    logger.info(
        "Monte Carlo over %s replicates: teacher %.6e ± %.2e, student %.6e ± %.2e",
        cfg.replicates,
        summary.teacher.mean,
        summary.teacher.stderr,
        summary.student.mean,
        summary.student.stderr,
    )
    return summary
