from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, InstanceOf, model_validator

from rfw2s.constants import (
    DEFAULT_ETA_STAR,
    DEFAULT_MAX_DIMENSION,
    DEFAULT_REPLICATES,
    DEFAULT_SEED,
    DEFAULT_TAIL_TOL,
    DEFAULT_TOL,
    Branch,
    OutputFormat,
    Region,
    TauOrder,
)
from rfw2s.exceptions import DimensionMismatch, InvalidParameter

FloatArray = NDArray[np.float64]


def _frozen_vector(values: Any, name: str) -> FloatArray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidParameter(f"{name} must be a non-empty one-dimensional sequence")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, slots=True, eq=False)
class Spectrum:
    """
    Truncated diagonal covariance Σ = diag(ξ²₁, …, ξ²_d).

    Attributes:
        eigenvalues (FloatArray): Non-increasing, strictly positive eigenvalues ξ²_k. Stored read-only.
    """

    eigenvalues: FloatArray

    def __post_init__(self) -> None:
        arr = _frozen_vector(self.eigenvalues, "eigenvalues")
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
            raise InvalidParameter("eigenvalues must be finite and strictly positive")
        if np.any(np.diff(arr) > 0):
            raise InvalidParameter("eigenvalues must be non-increasing")
        object.__setattr__(self, "eigenvalues", arr)

    @property
    def d(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def trace(self) -> float:
        return float(np.sum(self.eigenvalues))

    def __len__(self) -> int:
        return self.d


@dataclass(frozen=True, slots=True, eq=False)
class TargetCoefs:
    """
    Coefficients β*,k of the target function in the eigenbasis of Σ.

    Attributes:
        coefficients (FloatArray): Real coefficients, stored read-only.
        norm (float): Euclidean norm ‖β*‖₂, computed once at construction.
    """

    coefficients: FloatArray
    norm: float = field(init=False)

    def __post_init__(self) -> None:
        arr = _frozen_vector(self.coefficients, "coefficients")
        if not np.all(np.isfinite(arr)):
            raise InvalidParameter("coefficients must be finite")
        object.__setattr__(self, "coefficients", arr)
        object.__setattr__(self, "norm", float(np.linalg.norm(arr)))

    def __len__(self) -> int:
        return int(self.coefficients.size)


@dataclass(frozen=True, slots=True, eq=False)
class DiagOperator:
    """
    Diagonal operator in the eigenbasis of Σ. Every operator built by the deterministic
    equivalents (Λ_t, Λ₀, Λ and the identity) has this form.
    """

    entries: FloatArray

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", _frozen_vector(self.entries, "entries"))

    @classmethod
    def identity(cls, d: int) -> "DiagOperator":
        return cls(np.ones(d))

    @classmethod
    def zeros(cls, d: int) -> "DiagOperator":
        return cls(np.zeros(d))

    @property
    def op_norm(self) -> float:
        return float(np.max(np.abs(self.entries)))

    def __len__(self) -> int:
        return int(self.entries.size)

    def __add__(self, other: "DiagOperator") -> "DiagOperator":
        if not isinstance(other, DiagOperator):
            return NotImplemented
        if len(other) != len(self):
            raise DimensionMismatch(f"cannot add operators of length {len(self)} and {len(other)}")
        return DiagOperator(self.entries + other.entries)

    def __mul__(self, scalar: float) -> "DiagOperator":
        if not isinstance(scalar, (int, float, np.integer, np.floating)):
            return NotImplemented
        return DiagOperator(self.entries * float(scalar))

    __rmul__ = __mul__


class RidgeConfig(BaseModel):
    """
    Sample count, feature count and ridge parameter of one ridge regression stage.

    Attributes:
        n (int): Number of samples.
        p (int): Number of random features.
        lam (float): Ridge parameter λ > 0. The ridgeless limit is reached with small λ.
    """

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1)
    p: int = Field(ge=1)
    lam: float = Field(gt=0, allow_inf_nan=False)


class ScalingParams(BaseModel):
    """
    Source and capacity exponents together with the power-law scalings of every resource in n_t.

    p_t = n_t^gamma_pt, λ_t = n_t^(−gamma_lt), n_s = n_t^gamma_ns, p_s = n_t^gamma_ps and
    λ_s = n_t^(−gamma_ls). Infinite width or sample exponents model the kernel limit
    (p = ∞) and the approximation limit (n_s = ∞).

    Attributes:
        alpha (float): Capacity exponent, ξ²_k = k^(−alpha).
        r (float): Source exponent, β*,k = k^(−(1 + 2·alpha·r)/2).
        gamma_pt (float): Teacher width exponent.
        gamma_lt (float): Teacher regularization exponent.
        gamma_ns (float): Student sample exponent.
        gamma_ps (float): Student width exponent.
        gamma_ls (float): Student regularization exponent.
        tau_order (TauOrder): Order of the teacher label noise variance.
    """

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(gt=1, allow_inf_nan=False)
    r: float = Field(gt=0, allow_inf_nan=False)
    gamma_pt: float = Field(gt=0)
    gamma_lt: float = Field(allow_inf_nan=False)
    gamma_ns: float = Field(gt=0)
    gamma_ps: float = Field(gt=0)
    gamma_ls: float = Field(allow_inf_nan=False)
    tau_order: TauOrder = TauOrder.THETA_ONE


class ExperimentConfig(BaseModel):
    """
    Everything one Monte-Carlo teacher/student experiment needs.

    Attributes:
        spectrum (Spectrum): Covariance of the Gaussian inputs.
        beta (TargetCoefs): Target coefficients; must match the spectrum dimension.
        teacher (RidgeConfig): Teacher (n_t, p_t, λ_t).
        tau (float): Standard deviation of the teacher label noise.
        student (RidgeConfig): Student (n_s, p_s, λ_s).
        seed (int): Base seed; replicate r uses seed + r.
        replicates (int): Number of independent replicates.
        workers (int): Threads used to run replicates.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    spectrum: InstanceOf[Spectrum]
    beta: InstanceOf[TargetCoefs]
    teacher: RidgeConfig
    tau: float = Field(ge=0, allow_inf_nan=False)
    student: RidgeConfig
    seed: int = Field(default=DEFAULT_SEED, ge=0, lt=2**64)
    replicates: int = Field(default=DEFAULT_REPLICATES, ge=1)
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _check_dimensions(self) -> "ExperimentConfig":
        if len(self.beta) != self.spectrum.d:
            raise ValueError(f"target has {len(self.beta)} coefficients but the spectrum has d={self.spectrum.d}")
        return self


class SweepSpec(BaseModel):
    """
    Geometric ladder of teacher sample sizes together with the scalings that derive every other
    resource from n_t.

    Attributes:
        params (ScalingParams): Exponents of the sweep.
        tau (float): Teacher label noise standard deviation.
        nt_start (int): First teacher sample size.
        nt_factor (float): Ratio between consecutive ladder points.
        nt_count (int): Number of ladder points.
        replicates (int): Monte-Carlo replicates per point; 0 disables simulation.
        seed (int): Base seed of the Monte-Carlo runs.
        d (int | None): Explicit truncation dimension, or None to derive it from the largest point.
        tail_tol (float): Tail tolerance used when d is derived.
        max_dimension (int): Cap on the derived truncation dimension.
        tol (float): Relative tolerance of the fixed-point solvers.
        workers (int): Threads used for Monte-Carlo replicates.
        out (Path | None): Destination of the report, flushed even when a point fails.
        format (OutputFormat): Report format.
    """

    model_config = ConfigDict(frozen=True)

    params: ScalingParams
    tau: float = Field(default=1.0, ge=0, allow_inf_nan=False)
    nt_start: int = Field(ge=1)
    nt_factor: float = Field(default=2.0, gt=1, allow_inf_nan=False)
    nt_count: int = Field(ge=1)
    replicates: int = Field(default=0, ge=0)
    seed: int = Field(default=DEFAULT_SEED, ge=0, lt=2**64)
    d: int | None = Field(default=None, ge=1)
    tail_tol: float = Field(default=DEFAULT_TAIL_TOL, gt=0, lt=1)
    max_dimension: int = Field(default=DEFAULT_MAX_DIMENSION, ge=1)
    tol: float = Field(default=DEFAULT_TOL, gt=0, le=1e-6)
    workers: int = Field(default=1, ge=1)
    out: Path | None = None
    format: OutputFormat = OutputFormat.CSV

    @model_validator(mode="after")
    def _check_finite_scalings(self) -> "SweepSpec":
        p = self.params
        if not all(np.isfinite([p.gamma_pt, p.gamma_ns, p.gamma_ps])):
            raise ValueError("a sweep needs finite width and sample exponents")
        if self.replicates == 1:
            raise ValueError("replicates must be 0 (no simulation) or at least 2")
        return self


class RunSettings(BaseModel):
    """
    Flat key-value settings shared by every CLI subcommand.

    Loaded from a JSON object and overridden by command-line flags. Unknown keys are rejected.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    alpha: float = Field(default=2.0, gt=1, allow_inf_nan=False)
    r: float = Field(default=1.0, gt=0, allow_inf_nan=False)
    gamma_pt: float = Field(default=1.0, gt=0)
    gamma_lt: float = Field(default=0.0, allow_inf_nan=False)
    gamma_ns: float = Field(default=1.0, gt=0)
    gamma_ps: float = Field(default=1.0, gt=0)
    gamma_ls: float = Field(default=0.0, allow_inf_nan=False)
    tau: float = Field(default=1.0, ge=0, allow_inf_nan=False)
    nt_start: int = Field(default=256, ge=1)
    nt_factor: float = Field(default=2.0, gt=1, allow_inf_nan=False)
    nt_count: int = Field(default=6, ge=1)
    replicates: int = Field(default=0, ge=0)
    seed: int = Field(default=DEFAULT_SEED, ge=0, lt=2**64)
    d: int | None = Field(default=None, ge=1)
    tail_tol: float = Field(default=DEFAULT_TAIL_TOL, gt=0, lt=1)
    eta_star: float = Field(default=DEFAULT_ETA_STAR, gt=0, lt=0.5)
    tol: float = Field(default=DEFAULT_TOL, gt=0, le=1e-6)
    n_t: int = Field(default=400, ge=1)
    p_t: int = Field(default=600, ge=1)
    lambda_t: float = Field(default=1e-3, gt=0, allow_inf_nan=False)
    n_s: int = Field(default=400, ge=1)
    p_s: int = Field(default=600, ge=1)
    lambda_s: float = Field(default=2e-3, gt=0, allow_inf_nan=False)
    workers: int = Field(default=1, ge=1)
    c1: float = Field(default=1.0, gt=0, allow_inf_nan=False)
    max_dimension: int = Field(default=DEFAULT_MAX_DIMENSION, ge=1)
    tau_order: TauOrder = TauOrder.THETA_ONE

    def scaling_params(self) -> ScalingParams:
        return ScalingParams(
            alpha=self.alpha,
            r=self.r,
            gamma_pt=self.gamma_pt,
            gamma_lt=self.gamma_lt,
            gamma_ns=self.gamma_ns,
            gamma_ps=self.gamma_ps,
            gamma_ls=self.gamma_ls,
            tau_order=self.tau_order,
        )

    def teacher_config(self) -> RidgeConfig:
        return RidgeConfig(n=self.n_t, p=self.p_t, lam=self.lambda_t)

    def student_config(self) -> RidgeConfig:
        return RidgeConfig(n=self.n_s, p=self.p_s, lam=self.lambda_s)


@dataclass(slots=True)
class FixedPoint:
    """
    Positive solution (μ₁, μ₂) of the self-consistency system for one ridge stage.

    Attributes:
        mu1 (float): First effective regularization, 0 < mu1 <= mu2.
        mu2 (float): Second effective regularization.
        t1 (float): Tr(Σ(Σ+μ₂)⁻¹) at the solution.
        iterations (int): Root-finder iterations spent on μ₂.
    """

    mu1: float
    mu2: float
    t1: float
    iterations: int = 0


@dataclass(slots=True)
class AsymptoticScalings:
    """
    Predicted log-log slopes in n_t of the fixed point and functionals of one stage.

    Attributes:
        z (float): Effective resolution exponent of the stage.
        slope_mu1 (float): Slope of log μ₁.
        slope_mu2 (float): Slope of log μ₂.
        slope_upsilon (float): Slope of log Υ(I).
        slope_chi (float): Slope of log χ(I).
    """

    z: float
    slope_mu1: float
    slope_mu2: float
    slope_upsilon: float
    slope_chi: float


@dataclass(slots=True)
class Diagnostics:
    """
    Spectrum regularity diagnostics. Reported for inspection only; the absolute constants of the
    approximation guarantees are unknown.

    Attributes:
        r_sigma (Callable[[int], float]): k ↦ r_Σ(k).
        m_sigma (Callable[[int], float]): k ↦ M_Σ(k).
        rho (float): ρ at regularization p·μ₁.
        rho_tilde (float): ρ̃ at regularization p·λ/n.
        eta_star (float): Constant η* in k* = ⌊η*·k⌋.
        lam_rho (float): Regularization used for rho.
        lam_rho_tilde (float): Regularization used for rho_tilde.
    """

    r_sigma: Callable[[int], float]
    m_sigma: Callable[[int], float]
    rho: float
    rho_tilde: float
    eta_star: float
    lam_rho: float
    lam_rho_tilde: float


@dataclass(slots=True)
class TeacherEquiv:
    """
    Deterministic equivalent of the teacher excess test error, R_t = B_t + V_t.
    """

    bias: float
    variance: float
    risk: float
    lambda_t_op: DiagOperator
    upsilon_t: float
    chi_t: float
    fixed_point: FixedPoint

    def to_dict(self) -> dict[str, float]:
        return {
            "mu_t1": self.fixed_point.mu1,
            "mu_t2": self.fixed_point.mu2,
            "upsilon_t": self.upsilon_t,
            "chi_t": self.chi_t,
            "bias_t": self.bias,
            "var_t": self.variance,
            "risk_t": self.risk,
        }


@dataclass(slots=True)
class StudentContext:
    """
    Student-side quantities that enter Λ₀.
    """

    fixed_point: FixedPoint
    upsilon_s: float
    chi_s: float


@dataclass(slots=True)
class StudentEquiv:
    """
    Deterministic equivalent of the student excess test error.

    The student sees no label noise; the teacher's noise reaches it only through
    bias_from_var = τ_t²·Υ_t(Λ₀)/(1 − Υ_t).
    """

    bias_from_bias: float
    bias_from_var: float
    risk: float
    lambda_op: DiagOperator
    lambda0_op: DiagOperator
    upsilon_t_of_lambda0: float
    chi_t_of_lambda0: float
    context: StudentContext
    teacher: TeacherEquiv

    def to_dict(self) -> dict[str, float]:
        return {
            "mu_s1": self.context.fixed_point.mu1,
            "mu_s2": self.context.fixed_point.mu2,
            "upsilon_s": self.context.upsilon_s,
            "chi_s": self.context.chi_s,
            "upsilon_t_lambda0": self.upsilon_t_of_lambda0,
            "chi_t_lambda0": self.chi_t_of_lambda0,
            "bias_bias_s": self.bias_from_bias,
            "bias_var_s": self.bias_from_var,
            "risk_s": self.risk,
        }


@dataclass(slots=True)
class RunResult:
    """
    Outcome of one teacher/student replicate.

    Attributes:
        teacher_error (float): ‖β* − β_t‖² of the teacher.
        student_error (float): ‖β* − β_s‖² of the student, measured against the original target.
        beta_t_norm (float): ‖β_t‖₂.
        beta_gap_norm (float): ‖β* − β_t‖₂.
        seed (int | None): Seed of the generator the replicate consumed.
    """

    teacher_error: float
    student_error: float
    beta_t_norm: float
    beta_gap_norm: float
    seed: int | None = None


@dataclass(slots=True)
class ErrorSummary:
    mean: float
    std: float
    stderr: float
    count: int


@dataclass(slots=True)
class MonteCarloSummary:
    """
    Per-quantity aggregates of a Monte-Carlo run, folded in ascending replicate order.
    """

    teacher: ErrorSummary
    student: ErrorSummary
    results: list[RunResult] = field(default_factory=list)


@dataclass(slots=True)
class Witness:
    """
    One inequality of a region characterization.

    Attributes:
        name (str): Human-readable form of the inequality.
        margin (float): lhs − rhs; the inequality holds when the margin is positive (or
            non-negative for non-strict inequalities).
        holds (bool): Whether the inequality is satisfied.
    """

    name: str
    margin: float
    holds: bool


@dataclass(slots=True)
class ExponentReport:
    """
    Teacher and student decay exponents of the excess test error together with the
    weak-to-strong classification.
    """

    z_t: float
    z_s: float
    gamma_tB: float
    gamma_tV: float
    teacher_exponent: float
    gamma_s_bias: float
    gamma_s_var: float
    student_exponent: float
    branch: Branch
    region: Region
    witnesses: list[Witness] = field(default_factory=list)
    boundary: bool = False


@dataclass(slots=True)
class Report:
    """
    Tabular report consumed by the sinks. Every row maps each column name to a value.
    """

    columns: tuple[str, ...]
    rows: list[dict[str, Any]] = field(default_factory=list)


@dataclass(slots=True)
class SweepReport:
    """
    Rows of a ladder sweep plus fitted log-log slopes of the deterministic equivalents
    (present when the ladder has at least three points).
    """

    columns: tuple[str, ...]
    rows: list[dict[str, Any]] = field(default_factory=list)
    slopes: dict[str, float] = field(default_factory=dict)
