import importlib.metadata

try:
    __version__ = importlib.metadata.version("rfw2s")
except importlib.metadata.PackageNotFoundError:
    __version__ = "unknown"

from rfw2s.constants import Branch, OutputFormat, Quantity, Region, Role, TauOrder
from rfw2s.det_equiv import student_equivalent, student_error_budget, teacher_equivalent
from rfw2s.exceptions import (
    ConvergenceError,
    DegenerateDenominator,
    DimensionMismatch,
    FactorizationError,
    HookError,
    InvalidParameter,
    NumericalError,
    PSDViolation,
    RegimeError,
    ReportIOError,
    TruncationOverflow,
    W2SError,
)
from rfw2s.fixed_point import asymptotic_fixed_point, solve_fixed_point, solve_fixed_point_scalar
from rfw2s.functionals import chi, rho_diagnostics, upsilon
from rfw2s.scaling_laws import classify_w2sg, exponent_report, student_exponents, teacher_exponents
from rfw2s.schemas import (
    DiagOperator,
    ExperimentConfig,
    FixedPoint,
    RidgeConfig,
    RunResult,
    ScalingParams,
    Spectrum,
    StudentEquiv,
    SweepSpec,
    TargetCoefs,
    TeacherEquiv,
)
from rfw2s.simulator import monte_carlo, run_teacher_student
from rfw2s.spectrum import default_truncation, make_power_law_spectrum, make_power_law_target
from rfw2s.types import ReplicateHook

__all__ = [
    "Spectrum",
    "TargetCoefs",
    "DiagOperator",
    "RidgeConfig",
    "ScalingParams",
    "ExperimentConfig",
    "SweepSpec",
    "FixedPoint",
    "TeacherEquiv",
    "StudentEquiv",
    "RunResult",
    "Role",
    "TauOrder",
    "Region",
    "Branch",
    "Quantity",
    "OutputFormat",
    "make_power_law_spectrum",
    "make_power_law_target",
    "default_truncation",
    "solve_fixed_point",
    "solve_fixed_point_scalar",
    "asymptotic_fixed_point",
    "upsilon",
    "chi",
    "rho_diagnostics",
    "teacher_equivalent",
    "student_equivalent",
    "student_error_budget",
    "run_teacher_student",
    "monte_carlo",
    "teacher_exponents",
    "student_exponents",
    "classify_w2sg",
    "exponent_report",
    "ReplicateHook",
    "W2SError",
    "InvalidParameter",
    "DimensionMismatch",
    "TruncationOverflow",
    "ReportIOError",
    "HookError",
    "NumericalError",
    "ConvergenceError",
    "DegenerateDenominator",
    "RegimeError",
    "PSDViolation",
    "FactorizationError",
]
