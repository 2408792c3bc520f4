from enum import Enum

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 200
DEFAULT_TAIL_TOL = 1e-6
DEFAULT_ETA_STAR = 0.25
DEFAULT_MAX_DIMENSION = 10_000_000
DEFAULT_REPLICATES = 20
DEFAULT_SEED = 0

# Λ entries below -PSD_TOLERANCE are a numerical inconsistency, above it they are clamped to 0.
PSD_TOLERANCE = 1e-10
BOUNDARY_TOLERANCE = 1e-9

# Upper bound on n*d + p*d float64 entries drawn by the simulator in a single design.
MAX_SAMPLE_ENTRIES = 400_000_000

TRUNCATION_FLOOR_FACTOR = 10.0


class Role(str, Enum):
    """
    Identifies which stage of the two-stage pipeline a quantity belongs to.

    The teacher is fit on noisy ground-truth labels, the student on labels produced
    by the teacher on fresh inputs.
    """

    TEACHER = "teacher"
    STUDENT = "student"


class TauOrder(str, Enum):
    """
    Order of the teacher label noise variance as the sample size grows.
    """

    THETA_ONE = "theta_one"
    ZERO = "zero"


class Region(str, Enum):
    """
    Weak-to-strong generalization regions of the exponent plane.
    """

    NONE = "none"
    VARIANCE_W2SG = "variance_w2sg"
    BIAS_W2SG = "bias_w2sg"


class Branch(str, Enum):
    """
    Which branch of the student bias exponent applies.
    """

    TEACHER_RESOLVES_LESS = "z_t<=z_s"
    TEACHER_RESOLVES_MORE = "z_t>z_s"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"
    # library only; the report stays in the sink
    MEMORY = "memory"


class Quantity(str, Enum):
    """
    Row labels of a sweep report.
    """

    TEACHER_EQUIV = "teacher_equiv"
    STUDENT_EQUIV = "student_equiv"
    TEACHER_THEORY = "teacher_theory"
    STUDENT_THEORY = "student_theory"
    MINIMAX = "minimax"
    TEACHER_MC = "teacher_mc"
    STUDENT_MC = "student_mc"
