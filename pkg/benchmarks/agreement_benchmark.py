import time

from rfw2s import ExperimentConfig, RidgeConfig, monte_carlo, student_equivalent
from rfw2s.spectrum import make_power_law_spectrum, make_power_law_target

# --- CONFIGURATION ---
ALPHA = 1.5
R = 0.75
D = 2000
TAU = 0.3
REPLICATES = 20
WORKERS = 4
RANDOM_SEED = 42
TEACHER = RidgeConfig(n=400, p=600, lam=1e-3)
STUDENT_WIDTHS = (200, 600, 1200)
STUDENT_SAMPLES = 400
STUDENT_LAMBDA = 2e-3

TEACHER_REL_TOL = 0.05
STUDENT_REL_TOL = 0.10


class Color:
    GREEN = "\033[92m"
    RED = "\033[91m"
    YELLOW = "\033[93m"
    RESET = "\033[0m"
    BOLD = "\033[1m"


def agrees(mean, stderr, equiv, rel_tol):
    gap = abs(mean - equiv)
    return gap <= 3 * stderr and gap <= rel_tol * equiv


# -----------------------------------------------------------------------------
# ONE POINT: deterministic equivalent vs Monte Carlo
# -----------------------------------------------------------------------------
def run_point(spectrum, beta, p_s):
    student = RidgeConfig(n=STUDENT_SAMPLES, p=p_s, lam=STUDENT_LAMBDA)
    cfg = ExperimentConfig(
        spectrum=spectrum,
        beta=beta,
        teacher=TEACHER,
        tau=TAU,
        student=student,
        seed=RANDOM_SEED,
        replicates=REPLICATES,
        workers=WORKERS,
    )

    started = time.perf_counter()
    equiv = student_equivalent(spectrum, beta, TEACHER, TAU, student)
    equiv_seconds = time.perf_counter() - started

    started = time.perf_counter()
    summary = monte_carlo(cfg)
    mc_seconds = time.perf_counter() - started

    return equiv, summary, equiv_seconds, mc_seconds


# -----------------------------------------------------------------------------
# REPORTING
# -----------------------------------------------------------------------------
def print_results():
    spectrum = make_power_law_spectrum(ALPHA, D)
    beta = make_power_law_target(ALPHA, R, D)

    print(f"\n{Color.BOLD}📊 AGREEMENT BENCHMARK (d={D}, alpha={ALPHA}, r={R}, {REPLICATES} replicates){Color.RESET}")
    print("=" * 92)
    print(f"{'p_s':<6} | {'R_t equiv':<12} | {'R_t MC':<20} | {'R_s equiv':<12} | {'R_s MC':<20} | {'time':<8}")
    print("-" * 92)

    failures = 0
    for p_s in STUDENT_WIDTHS:
        equiv, summary, equiv_seconds, mc_seconds = run_point(spectrum, beta, p_s)
        teacher_ok = agrees(summary.teacher.mean, summary.teacher.stderr, equiv.teacher.risk, TEACHER_REL_TOL)
        student_ok = agrees(summary.student.mean, summary.student.stderr, equiv.risk, STUDENT_REL_TOL)
        failures += (not teacher_ok) + (not student_ok)

        t_color = Color.GREEN if teacher_ok else Color.RED
        s_color = Color.GREEN if student_ok else Color.RED
        t_mc = f"{summary.teacher.mean:.4e} ± {summary.teacher.stderr:.1e}"
        s_mc = f"{summary.student.mean:.4e} ± {summary.student.stderr:.1e}"
        print(
            f"{p_s:<6} | {equiv.teacher.risk:<12.4e} | {t_color}{t_mc:<20}{Color.RESET} | "
            f"{equiv.risk:<12.4e} | {s_color}{s_mc:<20}{Color.RESET} | {mc_seconds:.1f}s"
        )
        print(f"{'':<6}   {Color.YELLOW}equivalents in {equiv_seconds * 1000:.1f} ms{Color.RESET}")
    print("=" * 92)

    if failures == 0:
        print(f"\n{Color.GREEN}🏆 Monte Carlo matches the deterministic equivalents at every point.{Color.RESET}")
    else:
        print(f"\n{Color.RED}❌ {failures} comparisons fell outside the agreement band.{Color.RESET}")


if __name__ == "__main__":
    print_results()
