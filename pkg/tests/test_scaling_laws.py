import numpy as np
import pytest

from rfw2s import (
    Branch,
    InvalidParameter,
    Region,
    ScalingParams,
    TauOrder,
    classify_w2sg,
    exponent_report,
    student_exponents,
    teacher_exponents,
)
from rfw2s.scaling_laws import (
    REGION_COLUMNS,
    achieves_optimal_student,
    fit_log_slope,
    optimal_exponents,
    optimal_teacher_scaling,
    region_sweep,
    stable_check,
    student_regularization_window,
    z_exponents,
)


def params(**overrides) -> ScalingParams:
    values = {
        "alpha": 2.0,
        "r": 1.0,
        "gamma_pt": 1.0,
        "gamma_lt": 0.0,
        "gamma_ns": 0.2,
        "gamma_ps": 1.0,
        "gamma_ls": 0.2,
    }
    values.update(overrides)
    return ScalingParams(**values)


@pytest.fixture
def variance_example():
    return params()


@pytest.fixture
def bias_example():
    return params(tau_order=TauOrder.ZERO, gamma_pt=0.4, gamma_lt=-0.4, gamma_ns=0.25, gamma_ls=0.25, gamma_ps=0.6)


def test_teacher_exponents():
    p = params(gamma_pt=2.0, gamma_lt=-0.5)

    assert z_exponents(p)[0] == pytest.approx(0.25)
    assert teacher_exponents(p) == pytest.approx((1.0, 0.75))


def test_student_exponents_variance_example(variance_example):
    gamma_bias, gamma_var, branch = student_exponents(variance_example)

    assert branch == Branch.TEACHER_RESOLVES_MORE
    assert gamma_bias == pytest.approx(0.8)
    assert gamma_var == pytest.approx(0.8)


def test_student_exponents_tie_uses_first_branch():
    # z_t = z_s = 0.5
    p = params(gamma_lt=0.0, gamma_ns=0.5, gamma_ls=0.5, gamma_ps=1.0)

    _, _, branch = student_exponents(p)

    assert branch == Branch.TEACHER_RESOLVES_LESS


def test_variance_dominated_region(variance_example):
    report = exponent_report(variance_example)

    assert report.z_t == pytest.approx(0.5)
    assert report.z_s == pytest.approx(0.2)
    assert report.teacher_exponent == pytest.approx(0.5)
    assert report.student_exponent == pytest.approx(0.8)
    assert report.region == Region.VARIANCE_W2SG
    assert not report.boundary
    assert all(w.holds for w in report.witnesses)


def test_variance_example_branch_terms(variance_example):
    alpha, z_t, z_s = 2.0, 0.5, 0.2
    terms = [
        4 * z_s,
        2 * z_s - z_s + 1.0,
        2 * z_t + alpha * (z_t - z_s) - z_s + 1.0,
        2 * z_t - z_t + 1 - z_s + 1.0,
    ]

    assert terms == pytest.approx([0.8, 1.2, 2.4, 2.3])
    assert student_exponents(variance_example)[0] == pytest.approx(min(terms))


def test_bias_dominated_region(bias_example):
    report = exponent_report(bias_example)

    assert report.z_t == pytest.approx(0.3)
    assert report.z_s == pytest.approx(0.25)
    assert report.gamma_tB == pytest.approx(0.7)
    assert report.gamma_tV == pytest.approx(0.7)
    assert report.teacher_exponent == pytest.approx(0.7)
    assert report.gamma_s_bias == pytest.approx(0.85)
    assert report.gamma_s_var == pytest.approx(0.75)
    assert report.student_exponent == pytest.approx(0.75)
    assert report.region == Region.BIAS_W2SG
    assert not report.boundary


def test_noiseless_teacher_skips_the_variance_characterization(variance_example):
    noiseless = variance_example.model_copy(update={"tau_order": TauOrder.ZERO})

    region, witnesses = classify_w2sg(noiseless)
    names = [w.name for w in witnesses]

    assert region == Region.NONE
    assert "z_t > 1/(1+2a(r^1))" not in names
    assert "z_s > (1-z_t)/(2a(r^1))" not in names
    assert "g_pt < 1 - 2a(r^1/2)/(1+2a(r^1))" in names


def test_noiseless_teacher_never_reaches_the_variance_region():
    rng = np.random.default_rng(11)
    for _ in range(300):
        p = params(
            tau_order=TauOrder.ZERO,
            gamma_pt=rng.uniform(0.1, 2.0),
            gamma_lt=rng.uniform(-1.0, 1.0),
            gamma_ns=rng.uniform(0.1, 1.0),
            gamma_ls=rng.uniform(-0.1, 1.0),
            gamma_ps=rng.uniform(0.1, 2.0),
        )
        region, _ = classify_w2sg(p)
        assert region != Region.VARIANCE_W2SG


def test_no_improvement_without_more_teacher_resolution():
    p = params(gamma_ns=1.0, gamma_ls=0.5, gamma_ps=1.0)

    region, witnesses = classify_w2sg(p)

    assert region == Region.NONE
    assert witnesses[0].name == "z_t > z_s"
    assert not witnesses[0].holds


def test_theta_one_noise_adds_variance_witness(bias_example):
    noisy = bias_example.model_copy(update={"tau_order": TauOrder.THETA_ONE})

    _, witnesses = classify_w2sg(noisy)

    assert "g_tV >= g_tB" in [w.name for w in witnesses]


def test_classification_requires_stability():
    with pytest.raises(InvalidParameter, match="stable"):
        classify_w2sg(params(gamma_lt=-1.5))


def test_stable_check():
    assert stable_check(params(gamma_lt=-1.0))
    assert not stable_check(params(gamma_ls=-0.21))
    assert stable_check(params(gamma_ls=-0.2))


def test_optimal_exponents():
    assert optimal_exponents(2.0, 1.0) == pytest.approx((0.8, 0.8, 0.8))
    assert optimal_exponents(2.0, 0.5)[0] == pytest.approx(2 / 3)

    best, student_best, minimax = optimal_exponents(2.0, 2.0)
    assert best == student_best == pytest.approx(0.8)
    assert minimax == pytest.approx(8 / 9)
    assert best < minimax

    with pytest.raises(InvalidParameter):
        optimal_exponents(1.0, 1.0)
    with pytest.raises(InvalidParameter):
        optimal_exponents(2.0, 0.0)


def random_stable_params(rng: np.random.Generator) -> ScalingParams:
    gamma_ns = rng.uniform(0.05, 2.0)
    return ScalingParams(
        alpha=rng.uniform(1.1, 3.0),
        r=rng.uniform(0.1, 2.0),
        gamma_pt=rng.uniform(0.05, 2.0),
        gamma_lt=rng.uniform(-1.0, 1.5),
        gamma_ns=gamma_ns,
        gamma_ps=rng.uniform(0.05, 2.0),
        gamma_ls=rng.uniform(-gamma_ns, 1.5),
    )


def test_no_scaling_beats_the_optimal_exponent():
    rng = np.random.default_rng(21)
    for _ in range(2000):
        p = random_stable_params(rng)
        best, _, _ = optimal_exponents(p.alpha, p.r)

        report = exponent_report(p)

        assert report.teacher_exponent <= best + 1e-12
        assert report.student_exponent <= best + 1e-12


def test_region_matches_strict_exponent_improvement():
    rng = np.random.default_rng(2024)
    checked = 0
    for _ in range(10_000):
        p = random_stable_params(rng)
        report = exponent_report(p)
        gap = report.student_exponent - report.teacher_exponent
        if abs(gap) <= 1e-6 or any(abs(w.margin) <= 1e-6 for w in report.witnesses):
            continue
        checked += 1

        assert (report.region != Region.NONE) == (gap > 0), p

    assert checked > 1000


def test_optimal_teacher_scaling_attains_best_exponent():
    for alpha, r in [(2.0, 1.0), (1.5, 0.4), (3.0, 2.0)]:
        gamma_lt, gamma_pt = optimal_teacher_scaling(alpha, r)
        p = params(alpha=alpha, r=r, gamma_lt=gamma_lt, gamma_pt=gamma_pt)

        best, _, _ = optimal_exponents(alpha, r)

        assert min(teacher_exponents(p)) == pytest.approx(best)
    assert optimal_teacher_scaling(2.0, 1.0) == pytest.approx((-0.6, 0.6))


def test_student_reaches_optimum_when_teacher_resolves_more():
    rng = np.random.default_rng(5)
    for _ in range(50):
        alpha, r = rng.uniform(1.2, 3.0), rng.uniform(0.2, 1.5)
        z_star = 1 / (1 + 2 * alpha * min(r, 1))
        z_t = rng.uniform(z_star + 0.01, 1.0)
        p = params(
            alpha=alpha, r=r, gamma_lt=alpha * z_t - 1, gamma_pt=3.0, gamma_ns=z_star, gamma_ls=alpha, gamma_ps=3.0
        )
        best, _, _ = optimal_exponents(alpha, r)

        assert achieves_optimal_student(p) == 2
        assert exponent_report(p).student_exponent == pytest.approx(best)


def test_student_reaches_optimum_when_teacher_resolves_less():
    rng = np.random.default_rng(6)
    for _ in range(50):
        alpha, r = rng.uniform(1.2, 3.0), rng.uniform(0.2, 1.5)
        z_star = 1 / (1 + 2 * alpha * min(r, 1))
        p = params(
            alpha=alpha, r=r, gamma_lt=alpha * z_star - 1, gamma_pt=3.0, gamma_ns=3.0, gamma_ls=0.0, gamma_ps=3.0
        )
        best, _, _ = optimal_exponents(alpha, r)

        assert achieves_optimal_student(p) == 1
        assert exponent_report(p).student_exponent == pytest.approx(best)


def test_suboptimal_student_is_not_flagged(variance_example):
    assert achieves_optimal_student(params(gamma_ns=0.5, gamma_ls=0.5)) is None
    # z_s = 0.2 = z* but the student width is too small
    assert achieves_optimal_student(variance_example.model_copy(update={"gamma_ps": 0.5})) is None


def test_student_regularization_window():
    window = student_regularization_window(params(gamma_ns=1.0))

    assert window == pytest.approx((-0.75, 0.0))
    assert student_regularization_window(params(gamma_ns=0.4)) is None


def test_fit_log_slope():
    xs = [1.0, 2.0, 4.0, 8.0, 16.0]

    assert fit_log_slope(xs, [3.0 * x**2 for x in xs]) == pytest.approx(2.0, abs=1e-12)
    assert fit_log_slope(xs, [5.0] * 5) == pytest.approx(0.0, abs=1e-12)

    rng = np.random.default_rng(1)
    grid = np.logspace(1, 5, 40)
    noisy = grid**-0.8 * np.exp(rng.normal(0.0, 0.05, grid.size))
    assert fit_log_slope(grid, noisy) == pytest.approx(-0.8, abs=0.02)


def test_fit_log_slope_validation():
    with pytest.raises(InvalidParameter, match="at least 3"):
        fit_log_slope([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(InvalidParameter, match="positive"):
        fit_log_slope([1.0, 2.0, 3.0], [1.0, 0.0, 2.0])
    with pytest.raises(InvalidParameter, match="equal length"):
        fit_log_slope([1.0, 2.0, 3.0], [1.0, 2.0])
    with pytest.raises(InvalidParameter, match="degenerate"):
        fit_log_slope([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])


def test_region_sweep(variance_example):
    rows = region_sweep(variance_example, [0.2], [0.2, -0.5], [1.0, 0.5])

    # gamma_ls = -0.5 < -gamma_ns is unstable and skipped
    assert len(rows) == 2
    assert all(tuple(row) == REGION_COLUMNS for row in rows)
    assert rows[0]["region"] == Region.VARIANCE_W2SG.value
    assert rows[0]["student_exponent"] == pytest.approx(0.8)


def test_region_sweep_binding_witness_for_no_improvement(variance_example):
    rows = region_sweep(variance_example, [1.0], [0.5], [1.0])

    assert rows[0]["region"] == "none"
    assert rows[0]["binding_witness"] == "z_t > z_s"


def test_region_sweep_rejects_invalid_grid(variance_example):
    with pytest.raises(InvalidParameter):
        region_sweep(variance_example, [0.0], [0.2], [1.0])
