import numpy as np
import pytest

from rfw2s import (
    DiagOperator,
    DimensionMismatch,
    InvalidParameter,
    RegimeError,
    RidgeConfig,
    TargetCoefs,
    student_equivalent,
    student_error_budget,
    teacher_equivalent,
)
from rfw2s.det_equiv import assemble_student_lambda, equiv_report, student_lambda0, teacher_lambda_op
from rfw2s.spectrum import make_flat_spectrum, make_power_law_spectrum, make_power_law_target


def cubic_root() -> float:
    roots = np.roots([4.0, 2.0, -3.0, -2.0])
    return float(next(r.real for r in roots if abs(r.imag) < 1e-12 and r.real > 0))


def flat_oracle(tau: float) -> dict[str, float]:
    """Step-by-step evaluation of the teacher equivalent for ξ² = 1, n = p = 2, λ = 1, β* = (1)."""
    mu2 = cubic_root()
    mu1 = (1 + mu2) / (1 + 2 * mu2)
    shift = 1 + mu2
    ups = 0.5 * (1 / shift - mu1 / shift**2 / (1 - 0.5 / shift**2))
    chi = (1 / shift**2) / (2 - 1 / shift**2)
    bias = mu2**2 / (1 - ups) * (1 + chi) / shift**2
    variance = tau**2 * ups / (1 - ups)
    return {"mu1": mu1, "mu2": mu2, "upsilon": ups, "chi": chi, "bias": bias, "variance": variance}


@pytest.fixture
def power_law():
    spec = make_power_law_spectrum(1.5, 2000)
    beta = make_power_law_target(1.5, 0.75, 2000)
    return spec, beta


def test_teacher_equivalent_single_eigenvalue():
    spec = make_flat_spectrum(1.0, 1)
    oracle = flat_oracle(tau=1.0)

    teacher = teacher_equivalent(spec, TargetCoefs([1.0]), RidgeConfig(n=2, p=2, lam=1.0), 1.0)

    assert teacher.fixed_point.mu2 == pytest.approx(oracle["mu2"], rel=1e-9)
    assert teacher.fixed_point.mu1 == pytest.approx(oracle["mu1"], rel=1e-9)
    assert teacher.upsilon_t == pytest.approx(oracle["upsilon"], rel=1e-9)
    assert teacher.chi_t == pytest.approx(oracle["chi"], rel=1e-9)
    assert teacher.bias == pytest.approx(oracle["bias"], rel=1e-9)
    assert teacher.variance == pytest.approx(oracle["variance"], rel=1e-9)
    assert teacher.risk == pytest.approx(oracle["bias"] + oracle["variance"], rel=1e-9)


def test_noiseless_teacher_has_no_variance(power_law):
    spec, beta = power_law

    teacher = teacher_equivalent(spec, beta, RidgeConfig(n=400, p=600, lam=1e-3), 0.0)

    assert teacher.variance == 0.0
    assert teacher.risk == teacher.bias > 0


def test_student_lambda0_single_eigenvalue():
    spec = make_flat_spectrum(1.0, 1)
    oracle = flat_oracle(tau=0.0)

    lambda0, context = student_lambda0(spec, RidgeConfig(n=2, p=2, lam=1.0))

    mu, ups, chi = oracle["mu2"], oracle["upsilon"], oracle["chi"]
    expected = (1 + (ups + chi) / (1 - ups) * mu**2) / (1 + mu) ** 2
    assert lambda0.entries[0] == pytest.approx(expected, rel=1e-9)
    assert context.upsilon_s == pytest.approx(ups, rel=1e-9)


def test_student_lambda_with_identity_lambda0_is_teacher_lambda(power_law):
    spec, beta = power_law
    teacher = teacher_equivalent(spec, beta, RidgeConfig(n=300, p=500, lam=1e-2), 0.5)

    collapsed = assemble_student_lambda(
        spec,
        DiagOperator.identity(spec.d),
        0.0,
        teacher.fixed_point.mu2,
        teacher.upsilon_t,
        teacher.chi_t,
        teacher.upsilon_t,
        teacher.chi_t,
    )
    direct = teacher_lambda_op(spec, teacher.fixed_point, teacher.upsilon_t, teacher.chi_t)

    assert np.allclose(collapsed.entries, direct.entries, rtol=1e-12, atol=1e-12)


def test_perfect_student_recovers_teacher():
    rng = np.random.default_rng(11)
    perfect = RidgeConfig(n=10**8, p=10**8, lam=1e-12)
    for _ in range(20):
        alpha = rng.uniform(1.2, 2.5)
        spec = make_power_law_spectrum(alpha, 1000)
        beta = make_power_law_target(alpha, rng.uniform(0.3, 1.5), 1000)
        n_t, p_t = int(rng.integers(50, 500)), int(rng.integers(50, 800))
        cfg_t = RidgeConfig(n=n_t, p=p_t, lam=float(10 ** rng.uniform(-4, -1)))
        tau = float(rng.uniform(0.0, 1.0))

        student = student_equivalent(spec, beta, cfg_t, tau, perfect)

        assert student.risk == pytest.approx(student.teacher.risk, rel=1e-3)


def test_student_equivalent_reuses_teacher(power_law):
    spec, beta = power_law
    cfg_t = RidgeConfig(n=400, p=600, lam=1e-3)
    cfg_s = RidgeConfig(n=400, p=200, lam=2e-3)
    teacher = teacher_equivalent(spec, beta, cfg_t, 0.3)

    reused = student_equivalent(spec, beta, cfg_t, 0.3, cfg_s, teacher=teacher)
    fresh = student_equivalent(spec, beta, cfg_t, 0.3, cfg_s)

    assert reused.teacher is teacher
    assert reused.risk == pytest.approx(fresh.risk, rel=1e-12)
    assert reused.risk == pytest.approx(reused.bias_from_bias + reused.bias_from_var)
    assert reused.bias_from_bias > 0
    assert reused.bias_from_var > 0
    assert np.all(reused.lambda_op.entries >= 0)


def test_student_variance_term_scales_with_teacher_noise(power_law):
    spec, beta = power_law
    cfg_t = RidgeConfig(n=200, p=300, lam=1e-3)
    cfg_s = RidgeConfig(n=200, p=300, lam=1e-3)

    quiet = student_equivalent(spec, beta, cfg_t, 0.5, cfg_s)
    loud = student_equivalent(spec, beta, cfg_t, 1.0, cfg_s)

    assert loud.bias_from_var == pytest.approx(4 * quiet.bias_from_var, rel=1e-12)
    assert loud.bias_from_bias == pytest.approx(quiet.bias_from_bias, rel=1e-12)


def test_regime_error_when_upsilon_reaches_one(monkeypatch, power_law):
    spec, beta = power_law
    monkeypatch.setattr("rfw2s.det_equiv.upsilon", lambda *args: 1.0)

    with pytest.raises(RegimeError, match="Upsilon_t"):
        teacher_equivalent(spec, beta, RidgeConfig(n=100, p=100, lam=1e-2), 1.0)


def test_input_validation(power_law):
    spec, beta = power_law
    cfg = RidgeConfig(n=100, p=100, lam=1e-2)

    with pytest.raises(DimensionMismatch):
        teacher_equivalent(spec, TargetCoefs([1.0, 0.5]), cfg, 1.0)
    with pytest.raises(InvalidParameter, match="tau_t"):
        teacher_equivalent(spec, beta, cfg, -1.0)


def test_equiv_report_keys(power_law):
    spec, beta = power_law
    cfg = RidgeConfig(n=100, p=150, lam=1e-2)
    student = student_equivalent(spec, beta, cfg, 0.3, cfg)

    teacher_only = equiv_report(student.teacher)
    full = equiv_report(student.teacher, student)

    assert list(teacher_only) == ["mu_t1", "mu_t2", "upsilon_t", "chi_t", "bias_t", "var_t", "risk_t"]
    assert list(full)[7:] == [
        "mu_s1",
        "mu_s2",
        "upsilon_s",
        "chi_s",
        "upsilon_t_lambda0",
        "chi_t_lambda0",
        "bias_bias_s",
        "bias_var_s",
        "risk_s",
    ]
    assert full["risk_s"] == student.risk


def test_error_budget_is_positive(power_law):
    spec, beta = power_law
    cfg = RidgeConfig(n=100, p=150, lam=1e-2)

    deterministic = student_error_budget(spec, beta, (0.0, 0.0), cfg, cfg)
    with_run = student_error_budget(spec, beta, (1.0, 0.5), cfg, cfg)

    assert deterministic >= beta.norm**2
    assert with_run == pytest.approx(deterministic + 0.5)
    with pytest.raises(InvalidParameter):
        student_error_budget(spec, beta, (-1.0, 0.0), cfg, cfg)


def test_assemble_student_lambda_validation(power_law):
    spec, _ = power_law

    with pytest.raises(DimensionMismatch):
        assemble_student_lambda(spec, DiagOperator.identity(3), 0.0, 0.1, 0.2, 0.1, 0.2, 0.1)
    with pytest.raises(InvalidParameter, match="mu_s2"):
        assemble_student_lambda(spec, DiagOperator.identity(spec.d), -1.0, 0.1, 0.2, 0.1, 0.2, 0.1)
