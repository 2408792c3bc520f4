import numpy as np
import pytest

from rfw2s import (
    ConvergenceError,
    InvalidParameter,
    RidgeConfig,
    Role,
    ScalingParams,
    Spectrum,
    asymptotic_fixed_point,
    solve_fixed_point,
    solve_fixed_point_scalar,
)
from rfw2s.fixed_point import fixed_point_residuals
from rfw2s.functionals import upsilon
from rfw2s.scaling_laws import fit_log_slope
from rfw2s.spectrum import default_truncation, make_flat_spectrum, make_power_law_spectrum, weighted_trace


def cubic_root() -> float:
    """Positive root of 4x³ + 2x² − 3x − 2, the d=1, n=p=2, λ=1 fixed point."""
    roots = np.roots([4.0, 2.0, -3.0, -2.0])
    real = [r.real for r in roots if abs(r.imag) < 1e-12 and r.real > 0]
    assert len(real) == 1
    return float(real[0])


@pytest.fixture
def flat():
    return make_flat_spectrum(1.0, 1), RidgeConfig(n=2, p=2, lam=1.0)


def test_scalar_route_matches_cubic_oracle(flat):
    spec, cfg = flat
    mu2 = cubic_root()

    fp = solve_fixed_point_scalar(spec, cfg)

    assert fp.mu2 == pytest.approx(mu2, abs=1e-10)
    assert fp.mu1 == pytest.approx(mu2 * (1 - 1 / (2 * (1 + mu2))), abs=1e-10)
    assert fp.mu2 == pytest.approx(0.9156, abs=1e-3)
    assert fp.mu1 == pytest.approx(0.676, abs=1e-3)
    assert fp.t1 == pytest.approx(1 / (1 + mu2), abs=1e-10)


def test_two_equation_route_matches_cubic_oracle(flat):
    spec, cfg = flat

    fp = solve_fixed_point(spec, cfg)

    assert fp.mu2 == pytest.approx(cubic_root(), abs=1e-10)


def test_residuals_vanish_at_solution_and_change_sign(flat):
    spec, cfg = flat
    fp = solve_fixed_point_scalar(spec, cfg)

    r1, r2 = fixed_point_residuals(spec, cfg, fp.mu1, fp.mu2)
    assert abs(r1) < 1e-10
    assert abs(r2) < 1e-10

    r1, _ = fixed_point_residuals(spec, cfg, fp.mu1, 1.1 * fp.mu2)
    assert r1 > 0
    r1, _ = fixed_point_residuals(spec, cfg, fp.mu1, 0.9 * fp.mu2)
    assert r1 < 0


def grid_oracle(spec, cfg) -> float:
    """Coarse log-grid scan followed by plain bisection on F(μ) − λ, where F is increasing."""
    n, p, lam = cfg.n, cfg.p, cfg.lam

    def excess(mu):
        t1 = weighted_trace(spec, None, 1, 1, mu)
        return mu * (1 - t1 / p) * (n - t1) - lam

    grid = np.logspace(-14, 3, 400)
    values = [excess(mu) for mu in grid]
    # last sign change: below the critical shift both factors can be negative
    idx = max(i for i in range(len(grid) - 1) if values[i] < 0 <= values[i + 1])
    lo, hi = grid[idx], grid[idx + 1]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if excess(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_power_law_case_matches_grid_oracle():
    spec = make_power_law_spectrum(2.0, 2000)
    cfg = RidgeConfig(n=100, p=200, lam=1e-2)

    fp = solve_fixed_point_scalar(spec, cfg)

    assert fp.mu2 == pytest.approx(grid_oracle(spec, cfg), rel=1e-8)


def test_identities_and_route_agreement_over_random_configurations():
    rng = np.random.default_rng(7)
    for _ in range(200):
        alpha = rng.uniform(1.1, 3.0)
        n = int(10 ** rng.uniform(1, 4))
        p = int(10 ** rng.uniform(1, 4))
        lam = float(10 ** rng.uniform(-6, 2))
        d = default_truncation(alpha, n, p, tail_tol=0.5)
        spec = make_power_law_spectrum(alpha, d)
        cfg = RidgeConfig(n=n, p=p, lam=lam)

        fp = solve_fixed_point_scalar(spec, cfg)
        other = solve_fixed_point(spec, cfg)
        r1, r2 = fixed_point_residuals(spec, cfg, fp.mu1, fp.mu2)

        assert abs(r1) <= 1e-10 * (1 + 2 * fp.t1 / p)
        assert abs(r2) <= 1e-10 * (1 + 2 * fp.mu1 / fp.mu2)
        # 1 - T1/p and n - T1 may both be tiny, so each identity is measured against its largest term
        assert abs(fp.mu1 - fp.mu2 * (1 - fp.t1 / p)) <= 1e-10 * fp.mu2
        assert abs(fp.mu1 * (n - fp.t1) - lam) <= 1e-10 * max(lam, fp.mu1 * n)
        assert other.mu2 == pytest.approx(fp.mu2, rel=1e-11)
        assert other.mu1 == pytest.approx(fp.mu1, rel=1e-11)
        assert 0 < fp.mu1 <= fp.mu2


def test_mu1_stays_accurate_when_trace_approaches_n():
    spec = make_power_law_spectrum(1.276, default_truncation(1.276, 98, 6514, tail_tol=0.5))
    cfg = RidgeConfig(n=98, p=6514, lam=1.84e-6)

    fp = solve_fixed_point_scalar(spec, cfg)
    other = solve_fixed_point(spec, cfg)
    r1, r2 = fixed_point_residuals(spec, cfg, fp.mu1, fp.mu2)

    assert cfg.n - fp.t1 < 1e-2
    assert abs(r1) <= 1e-10
    assert abs(r2) <= 1e-10
    assert fp.mu1 == pytest.approx(fp.mu2 * (1 - fp.t1 / cfg.p), rel=1e-10)
    assert other.mu1 == pytest.approx(fp.mu1, rel=1e-11)


def test_mu2_increases_with_lambda_and_decreases_with_n():
    spec = make_power_law_spectrum(2.0, 2000)

    by_lambda = [
        solve_fixed_point_scalar(spec, RidgeConfig(n=100, p=200, lam=float(lam))).mu2 for lam in np.logspace(-5, 1, 10)
    ]
    by_n = [
        solve_fixed_point_scalar(spec, RidgeConfig(n=int(n), p=200, lam=1e-2)).mu2 for n in np.geomspace(20, 2000, 10)
    ]

    assert all(a < b for a, b in zip(by_lambda, by_lambda[1:]))
    assert all(a > b for a, b in zip(by_n, by_n[1:]))


@pytest.mark.parametrize("c", [0.1, 7.0, 100.0])
def test_scale_equivariance(c):
    spec = make_power_law_spectrum(1.5, 3000)
    scaled = Spectrum(c * spec.eigenvalues)

    fp = solve_fixed_point_scalar(spec, RidgeConfig(n=150, p=90, lam=3e-3))
    fp_scaled = solve_fixed_point_scalar(scaled, RidgeConfig(n=150, p=90, lam=c * 3e-3))

    assert fp_scaled.mu2 == pytest.approx(c * fp.mu2, rel=1e-9)
    assert fp_scaled.mu1 == pytest.approx(c * fp.mu1, rel=1e-9)
    assert fp_scaled.t1 == pytest.approx(fp.t1, rel=1e-9)


def test_small_lambda_slope_below_the_interpolation_threshold():
    # d = 5 < min(n, p): mu2 ~ lam / ((1 - d/p)(n - d)) = 0.08 lam
    spec = make_power_law_spectrum(2.0, 5)

    for lam in (1e-6, 1e-7):
        fp = solve_fixed_point_scalar(spec, RidgeConfig(n=30, p=10, lam=lam))
        assert fp.mu2 / lam == pytest.approx(0.08, rel=1e-5)


def test_dominant_lambda_asymptote():
    spec = make_power_law_spectrum(2.0, 100)

    fp = solve_fixed_point_scalar(spec, RidgeConfig(n=10, p=10, lam=1e6))

    assert fp.mu2 == pytest.approx(1e5, rel=1e-2)
    assert fp.mu1 / fp.mu2 == pytest.approx(1.0, rel=1e-2)


def test_bracket_expansion_for_single_sample():
    spec = make_power_law_spectrum(2.0, 100)
    cfg = RidgeConfig(n=1, p=1, lam=10.0)

    fp = solve_fixed_point_scalar(spec, cfg)

    assert fp.mu2 * (1 - fp.t1) ** 2 == pytest.approx(10.0, rel=1e-9)


def test_tolerance_is_validated(flat):
    spec, cfg = flat

    with pytest.raises(InvalidParameter, match="tol"):
        solve_fixed_point_scalar(spec, cfg, tol=1e-3)


def test_iteration_cap_surfaces_as_convergence_error():
    spec = make_power_law_spectrum(2.0, 5000)
    cfg = RidgeConfig(n=50, p=50, lam=1e-8)

    with pytest.raises(ConvergenceError):
        solve_fixed_point_scalar(spec, cfg, max_iter=2)


def test_asymptotic_teacher_slopes():
    scaling = ScalingParams(alpha=2, r=1, gamma_pt=1.2, gamma_lt=0.5, gamma_ns=1, gamma_ps=1, gamma_ls=0)

    slopes = asymptotic_fixed_point(scaling, Role.TEACHER)

    assert slopes.z == pytest.approx(0.75)
    assert slopes.slope_mu2 == pytest.approx(-1.5)
    assert slopes.slope_upsilon == pytest.approx(-0.25)


def test_asymptotic_teacher_saturates_at_full_resolution():
    scaling = ScalingParams(alpha=2, r=1, gamma_pt=1.0, gamma_lt=50.0, gamma_ns=1, gamma_ps=1, gamma_ls=0)

    slopes = asymptotic_fixed_point(scaling)

    assert slopes.z == 1.0
    assert slopes.slope_mu2 == -2.0


def test_asymptotic_student_slopes():
    scaling = ScalingParams(alpha=2, r=1, gamma_pt=1, gamma_lt=0, gamma_ns=0.2, gamma_ps=1, gamma_ls=0.2)

    slopes = asymptotic_fixed_point(scaling, Role.STUDENT)

    assert slopes.z == pytest.approx(0.2)
    assert slopes.slope_mu2 == pytest.approx(-0.4)
    assert slopes.slope_upsilon == pytest.approx(0.0)


def test_asymptotic_rejects_unstable_scalings():
    scaling = ScalingParams(alpha=2, r=1, gamma_pt=1, gamma_lt=-1.5, gamma_ns=1, gamma_ps=1, gamma_ls=0)

    with pytest.raises(InvalidParameter, match="stable"):
        asymptotic_fixed_point(scaling)


def test_fitted_fixed_point_slopes_follow_asymptotics():
    alpha, gamma_lt, gamma_pt = 2.0, 0.5, 1.2
    ladder = [2**k for k in range(12, 19)]
    p_max = round(ladder[-1] ** gamma_pt)
    spec = make_power_law_spectrum(alpha, default_truncation(alpha, ladder[-1], p_max))

    mu2s, upsilons = [], []
    for n in ladder:
        cfg = RidgeConfig(n=n, p=round(n**gamma_pt), lam=n**-gamma_lt)
        fp = solve_fixed_point_scalar(spec, cfg)
        mu2s.append(fp.mu2)
        upsilons.append(upsilon(spec, None, cfg.n, cfg.p, fp))

    assert fit_log_slope(ladder, mu2s) == pytest.approx(-1.5, abs=0.05)
    assert fit_log_slope(ladder, upsilons) == pytest.approx(-0.25, abs=0.05)
