"""
Command-line front end.

Subcommands share one flat settings schema (see RunSettings), loaded from a JSON file given
with --config and overridden by per-key flags. Reports go to --out (standard output by
default) as CSV or JSON.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np
from pydantic import ValidationError

from rfw2s.config import load_settings
from rfw2s.constants import DEFAULT_REPLICATES, OutputFormat, Quantity, Role, TauOrder
from rfw2s.det_equiv import equiv_report, student_equivalent, teacher_equivalent
from rfw2s.exceptions import (
    DimensionMismatch,
    HookError,
    InvalidParameter,
    NumericalError,
    ReportIOError,
    TruncationOverflow,
    W2SError,
)
from rfw2s.fixed_point import fixed_point_residuals, solve_fixed_point, solve_fixed_point_scalar
from rfw2s.functionals import (
    approximation_rate,
    assumption_ratios,
    intrinsic_dimension,
    rho_diagnostics,
    student_approximation_rate,
)
from rfw2s.scaling_laws import REGION_COLUMNS, exponent_report, fit_log_slope, optimal_exponents, region_sweep
from rfw2s.schemas import ExperimentConfig, Report, RidgeConfig, RunSettings, Spectrum, SweepReport, SweepSpec
from rfw2s.simulator import monte_carlo
from rfw2s.sinks import ReportSink, emit_report, make_sink
from rfw2s.sinks.csv import CsvRunLog
from rfw2s.spectrum import default_truncation, make_power_law_spectrum, make_power_law_target

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4
EXIT_HOOK = 5

SWEEP_COLUMNS = ("n_t", "p_t", "lambda_t", "n_s", "p_s", "lambda_s", "d", "quantity", "value", "stderr")
FIXED_POINT_COLUMNS = (
    "role",
    "n",
    "p",
    "lambda",
    "d",
    "mu1",
    "mu2",
    "t1",
    "mu2_two_equation",
    "residual_1",
    "residual_2",
)
SIMULATE_COLUMNS = ("quantity", "mean", "std", "stderr", "replicates", "equiv")
DIAGNOSTIC_COLUMNS = (
    "role",
    "n",
    "p",
    "lambda",
    "mu1",
    "mu2",
    "rho",
    "rho_tilde",
    "m_sigma_n",
    "m_sigma_p",
    "r_sigma_n",
    "trace_ratio",
    "target_ratio",
    "approximation_rate",
)

_FLOAT_KEYS = (
    "alpha",
    "r",
    "gamma_pt",
    "gamma_lt",
    "gamma_ns",
    "gamma_ps",
    "gamma_ls",
    "tau",
    "nt_factor",
    "tail_tol",
    "eta_star",
    "tol",
    "lambda_t",
    "lambda_s",
    "c1",
)
_INT_KEYS = ("nt_start", "nt_count", "replicates", "seed", "d", "n_t", "p_t", "n_s", "p_s", "workers", "max_dimension")


def _scaled_count(n_t: int, gamma: float) -> int:
    return max(1, round(n_t**gamma))


def _ladder(spec: SweepSpec) -> list[int]:
    return [max(1, round(spec.nt_start * spec.nt_factor**i)) for i in range(spec.nt_count)]


def _sweep_dimension(spec: SweepSpec, ladder: list[int]) -> int:
    if spec.d is not None:
        return spec.d
    p = spec.params
    n_max = max(max(ladder), max(_scaled_count(n, p.gamma_ns) for n in ladder))
    p_max = max(max(_scaled_count(n, p.gamma_pt) for n in ladder), max(_scaled_count(n, p.gamma_ps) for n in ladder))
    return default_truncation(p.alpha, n_max, p_max, spec.tail_tol, spec.max_dimension)


def run_sweep(spec: SweepSpec, sink: ReportSink | None = None) -> SweepReport:
    """
    Evaluates teacher and student along a geometric ladder of teacher sample sizes.

    For each n_t the remaining resources follow the power laws of spec.params, with counts
    rounded to the nearest integer >= 1 (realized values are reported). Each point yields the
    deterministic equivalents, the theoretical decay lines anchored at the first point, the
    minimax reference line and, when replicates > 0, Monte-Carlo means with standard errors.

    Args:
        spec (SweepSpec): Ladder and scalings.
        sink (ReportSink | None): Destination of the rows; defaults to spec.out in spec.format.
            Rows computed so far are written even when a point fails.

    Returns:
        SweepReport: Rows keyed by SWEEP_COLUMNS and fitted slopes of the equivalents.

    Raises:
        InvalidParameter: On unstable scalings.
        NumericalError: Propagated from the solvers; earlier rows are flushed first.
    """
    p = spec.params
    report_exponents = exponent_report(p)
    _, _, minimax = optimal_exponents(p.alpha, p.r)
    ladder = _ladder(spec)
    d = _sweep_dimension(spec, ladder)
    spectrum = make_power_law_spectrum(p.alpha, d)
    beta = make_power_law_target(p.alpha, p.r, d)
    logger.info(
        "Sweep over %s points with d=%s: teacher exponent %.4f, student exponent %.4f, region %s",
        len(ladder),
        d,
        report_exponents.teacher_exponent,
        report_exponents.student_exponent,
        report_exponents.region.value,
    )

    if sink is None and spec.out is not None:
        sink = make_sink(spec.format, spec.out)
    report = SweepReport(columns=SWEEP_COLUMNS)
    anchors: dict[str, float] = {}
    try:
        for n_t in ladder:
            teacher_cfg = RidgeConfig(n=n_t, p=_scaled_count(n_t, p.gamma_pt), lam=float(n_t) ** (-p.gamma_lt))
            student_cfg = RidgeConfig(
                n=_scaled_count(n_t, p.gamma_ns), p=_scaled_count(n_t, p.gamma_ps), lam=float(n_t) ** (-p.gamma_ls)
            )
            base = {
                "n_t": teacher_cfg.n,
                "p_t": teacher_cfg.p,
                "lambda_t": teacher_cfg.lam,
                "n_s": student_cfg.n,
                "p_s": student_cfg.p,
                "lambda_s": student_cfg.lam,
                "d": d,
            }

            teacher = teacher_equivalent(spectrum, beta, teacher_cfg, spec.tau, spec.tol)
            student = student_equivalent(spectrum, beta, teacher_cfg, spec.tau, student_cfg, spec.tol, teacher)
            if not anchors:
                anchors = {"n_t": float(n_t), "teacher": teacher.risk, "student": student.risk}
            scale = n_t / anchors["n_t"]

            values = [
                (Quantity.TEACHER_EQUIV, teacher.risk, None),
                (Quantity.STUDENT_EQUIV, student.risk, None),
                (Quantity.TEACHER_THEORY, anchors["teacher"] * scale ** (-report_exponents.teacher_exponent), None),
                (Quantity.STUDENT_THEORY, anchors["student"] * scale ** (-report_exponents.student_exponent), None),
                (Quantity.MINIMAX, anchors["student"] * scale ** (-minimax), None),
            ]
            if spec.replicates:
                summary = monte_carlo(
                    ExperimentConfig(
                        spectrum=spectrum,
                        beta=beta,
                        teacher=teacher_cfg,
                        tau=spec.tau,
                        student=student_cfg,
                        seed=spec.seed,
                        replicates=spec.replicates,
                        workers=spec.workers,
                    )
                )
                values.append((Quantity.TEACHER_MC, summary.teacher.mean, summary.teacher.stderr))
                values.append((Quantity.STUDENT_MC, summary.student.mean, summary.student.stderr))

            for quantity, value, stderr in values:
                report.rows.append({**base, "quantity": quantity.value, "value": value, "stderr": stderr})
            logger.info("n_t=%s: R_t=%.6e R_s=%.6e", n_t, teacher.risk, student.risk)
    finally:
        if sink is not None:
            sink.write(report)

    report.slopes = _fit_slopes(report)
    return report


def _fit_slopes(report: SweepReport) -> dict[str, float]:
    slopes: dict[str, float] = {}
    for quantity in (Quantity.TEACHER_EQUIV, Quantity.STUDENT_EQUIV, Quantity.TEACHER_MC, Quantity.STUDENT_MC):
        rows = [row for row in report.rows if row["quantity"] == quantity.value]
        if len({row["n_t"] for row in rows}) < 3 or any(row["value"] <= 0 for row in rows):
            continue
        slopes[quantity.value] = fit_log_slope([row["n_t"] for row in rows], [row["value"] for row in rows])
        logger.info("Fitted slope of %s: %.4f", quantity.value, slopes[quantity.value])
    return slopes


def _single_point_spectrum(settings: RunSettings) -> tuple[Spectrum, int]:
    d = settings.d
    if d is None:
        d = default_truncation(
            settings.alpha,
            max(settings.n_t, settings.n_s),
            max(settings.p_t, settings.p_s),
            settings.tail_tol,
            settings.max_dimension,
        )
    return make_power_law_spectrum(settings.alpha, d), d


def cmd_fixed_point(args: argparse.Namespace, settings: RunSettings) -> Report:
    spectrum, d = _single_point_spectrum(settings)
    report = Report(columns=FIXED_POINT_COLUMNS)
    for role, cfg in ((Role.TEACHER, settings.teacher_config()), (Role.STUDENT, settings.student_config())):
        fp = solve_fixed_point_scalar(spectrum, cfg, settings.tol)
        two_equation = solve_fixed_point(spectrum, cfg, settings.tol)
        r1, r2 = fixed_point_residuals(spectrum, cfg, fp.mu1, fp.mu2)
        report.rows.append(
            {
                "role": role.value,
                "n": cfg.n,
                "p": cfg.p,
                "lambda": cfg.lam,
                "d": d,
                "mu1": fp.mu1,
                "mu2": fp.mu2,
                "t1": fp.t1,
                "mu2_two_equation": two_equation.mu2,
                "residual_1": r1,
                "residual_2": r2,
            }
        )
    return report


def cmd_equiv(args: argparse.Namespace, settings: RunSettings) -> Report:
    spectrum, _ = _single_point_spectrum(settings)
    beta = make_power_law_target(settings.alpha, settings.r, spectrum.d)
    teacher = teacher_equivalent(spectrum, beta, settings.teacher_config(), settings.tau, settings.tol)
    if Role(args.role) == Role.TEACHER:
        values = equiv_report(teacher)
    else:
        student = student_equivalent(
            spectrum, beta, settings.teacher_config(), settings.tau, settings.student_config(), settings.tol, teacher
        )
        values = equiv_report(teacher, student)
    return Report(columns=tuple(values), rows=[values])


def cmd_simulate(args: argparse.Namespace, settings: RunSettings) -> Report:
    spectrum, _ = _single_point_spectrum(settings)
    beta = make_power_law_target(settings.alpha, settings.r, spectrum.d)
    cfg = ExperimentConfig(
        spectrum=spectrum,
        beta=beta,
        teacher=settings.teacher_config(),
        tau=settings.tau,
        student=settings.student_config(),
        seed=settings.seed,
        replicates=settings.replicates or DEFAULT_REPLICATES,
        workers=settings.workers,
    )
    hooks = [CsvRunLog(args.run_log)] if args.run_log else []
    summary = monte_carlo(cfg, hooks=hooks)
    teacher = teacher_equivalent(spectrum, beta, cfg.teacher, cfg.tau, settings.tol)
    student = student_equivalent(spectrum, beta, cfg.teacher, cfg.tau, cfg.student, settings.tol, teacher)

    report = Report(columns=SIMULATE_COLUMNS)
    for quantity, stats, equiv in (
        (Quantity.TEACHER_MC, summary.teacher, teacher.risk),
        (Quantity.STUDENT_MC, summary.student, student.risk),
    ):
        report.rows.append(
            {
                "quantity": quantity.value,
                "mean": stats.mean,
                "std": stats.std,
                "stderr": stats.stderr,
                "replicates": stats.count,
                "equiv": equiv,
            }
        )
    return report


def cmd_sweep(args: argparse.Namespace, settings: RunSettings) -> None:
    spec = SweepSpec(
        params=settings.scaling_params(),
        tau=settings.tau,
        nt_start=settings.nt_start,
        nt_factor=settings.nt_factor,
        nt_count=settings.nt_count,
        replicates=settings.replicates,
        seed=settings.seed,
        d=settings.d,
        tail_tol=settings.tail_tol,
        max_dimension=settings.max_dimension,
        tol=settings.tol,
        workers=settings.workers,
        out=args.out,
        format=args.format,
    )
    run_sweep(spec, make_sink(args.format, args.out))


def parse_grid(text: str) -> list[float]:
    """
    Parses "start:stop:count" into count evenly spaced values, or a single number.

    Raises:
        InvalidParameter: On malformed input.
    """
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) == 3:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise ValueError("count must be >= 1")
            return [float(v) for v in np.linspace(start, stop, count)]
    except ValueError as e:
        raise InvalidParameter(f"invalid grid {text!r}: {e}") from e
    raise InvalidParameter(f"invalid grid {text!r}: expected start:stop:count")


def cmd_regions(args: argparse.Namespace, settings: RunSettings) -> Report:
    grid_ns = parse_grid(args.grid_ns) if args.grid_ns else [settings.gamma_ns]
    grid_ls = parse_grid(args.grid_ls) if args.grid_ls else [settings.gamma_ls]
    grid_ps = parse_grid(args.grid_ps) if args.grid_ps else [settings.gamma_ps]
    rows = region_sweep(settings.scaling_params(), grid_ns, grid_ls, grid_ps)
    return Report(columns=REGION_COLUMNS, rows=rows)


def cmd_diagnostics(args: argparse.Namespace, settings: RunSettings) -> Report:
    spectrum, _ = _single_point_spectrum(settings)
    beta = make_power_law_target(settings.alpha, settings.r, spectrum.d)
    report = Report(columns=DIAGNOSTIC_COLUMNS)
    stages = []
    for role, cfg in ((Role.TEACHER, settings.teacher_config()), (Role.STUDENT, settings.student_config())):
        fp = solve_fixed_point_scalar(spectrum, cfg, settings.tol)
        diag = rho_diagnostics(spectrum, cfg.n, cfg.p, cfg.lam, settings.eta_star, fp)
        stages.append((cfg, diag))
        trace_ratio, target_ratio = assumption_ratios(spectrum, beta, fp.mu2)
        if role == Role.TEACHER:
            rate = approximation_rate(diag, cfg.n, cfg.p, settings.c1)
        else:
            (cfg_t, diag_t), (cfg_s, diag_s) = stages
            rate = student_approximation_rate(diag_t, cfg_t.n, cfg_t.p, diag_s, cfg_s.n, cfg_s.p, settings.c1)
        report.rows.append(
            {
                "role": role.value,
                "n": cfg.n,
                "p": cfg.p,
                "lambda": cfg.lam,
                "mu1": fp.mu1,
                "mu2": fp.mu2,
                "rho": diag.rho,
                "rho_tilde": diag.rho_tilde,
                "m_sigma_n": diag.m_sigma(cfg.n),
                "m_sigma_p": diag.m_sigma(cfg.p),
                "r_sigma_n": intrinsic_dimension(spectrum, min(cfg.n, spectrum.d)),
                "trace_ratio": trace_ratio,
                "target_ratio": target_ratio,
                "approximation_rate": rate,
            }
        )
    return report


def _add_setting_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("settings", "override keys of the --config file")
    for key in _FLOAT_KEYS:
        group.add_argument(f"--{key.replace('_', '-')}", dest=key, type=float, default=None)
    for key in _INT_KEYS:
        group.add_argument(f"--{key.replace('_', '-')}", dest=key, type=int, default=None)
    group.add_argument("--tau-order", dest="tau_order", choices=[t.value for t in TauOrder], default=None)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="JSON file with a flat settings object")
    common.add_argument("--out", type=Path, default=None, help="report destination (default: stdout)")
    file_formats = [f.value for f in OutputFormat if f != OutputFormat.MEMORY]
    common.add_argument("--format", choices=file_formats, default=OutputFormat.CSV.value)
    common.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], default="WARNING")
    _add_setting_flags(common)

    parser = argparse.ArgumentParser(
        prog="rfw2s",
        description="Deterministic equivalents, Monte-Carlo checks and scaling laws for weak-to-strong "
        "random feature ridge regression.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fixed = sub.add_parser(
        "fixed-point",
        parents=[common],
        help="solve the self-consistent fixed points of teacher and student",
        description="CSV columns: " + ", ".join(FIXED_POINT_COLUMNS),
    )
    fixed.set_defaults(handler=cmd_fixed_point)

    equiv = sub.add_parser(
        "equiv",
        parents=[common],
        help="deterministic equivalents of the excess test error",
        description="Columns: mu_t1, mu_t2, upsilon_t, chi_t, bias_t, var_t, risk_t, and for the student "
        "also mu_s1, mu_s2, upsilon_s, chi_s, upsilon_t_lambda0, chi_t_lambda0, bias_bias_s, bias_var_s, risk_s",
    )
    equiv.add_argument("role", choices=[r.value for r in Role])
    equiv.set_defaults(handler=cmd_equiv)

    simulate = sub.add_parser(
        "simulate",
        parents=[common],
        help="Monte-Carlo teacher/student runs on the Gaussian linear model",
        description="CSV columns: " + ", ".join(SIMULATE_COLUMNS),
    )
    simulate.add_argument("--run-log", type=Path, default=None, help="append one CSV row per replicate")
    simulate.set_defaults(handler=cmd_simulate)

    sweep = sub.add_parser(
        "sweep",
        parents=[common],
        help="deterministic equivalents (and optional Monte Carlo) along an n_t ladder",
        description="CSV columns: " + ", ".join(SWEEP_COLUMNS),
    )
    sweep.set_defaults(handler=cmd_sweep)

    regions = sub.add_parser(
        "regions",
        parents=[common],
        help="classify weak-to-strong regions over a grid of student scalings",
        description="CSV columns: " + ", ".join(REGION_COLUMNS),
    )
    regions.add_argument("--grid-ns", default=None, help="gamma_ns grid as start:stop:count")
    regions.add_argument("--grid-ls", default=None, help="gamma_ls grid as start:stop:count")
    regions.add_argument("--grid-ps", default=None, help="gamma_ps grid as start:stop:count")
    regions.set_defaults(handler=cmd_regions)

    diagnostics = sub.add_parser(
        "diagnostics",
        parents=[common],
        help="spectrum regularity diagnostics (diagnostic only)",
        description="CSV columns: " + ", ".join(DIAGNOSTIC_COLUMNS),
    )
    diagnostics.set_defaults(handler=cmd_diagnostics)
    return parser


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    keys = (*_FLOAT_KEYS, *_INT_KEYS, "tau_order")
    return {key: getattr(args, key) for key in keys}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level, format=LOG_FORMAT)

    handler: Callable[[argparse.Namespace, RunSettings], Report | None] = args.handler
    try:
        settings = load_settings(args.config, _overrides(args))
        report = handler(args, settings)
        if report is not None:
            emit_report(report, args.format, args.out)
    except HookError as e:
        logger.error("Replicate hook failed: %s", e)
        return EXIT_HOOK
    except (InvalidParameter, DimensionMismatch, TruncationOverflow, ValidationError) as e:
        logger.error("Invalid configuration: %s", e)
        return EXIT_CONFIG
    except NumericalError as e:
        logger.error("Numerical failure: %s", e)
        return EXIT_NUMERICAL
    except (ReportIOError, OSError) as e:
        logger.error("I/O failure: %s", e)
        return EXIT_IO
    except W2SError as e:
        logger.error("%s", e)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
