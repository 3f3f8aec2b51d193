"""Numerical self-checks run by ``circmimo validate``.

Each check returns a :class:`CheckResult` carrying the measured values so a
failing run can be diagnosed from the report alone.
"""

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import analytic
from .average import (
    ApproximationWarning,
    average_bound_b1,
    average_bound_b2,
    average_bound_offset,
    average_rate_montecarlo,
    average_rate_quadrature,
    min_bound_snr,
)
from .config import ScenarioConfig
from .geometry import CellGeometry, UserLocation, build_ring
from .montecarlo import STREAM_PROBE, McConfig, ergodic_rate, lln_probe, trial_rng
from .optimizer import solve_radius, stationarity_residual
from .params import SystemParams
from .sweep import co_users, run_sweep, sweep_values


@dataclass
class CheckResult:
    criterion: int
    name: str
    passed: bool
    tolerance: str
    measured: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "criterion": self.criterion,
            "name": self.name,
            "passed": self.passed,
            "tolerance": self.tolerance,
            "measured": self.measured,
        }


def _closed_form_i0(r, r_u, v):
    d = abs(r * r - r_u * r_u)
    s = r * r + r_u * r_u
    if v == 2:
        return 1.0 / d
    if v == 4:
        return s / d ** 3
    z = s / d
    return (3 * z * z - 1) / (2 * d ** 3)


GRID_RING = (200.0, 500.0, 800.0, 1000.0)
GRID_USER = (0.0, 150.0, 350.0, 650.0, 950.0)
BOUND_POSITIONS = (0.0, 100.0, 200.0, 300.0, 450.0, 550.0, 700.0, 800.0, 900.0, 1000.0)


def check_closed_forms(base):
    worst = 0.0
    for v in (2.0, 4.0, 6.0):
        for r in GRID_RING:
            for r_u in GRID_USER:
                exact = _closed_form_i0(r, r_u, v)
                worst = max(worst, abs(analytic.circle_i0(r, r_u, v) / exact - 1.0))
    return CheckResult(1, "closed_form_equivalence", worst <= 1e-9, "relative <= 1e-9",
                       {"max_relative_error": worst})


def check_bounds(base, coefficient_scale=1.0):
    worst_gap = 0.0
    side_ok = True
    worst_equal = 0.0
    for v in np.arange(2.0, 6.0 + 1e-9, 0.25):
        v = float(v)
        params = replace(base, exponent=v)
        for r_u in BOUND_POSITIONS:
            if r_u == params.ring_radius:
                continue
            rate = analytic.circle_rate(params, r_u).rate_bits
            c = analytic.bound_coefficient(v) * coefficient_scale
            pair = analytic.rate_bounds(params, r_u, coefficient=c)
            worst_gap = max(worst_gap, abs(pair.b1_bits - pair.b2_bits))
            tol = 1e-9
            if v < 4.0:
                side_ok &= pair.b2_bits - tol <= rate <= pair.b1_bits + tol
            elif v > 4.0:
                side_ok &= pair.b1_bits - tol <= rate <= pair.b2_bits + tol
            if v in (2.0, 4.0):
                worst_equal = max(worst_equal, abs(pair.b1_bits - rate), abs(pair.b2_bits - rate))
    passed = side_ok and worst_gap <= 0.6 and worst_equal <= 1e-9
    return CheckResult(2, "bound_ordering_and_gap", passed,
                       "correct side; gap <= 0.6 bits; equality at v in {2,4} to 1e-9",
                       {"side_ok": side_ok, "max_gap_bits": worst_gap,
                        "max_equality_error_bits": worst_equal})


def check_coefficients(base):
    err = max(abs(analytic.bound_coefficient(2.0) - 1.0), abs(analytic.bound_coefficient(4.0) - 1.0))
    return CheckResult(3, "coefficient_identities", err <= 1e-12, "|C(2)-1|, |C(4)-1| <= 1e-12",
                       {"max_error": err})


def check_riemann(base):
    # near-ring users keep the geometric convergence of the periodic sum
    # slow enough to stay above rounding error up to M = 512
    r = 500.0
    bound_ok = shrink_ok = True
    worst_ratio = 0.0
    geom = CellGeometry(1000.0, r)
    for r_u in (480.0, 520.0):
        for v in (2.0, 3.6, 4.0, 6.0):
            exact = analytic.circle_i0(r, r_u, v)
            errors = []
            for M in (64, 128, 256, 512):
                err = abs(analytic.riemann_i0(build_ring(geom, M), r_u, v) - exact)
                bound_ok &= err <= analytic.riemann_error_bound(r, r_u, v, M)
                errors.append(err)
            ratios = [b / a for a, b in zip(errors, errors[1:])]
            worst_ratio = max(worst_ratio, *ratios)
            shrink_ok &= all(q <= 0.75 for q in ratios)
    return CheckResult(4, "riemann_convergence", bound_ok and shrink_ok,
                       "error <= (2/M)[|r-r_u|^-v - (r+r_u)^-v]; successive ratio <= 0.75",
                       {"within_bound": bound_ok, "max_successive_ratio": worst_ratio})


def _single_user_mc(params, cfg, r_u):
    geom = CellGeometry(params.cell_radius, params.ring_radius)
    layout = build_ring(geom, params.antenna_count)
    others = co_users(geom, layout, params.user_count - 1, cfg.master_seed, cfg.min_distance)
    return ergodic_rate(layout, [UserLocation(r_u, 0.0)] + others, params.exponent, cfg, 0)


def check_mc_vs_asymptote(base, trials, seed):
    r_u = 300.0
    measured = {}
    gaps = []
    passed = True
    for M in (50, 100, 200, 300, 400):
        params = replace(base, antenna_count=M)
        cfg = McConfig.for_params(params, trials=trials, master_seed=seed)
        est = _single_user_mc(params, cfg, r_u)
        asy = analytic.circle_rate(params, r_u).rate_bits
        gap = abs(est.mean_rate_bits - asy)
        measured[f"M{M}"] = {"mc": est.mean_rate_bits, "half_width": est.half_width_95,
                             "asymptotic": asy}
        if M == 300:
            passed &= gap <= max(0.02 * asy, est.half_width_95)
        else:
            gaps.append(gap)
    # M = 300 is not part of the monotone sequence
    decreasing = all(b < a for a, b in zip(gaps, gaps[1:]))
    measured["gaps_50_100_200_400"] = gaps
    return CheckResult(5, "mc_vs_asymptote", passed and decreasing,
                       "M=300 within max(2%, half-width); |MC-R_asy| decreasing in M",
                       measured)


def check_cell_average(base, trials, seed):
    cfg = McConfig.for_params(base, trials=trials, master_seed=seed)
    est = average_rate_montecarlo(base, cfg)
    b1, b2 = average_bound_b1(base), average_bound_b2(base)
    slack = est.half_width_95 + 0.2
    inside = min(b1, b2) - slack <= est.mean_rate_bits <= max(b1, b2) + slack
    gaps = [abs(average_bound_offset(float(v))) for v in np.arange(2.0, 6.0 + 1e-9, 0.05)]
    passed = inside and max(gaps) < 0.6
    return CheckResult(6, "cell_average_sandwich", passed,
                       "MC within [min, max] of the bounds +- (half-width + 0.2); gap < 0.6",
                       {"mc": est.mean_rate_bits, "half_width": est.half_width_95,
                        "bar_b1": b1, "bar_b2": b2, "max_gap_bits": max(gaps)})


def check_quadrature_chain(base):
    worst = 0.0
    min_snr = math.inf
    for v in (2.5, 3.6, 4.0, 5.0, 6.0):
        params = replace(base, exponent=v, power_db=20.0, antenna_count=300)
        min_snr = min(min_snr, min_bound_snr(params))
        quad = average_rate_quadrature(params, use_exact_rate=False)
        worst = max(worst, abs(quad.value - average_bound_b1(params)))
    passed = worst <= 0.05 and min_snr >= 1e3
    return CheckResult(7, "quadrature_vs_closed_form", passed, "<= 0.05 bits at PM*I0 >= 1e3",
                       {"max_abs_diff_bits": worst, "min_snr": min_snr})


def check_radius(base):
    r35 = solve_radius(3.5).ratio
    r40 = solve_radius(4.0).ratio
    ratios = [solve_radius(float(v)).ratio for v in np.arange(2.0, 6.0 + 1e-9, 0.05)]
    residual = max(abs(stationarity_residual(solve_radius(float(v)).ratio, float(v)))
                   for v in np.arange(2.05, 6.0 + 1e-9, 0.05))
    passed = (abs(r35 - 0.758) <= 0.002 and abs(r40 - 0.763) <= 0.003
              and abs(r40 - 0.766) <= 0.01
              and 0.70 <= min(ratios) and max(ratios) <= 0.78 and residual <= 1e-9)
    return CheckResult(8, "radius_optimum", passed,
                       "v=3.5: 0.758+-0.002; v=4: 0.763+-0.003; ratio in [0.70,0.78]; "
                       "residual <= 1e-9",
                       {"ratio_v3.5": r35, "ratio_v4": r40, "min_ratio": min(ratios),
                        "max_ratio": max(ratios), "max_residual": residual})


def check_robustness(base):
    worst = 0.0
    for v in np.arange(2.5, 6.0 + 1e-9, 0.5):
        v = float(v)
        params = replace(base, exponent=v)
        r_opt = solve_radius(v, params.cell_radius).r_opt_m
        at_opt = replace(params, ring_radius=r_opt)
        at_75 = replace(params, ring_radius=0.75 * params.cell_radius)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ApproximationWarning)
            loss_bound = 1.0 - average_bound_b1(at_75) / average_bound_b1(at_opt)
        loss_quad = 1.0 - (average_rate_quadrature(at_75).value
                           / average_rate_quadrature(at_opt).value)
        worst = max(worst, loss_bound, loss_quad)
    return CheckResult(9, "robustness_0.75R", worst < 0.05, "loss < 5%",
                       {"max_relative_loss": worst})


def check_improvements(base):
    def cell_average(M, p_db):
        return average_rate_quadrature(replace(base, antenna_count=M, power_db=p_db)).value

    gain_m = cell_average(400, 10.0) / cell_average(100, 10.0) - 1.0
    gain_p = cell_average(100, 14.0) / cell_average(100, 4.0) - 1.0
    passed = abs(gain_m - 0.15) <= 0.03 and abs(gain_p - 0.35) <= 0.05
    return CheckResult(10, "percentage_improvements", passed,
                       "M 100->400: 15% +- 3; P 4->14 dB: 35% +- 5",
                       {"gain_antennas": gain_m, "gain_power": gain_p})


def check_lln(base, seed):
    trials = 2000
    rng = trial_rng(seed, STREAM_PROBE, 0)
    profile = np.linspace(0.2, 1.8, 2048)  # i.n.i.d. variances, mean 1
    small = lln_probe(profile, trials, rng, epsilon=0.1)
    large = lln_probe(np.repeat(profile, 2), trials, rng, epsilon=0.1)
    within = (small.norm_exceed_fraction <= small.norm_envelope
              and small.cross_exceed_fraction <= small.cross_envelope
              and large.norm_exceed_fraction <= large.norm_envelope)
    ratio = small.mean_sq_norm_deviation / large.mean_sq_norm_deviation
    passed = within and abs(ratio - 2.0) <= 0.4
    return CheckResult(11, "lln_probe", passed,
                       "exceedance <= C/(M eps^2); mean-square deviation halves +-20%",
                       {"exceed_fraction": small.norm_exceed_fraction,
                        "envelope": small.norm_envelope, "msd_ratio": ratio})


def check_determinism(scenario):
    small = scenario.replace(trials=min(scenario.trials, 200) or 200, antenna_count=100)
    points = sweep_values("user_radius", values=[200.0, 350.0, 500.0, 650.0])
    one = run_sweep(small.replace(workers=1), "user_radius", points).to_csv()
    two = run_sweep(small.replace(workers=2), "user_radius", points).to_csv()
    return CheckResult(12, "determinism", one == two, "byte-identical CSV for 1 and 2 workers",
                       {"bytes": len(one)})


def run_validation(scenario=None, coefficient_scale=1.0):
    """Run every check for ``scenario``; Monte Carlo checks use its trials and seed."""
    scenario = (scenario or ScenarioConfig()).validate()
    base = SystemParams(
        cell_radius=scenario.cell_radius_m, ring_radius=scenario.ring_radius_m,
        antenna_count=scenario.antenna_count, user_count=scenario.user_count,
        exponent=scenario.exponent_v, power_db=scenario.power_db,
        normalization=scenario.power_normalization,
    )
    trials = scenario.trials or 2000
    seed = scenario.master_seed
    return [
        check_closed_forms(base),
        check_bounds(base, coefficient_scale),
        check_coefficients(base),
        check_riemann(base),
        check_mc_vs_asymptote(base, trials, seed),
        check_cell_average(base, trials, seed),
        check_quadrature_chain(base),
        check_radius(base),
        check_robustness(base),
        check_improvements(base),
        check_lln(base, seed),
        check_determinism(scenario),
    ]
