import math
from dataclasses import replace

import numpy as np
import pytest

from circmimo.average import average_bound_b2
from circmimo.errors import DomainError
from circmimo.optimizer import (
    optimality_polynomial,
    optimality_scan,
    solve_radius,
    stationarity_residual,
)
from circmimo.params import SystemParams

from oracles import bisect


def oracle_ratio(v):
    e = 2 / (v - 2)
    t0 = bisect(lambda x: x ** (3 + e) + 2 * x ** (2 + e) - 1, 0.0, 1.0)
    return 1 / math.sqrt(t0 + 1)


@pytest.mark.parametrize("v, approx", [(3.5, 0.758), (4.0, 0.763), (6.0, 0.773)])
def test_ratio_values(v, approx):
    sol = solve_radius(v, 1000.0)
    assert sol.ratio == pytest.approx(oracle_ratio(v), abs=1e-12)
    assert sol.ratio == pytest.approx(approx, abs=1e-3)
    assert sol.r_opt_m == pytest.approx(1000 * sol.ratio)
    assert not sol.limit


def test_v4_root_is_quartic_root():
    # x^4 + 2x^3 - 1 = 0
    sol = solve_radius(4.0)
    assert sol.t0 ** 4 + 2 * sol.t0 ** 3 - 1 == pytest.approx(0, abs=1e-14)


def test_v2_limit():
    sol = solve_radius(2.0, 1000.0)
    assert sol.limit
    assert sol.ratio == pytest.approx(1 / math.sqrt(2))
    assert solve_radius(2.0001).ratio == pytest.approx(1 / math.sqrt(2), abs=1e-3)


def test_polynomial_bracket():
    for v in np.linspace(2.05, 6, 20):
        assert optimality_polynomial(0.0, v) == -1.0
        assert optimality_polynomial(1.0, v) == 2.0


def test_ratio_increases_with_exponent():
    ratios = [solve_radius(v).ratio for v in np.arange(2.0, 6.0001, 0.25)]
    assert np.all(np.diff(ratios) > 0)


@pytest.mark.parametrize("v", [2.5, 3.6, 4.0, 5.2, 6.0])
def test_stationarity_residual_vanishes(v):
    sol = solve_radius(v)
    assert abs(stationarity_residual(sol.ratio, v)) < 1e-10
    assert abs(sol.residual) < 1e-12


def test_scales_linearly_with_cell():
    for R in (1.0, 250.0, 1000.0, 5e4):
        assert solve_radius(3.6, R).r_opt_m == pytest.approx(R * solve_radius(3.6).ratio)


def test_domain():
    with pytest.raises(DomainError):
        solve_radius(1.5)
    with pytest.raises(DomainError):
        solve_radius(3.0, 0.0)


def test_scan_argmax_near_optimum():
    scan = optimality_scan(SystemParams(exponent=3.6), step_m=10.0)
    assert scan.sign_change_ok
    assert scan.argmax_within_step
    assert abs(scan.argmax_m - scan.r_opt_m) <= 10.0


def test_argmax_independent_of_power_and_antennas():
    argmaxes = {
        optimality_scan(SystemParams(power_db=p, antenna_count=m), step_m=5.0).argmax_m
        for p in (0.0, 10.0, 30.0) for m in (50, 300, 1000)
    }
    assert len(argmaxes) == 1


def test_b2_has_same_maximizer():
    params = SystemParams(exponent=5.0)
    radii = np.arange(5.0, 1000.0, 5.0)
    vals = [average_bound_b2(replace(params, ring_radius=float(x))) for x in radii]
    assert abs(radii[int(np.argmax(vals))] - solve_radius(5.0, 1000).r_opt_m) <= 5.0


def test_three_quarter_rule_loss_small():
    params = SystemParams()
    best = solve_radius(3.6, 1000).r_opt_m
    from circmimo.average import average_bound_b1
    opt = average_bound_b1(replace(params, ring_radius=best))
    rule = average_bound_b1(replace(params, ring_radius=750.0))
    assert (opt - rule) / opt < 0.005
