import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from circmimo.errors import DomainError, SingularChannelError
from circmimo.geometry import CellGeometry, UserLocation, build_ring
from circmimo.montecarlo import (
    McConfig,
    RateEstimate,
    ergodic_rate,
    ergodic_rates,
    lln_probe,
    trial_rng,
    zf_instantaneous_rate,
    zf_rates,
)
from circmimo.channel import draw_channel


def projection_rate(G, power, k):
    """ZF SINR as P times the squared residual of g_k off the other columns."""
    g = G[:, k]
    others = np.delete(G, k, axis=1)
    if others.shape[1] == 0:
        resid = g
    else:
        coef, *_ = np.linalg.lstsq(others, g, rcond=None)
        resid = g - others @ coef
    return math.log2(1 + power * np.vdot(resid, resid).real)


def test_single_user_all_ones():
    G = np.ones((4, 1), dtype=complex)
    assert zf_instantaneous_rate(G, 1.0, 0) == pytest.approx(math.log2(5), abs=1e-12)
    assert zf_instantaneous_rate(G, 1.0, 0) == pytest.approx(2.3219, abs=1e-4)


def test_orthogonal_columns():
    M = 8
    G = np.exp(2j * np.pi * np.outer(np.arange(M), [0, 1, 3]) / M) * [1.0, 0.5, 2.0]
    for k, scale in enumerate([1.0, 0.5, 2.0]):
        assert zf_instantaneous_rate(G, 3.0, k) == pytest.approx(math.log2(1 + 3.0 * M * scale ** 2))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 32), M=st.integers(2, 40), data=st.data())
def test_zf_matches_projection(seed, M, data):
    K = data.draw(st.integers(1, M))
    rng = np.random.default_rng(seed)
    G = (rng.standard_normal((M, K)) + 1j * rng.standard_normal((M, K))) / math.sqrt(2)
    try:
        rates = zf_rates(G, 2.5)
    except SingularChannelError:
        return
    for k in range(K):
        assert rates[k] == pytest.approx(projection_rate(G, 2.5, k), abs=1e-8)


def test_permutation_invariance():
    rng = np.random.default_rng(1)
    G = rng.standard_normal((20, 5)) + 1j * rng.standard_normal((20, 5))
    perm = [3, 0, 4, 1, 2]
    np.testing.assert_allclose(zf_rates(G[:, perm], 2.0), zf_rates(G, 2.0)[perm], rtol=1e-12)


def test_singular_channel_detected():
    G = np.ones((6, 2), dtype=complex)
    with pytest.raises(SingularChannelError):
        zf_rates(G, 1.0)
    with pytest.raises(DomainError):
        zf_rates(np.ones((1, 2)), 1.0)


def test_single_trial_equals_single_realization():
    layout = build_ring(CellGeometry(1000, 500), 32)
    users = [UserLocation(300), UserLocation(700, 2.0)]
    cfg = McConfig(trials=1, master_seed=42, power=10.0, power_normalization="raw")
    est = ergodic_rate(layout, users, 3.6, cfg, 0)
    ch = draw_channel(layout, users, 3.6, trial_rng(42, 1, 0))
    assert est.mean_rate_bits == pytest.approx(zf_instantaneous_rate(ch, 10.0, 0), rel=1e-12)
    assert est.half_width_95 == 0.0
    assert est.trials_used == 1


def test_worker_count_does_not_change_results():
    layout = build_ring(CellGeometry(1000, 500), 50)
    users = [UserLocation(300), UserLocation(650, 1.0), UserLocation(900, 4.0)]
    one = ergodic_rates(layout, users, 3.6, McConfig(trials=97, master_seed=7, workers=1))
    two = ergodic_rates(layout, users, 3.6, McConfig(trials=97, master_seed=7, workers=2))
    assert one == two


def test_seed_reproducible():
    layout = build_ring(CellGeometry(1000, 500), 20)
    users = [UserLocation(300)]
    a = ergodic_rate(layout, users, 3.6, McConfig(trials=50, master_seed=3), 0)
    b = ergodic_rate(layout, users, 3.6, McConfig(trials=50, master_seed=3), 0)
    c = ergodic_rate(layout, users, 3.6, McConfig(trials=50, master_seed=4), 0)
    assert a == b and a != c


def test_monotone_in_power_and_antennas():
    users = [UserLocation(300), UserLocation(700, 1.5)]
    layout = build_ring(CellGeometry(1000, 500), 40)
    rates = [ergodic_rate(layout, users, 3.6, McConfig.from_db(p, trials=200), 0).mean_rate_bits
             for p in (0, 10, 20)]
    assert rates[0] < rates[1] < rates[2]
    by_m = [ergodic_rate(build_ring(CellGeometry(1000, 500), m), users, 3.6,
                         McConfig(trials=400), 0).mean_rate_bits for m in (10, 40, 160)]
    assert by_m[0] < by_m[1] < by_m[2]


def test_needs_more_antennas_than_users():
    layout = build_ring(CellGeometry(1000, 500), 2)
    users = [UserLocation(100), UserLocation(200, 1.0), UserLocation(300, 2.0)]
    with pytest.raises(DomainError):
        ergodic_rates(layout, users, 3.6, McConfig(trials=3))


def test_rate_estimate_half_width():
    est = RateEstimate.from_samples([1.0, 2.0, 3.0, 4.0])
    assert est.mean_rate_bits == 2.5
    assert est.half_width_95 == pytest.approx(1.959964 * np.std([1, 2, 3, 4], ddof=1) / 2, rel=1e-6)


def test_config_validation():
    with pytest.raises(DomainError):
        McConfig(trials=0)
    with pytest.raises(DomainError):
        McConfig(power=0.0)


def test_probe_zero_q():
    rep = lln_probe(np.ones(64), 100, np.random.default_rng(0), q_profile=np.zeros(64))
    assert rep.mean_cross == 0.0
    assert rep.cross_exceed_fraction == 0.0


@pytest.mark.parametrize("distribution", ["gaussian", "unit_phase"])
def test_probe_large_m(distribution):
    rep = lln_probe(np.ones(10_000), 300, np.random.default_rng(1), distribution=distribution)
    assert rep.norm_exceed_fraction <= 0.01
    assert rep.cross_exceed_fraction <= 0.01
    assert rep.norm_exceed_fraction <= rep.norm_envelope
    assert rep.cross_exceed_fraction <= rep.cross_envelope


def test_probe_mean_square_halves():
    rng = np.random.default_rng(2)
    profile = np.linspace(0.2, 1.8, 512)
    a = lln_probe(profile, 4000, rng)
    b = lln_probe(np.repeat(profile, 2), 4000, rng)
    assert b.mean_sq_norm_deviation / a.mean_sq_norm_deviation == pytest.approx(0.5, rel=0.1)
    assert b.mean_sq_cross / a.mean_sq_cross == pytest.approx(0.5, rel=0.1)


def test_probe_rejects_bad_profiles():
    with pytest.raises(ValueError):
        lln_probe([1.0, -1.0], 5, np.random.default_rng(0))
    with pytest.raises(ValueError):
        lln_probe([1.0], 5, np.random.default_rng(0), distribution="laplace")
