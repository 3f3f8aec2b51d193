import math

import mpmath
import numpy as np
import pytest

from circmimo.channel import (
    draw_channel,
    path_loss,
    path_loss_matrix,
    rayleigh_fading,
    unit_phase_fading,
)
from circmimo.errors import DomainError
from circmimo.geometry import CellGeometry, UserLocation, build_ring, distance_matrix


def ones_fading(rng, shape):
    return np.ones(shape, dtype=complex)


@pytest.mark.parametrize("d, v", [(1.0, 3.6), (2.0, 2.0), (500.0, 3.6), (37.5, 5.1)])
def test_path_loss_matches_high_precision(d, v):
    expected = float(mpmath.power(mpmath.mpf(d), -mpmath.mpf(v)))
    assert path_loss(d, v) == pytest.approx(expected, rel=1e-13)


def test_path_loss_examples():
    assert path_loss(1.0, 3.6) == 1.0
    assert path_loss(2.0, 2.0) == 0.25
    assert path_loss(500.0, 3.6) == pytest.approx(1.9220e-10, rel=1e-4)


@pytest.mark.parametrize("d", [0.0, -3.0])
def test_path_loss_rejects_nonpositive(d):
    with pytest.raises(DomainError):
        path_loss(d, 3.6)


@pytest.mark.parametrize("v", [1.9, 6.5])
def test_path_loss_exponent_range(v):
    with pytest.raises(DomainError):
        path_loss(10.0, v)


def test_path_loss_monotone():
    d = np.linspace(1, 1000, 200)
    for v in (2.0, 3.6, 6.0):
        assert np.all(np.diff(d ** -v) < 0)
        assert np.all(np.diff([path_loss(x, v) for x in d]) < 0)
    # for d > 1 larger exponents attenuate more
    vs = np.linspace(2, 6, 9)
    assert np.all(np.diff([path_loss(50.0, v) for v in vs]) < 0)


def test_matrix_error_names_pair():
    d = np.array([[10.0, 5.0], [0.5, 7.0]])
    with pytest.raises(DomainError, match="user 0.*antenna 1"):
        path_loss_matrix(d, 3.0, min_distance=1.0)


def test_user_on_antenna_rejected():
    layout = build_ring(CellGeometry(1000, 500), 4)
    with pytest.raises(DomainError):
        draw_channel(layout, [UserLocation(500, 0)], 3.6, np.random.default_rng(0))


def test_deterministic_fading_gives_sqrt_beta():
    layout = build_ring(CellGeometry(1000, 500), 16)
    users = [UserLocation(300, 0.2), UserLocation(800, 2.0)]
    ch = draw_channel(layout, users, 3.6, None, fading=ones_fading)
    d = distance_matrix(layout, users)
    np.testing.assert_allclose(ch.matrix, d ** -1.8, rtol=1e-12)
    assert ch.matrix.shape == (16, 2)


def test_same_seed_same_channel():
    layout = build_ring(CellGeometry(1000, 500), 8)
    users = [UserLocation(300), UserLocation(700, 1.0)]
    a = draw_channel(layout, users, 3.6, np.random.default_rng(5)).matrix
    b = draw_channel(layout, users, 3.6, np.random.default_rng(5)).matrix
    c = draw_channel(layout, users, 3.6, np.random.default_rng(6)).matrix
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


@pytest.mark.parametrize("fading", [rayleigh_fading, unit_phase_fading])
def test_fading_moments(fading):
    h = fading(np.random.default_rng(3), (200_000, 2))
    assert abs(h.mean()) < 0.01
    assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, abs=0.01)
    assert abs(np.mean(h[:, 0] * h[:, 1].conj())) < 0.01


def test_channel_second_moments():
    layout = build_ring(CellGeometry(1000, 500), 4)
    users = [UserLocation(300, 0.0), UserLocation(700, 1.0)]
    rng = np.random.default_rng(9)
    draws = np.stack([draw_channel(layout, users, 2.0, rng).matrix for _ in range(50_000)])
    beta = distance_matrix(layout, users) ** -2.0
    power = np.mean(np.abs(draws) ** 2, axis=0)
    np.testing.assert_allclose(power, beta, rtol=0.02)
    cross = np.mean(draws[:, 0, 0] * draws[:, 1, 1].conj())
    assert abs(cross) < 0.05 * math.sqrt(beta[0, 0] * beta[1, 1])
