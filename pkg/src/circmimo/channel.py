"""Path loss, small-scale fading and the uplink channel matrix."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import distance_matrix
from .params import check_exponent

DEFAULT_MIN_DISTANCE = 1.0


def path_loss(d, v):
    """Large-scale gain ``d**(-v)`` for distance ``d`` in metres."""
    check_exponent(v)
    if not d > 0:
        raise DomainError(f"distance must be positive, got {d}")
    return d ** (-v)


def rayleigh_fading(rng, shape):
    """i.i.d. CN(0, 1) entries: real and imaginary parts each with variance 1/2."""
    z = rng.standard_normal(shape + (2,))
    return (z[..., 0] + 1j * z[..., 1]) * math.sqrt(0.5)


def unit_phase_fading(rng, shape):
    """Unit-modulus entries with uniform phase (zero mean, unit variance)."""
    return np.exp(2j * math.pi * rng.random(shape))


@dataclass(frozen=True)
class PathLossMatrix:
    values: np.ndarray  # (M, K)
    exponent: float


@dataclass(frozen=True)
class ChannelRealization:
    matrix: np.ndarray  # G, (M, K) complex
    fading: np.ndarray  # h, (M, K) complex
    path_loss: PathLossMatrix


def path_loss_matrix(distances, v, min_distance=0.0):
    """Element-wise ``d**(-v)`` over an ``(M, K)`` distance array.

    Any entry at or below ``min_distance`` (or nonpositive) raises
    :class:`DomainError` naming the first offending antenna/user pair.
    """
    check_exponent(v)
    d = np.asarray(distances, dtype=float)
    bad = (d <= 0) | (d < min_distance)
    if bad.any():
        m, k = np.argwhere(bad)[0]
        raise DomainError(
            f"user {k} is {d[m, k]:.6g} m from antenna {m}, "
            f"below the minimum distance {max(min_distance, 0.0):g} m"
        )
    return PathLossMatrix(d ** (-v), v)


def draw_channel(layout, users, v, rng, *, min_distance=DEFAULT_MIN_DISTANCE,
                 fading=rayleigh_fading):
    """One realization of ``G = h * sqrt(beta)`` for the given users.

    ``fading(rng, shape)`` supplies the small-scale coefficients; swap it for
    a stub to test deterministic paths.
    """
    beta = path_loss_matrix(distance_matrix(layout, users), v, min_distance)
    h = fading(rng, beta.values.shape)
    return ChannelRealization(h * np.sqrt(beta.values), h, beta)
