"""Circular cell, evenly spaced antenna ring and user placement.

Antenna ``m`` (0-based) sits at angle ``2*pi*m/M`` on a circle of radius
``r`` centred on the cell centre; antenna 0 is on the positive x axis.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CellGeometry:
    cell_radius_m: float
    ring_radius_m: float

    def __post_init__(self):
        if not self.cell_radius_m > 0:
            raise DomainError(f"cell radius must be positive, got {self.cell_radius_m}")
        if not 0 <= self.ring_radius_m <= self.cell_radius_m:
            raise DomainError(
                f"ring radius {self.ring_radius_m} outside [0, {self.cell_radius_m}]"
            )

    def contains(self, user):
        return user.radius_m <= self.cell_radius_m


@dataclass(frozen=True)
class UserLocation:
    """User position in polar coordinates about the cell centre."""

    radius_m: float
    angle_rad: float = 0.0

    def __post_init__(self):
        if not self.radius_m >= 0:
            raise DomainError(f"user radius must be nonnegative, got {self.radius_m}")
        object.__setattr__(self, "angle_rad", float(self.angle_rad) % TWO_PI)

    @property
    def xy(self):
        return (
            self.radius_m * math.cos(self.angle_rad),
            self.radius_m * math.sin(self.angle_rad),
        )


@dataclass(frozen=True)
class RingLayout:
    geometry: CellGeometry
    antenna_count: int
    angles_rad: np.ndarray = field(repr=False)
    positions: np.ndarray = field(repr=False)  # (M, 2) metres

    @property
    def ring_radius_m(self):
        return self.geometry.ring_radius_m


def build_ring(geom, antenna_count):
    """Place ``antenna_count`` antennas evenly on the ring of ``geom``."""
    if antenna_count < 1:
        raise DomainError(f"antenna count must be >= 1, got {antenna_count}")
    angles = TWO_PI * np.arange(antenna_count) / antenna_count
    r = geom.ring_radius_m
    positions = np.column_stack((r * np.cos(angles), r * np.sin(angles)))
    angles.setflags(write=False)
    positions.setflags(write=False)
    return RingLayout(geom, antenna_count, angles, positions)


def antenna_user_distance(layout, user, m):
    """Euclidean distance between antenna ``m`` (0-based) and ``user``."""
    if not 0 <= m < layout.antenna_count:
        raise IndexError(f"antenna index {m} out of range for M={layout.antenna_count}")
    ux, uy = user.xy
    ax, ay = layout.positions[m]
    return math.hypot(ax - ux, ay - uy)


def distance_matrix(layout, users):
    """All antenna-user distances as an ``(M, K)`` array."""
    uxy = np.array([u.xy for u in users], dtype=float).reshape(-1, 2)
    return distances_from_xy(layout, uxy)


def distances_from_xy(layout, uxy):
    """Distances from every antenna to users given as a ``(K, 2)`` array."""
    diff = layout.positions[:, None, :] - uxy[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1])


def sample_user(geom, rng):
    """Draw one user uniformly over the disc of radius ``geom.cell_radius_m``.

    ``rng`` only needs a ``random()`` method returning uniforms on [0, 1).
    The radius is ``R*sqrt(u)``, giving radial density ``2x/R**2``.
    """
    u = rng.random()
    w = rng.random()
    return UserLocation(geom.cell_radius_m * math.sqrt(u), TWO_PI * w)


def sample_users(geom, rng, count):
    """Vectorised :func:`sample_user`; returns ``(radii, angles)`` arrays."""
    u = rng.random(count)
    w = rng.random(count)
    return geom.cell_radius_m * np.sqrt(u), TWO_PI * w
