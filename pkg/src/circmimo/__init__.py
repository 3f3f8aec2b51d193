"""Uplink rate analysis for massive MIMO with circularly distributed antennas."""

from .analytic import (
    AsymptoticRate,
    BoundPair,
    Ordering,
    bound_coefficient,
    circle_i0,
    circle_rate,
    general_asymptotic_rate,
    legendre_halfint,
    rate_bounds,
    riemann_i0,
)
from .average import (
    AverageRateReport,
    average_bound_b1,
    average_bound_b2,
    average_rate_montecarlo,
    average_rate_quadrature,
    average_report,
)
from .channel import draw_channel, path_loss
from .errors import ConfigError, DomainError, SingularChannelError, SingularityError
from .geometry import CellGeometry, RingLayout, UserLocation, build_ring, sample_user
from .montecarlo import McConfig, RateEstimate, ergodic_rate, lln_probe, zf_instantaneous_rate
from .optimizer import RadiusSolution, optimality_scan, solve_radius
from .params import PowerNormalization, SystemParams

__version__ = "0.1.0"
