"""Closed-form and special-function rate expressions for the antenna ring.

For a user at distance ``r_u`` from the centre of a ring of radius ``r``,
the ring-averaged path loss tends to

    I_0 = |r^2 - r_u^2|^(-v/2) * P_{v/2-1}(z),   z = (r^2 + r_u^2) / |r^2 - r_u^2|,

and the asymptotic ZF rate is ``log2(1 + P M I_0)``. The Legendre function
of real degree is evaluated from its Laplace integral

    P_nu(z) = (1/pi) * int_0^pi (z + sqrt(z^2 - 1) cos(phi))^nu dphi.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import integrate

from .errors import DomainError, SingularityError
from .params import check_exponent

LEGENDRE_ABS_TOL = 1e-10
LEGENDRE_REL_TOL = 1e-13


def general_asymptotic_rate(beta_column, power):
    """Large-M ZF rate ``log2(1 + P * sum(beta))`` for an arbitrary layout."""
    beta = np.asarray(beta_column, dtype=float)
    if (beta < 0).any():
        raise DomainError("path-loss coefficients must be nonnegative")
    return math.log2(1.0 + power * float(np.sum(beta)))


def legendre_halfint(nu_deg, z):
    """Legendre function ``P_nu(z)`` for degree ``0 <= nu <= 2`` and ``z >= 1``.

    Computed by adaptive quadrature of the Laplace integral. The base of the
    power is written as ``1/(z + s) + 2 s cos^2(phi/2)`` with
    ``s = sqrt(z^2 - 1)``, which avoids cancellation near ``phi = pi`` for
    large ``z``.
    """
    if not 0.0 <= nu_deg <= 2.0:
        raise DomainError(f"degree must lie in [0, 2], got {nu_deg}")
    if not z >= 1.0:
        raise DomainError(f"Legendre argument must be >= 1, got {z}")
    s = math.sqrt((z - 1.0) * (z + 1.0))
    lo = 1.0 / (z + s)

    def integrand(phi):
        c = math.cos(0.5 * phi)
        return (lo + 2.0 * s * c * c) ** nu_deg

    value, _ = integrate.quad(
        integrand, 0.0, math.pi, epsabs=LEGENDRE_ABS_TOL, epsrel=LEGENDRE_REL_TOL, limit=200
    )
    return value / math.pi


def _ring_terms(r, r_u):
    if r < 0 or r_u < 0:
        raise DomainError(f"radii must be nonnegative, got r={r}, r_u={r_u}")
    if r == 0 and r_u == 0:
        raise SingularityError("user at the centre of a zero-radius ring")
    diff = abs(r * r - r_u * r_u)
    if diff == 0:
        raise SingularityError(f"user on the antenna ring (r = r_u = {r}); rate diverges")
    return r * r + r_u * r_u, diff


def legendre_argument(r, r_u):
    total, diff = _ring_terms(r, r_u)
    return total / diff


def circle_i0(r, r_u, v):
    """Ring-averaged path loss ``I_0`` in the limit of many antennas."""
    check_exponent(v)
    total, diff = _ring_terms(r, r_u)
    return diff ** (-0.5 * v) * legendre_halfint(0.5 * v - 1.0, total / diff)


@dataclass(frozen=True)
class AsymptoticRate:
    rate_bits: float
    i0: float
    z: float


def circle_rate(params, r_u):
    """Asymptotic rate ``log2(1 + P M I_0)`` of a user at distance ``r_u``."""
    r, v = params.ring_radius, params.exponent
    i0 = circle_i0(r, r_u, v)
    rate = math.log2(1.0 + params.effective_power * params.antenna_count * i0)
    return AsymptoticRate(rate, i0, legendre_argument(r, r_u))


def bound_coefficient(v):
    """``2^(3(v/2-1)) Gamma(v/2-1/2)^2 / (pi Gamma(v-1))``; equals 1 at v = 2 and 4."""
    check_exponent(v)
    return 2.0 ** (3.0 * (0.5 * v - 1.0)) * math.gamma(0.5 * v - 0.5) ** 2 / (
        math.pi * math.gamma(v - 1.0)
    )


class Ordering(str, Enum):
    B1_UPPER = "b1_upper"
    B1_LOWER = "b1_lower"
    EQUAL = "equal"


def bound_ordering(v):
    """Which side of the exact rate the first bound falls on."""
    if v == 2.0 or v == 4.0:
        return Ordering.EQUAL
    return Ordering.B1_UPPER if v < 4.0 else Ordering.B1_LOWER


@dataclass(frozen=True)
class BoundPair:
    b1_bits: float
    b2_bits: float
    coefficient: float
    ordering: Ordering

    @property
    def lower(self):
        return min(self.b1_bits, self.b2_bits)

    @property
    def upper(self):
        return max(self.b1_bits, self.b2_bits)


def bound_snr_factor(r, r_u, v):
    """``(r_u^2 + r^2)^(v/2-1) / |r_u^2 - r^2|^(v-1)``, the ``z^(v/2-1)`` bound on ``I_0``."""
    total, diff = _ring_terms(r, r_u)
    return total ** (0.5 * v - 1.0) / diff ** (v - 1.0)


def rate_bounds(params, r_u, coefficient=None):
    """Closed-form pair bracketing :func:`circle_rate`.

    ``coefficient`` overrides the Gamma-function factor (used for fault
    injection in validation runs).
    """
    v = params.exponent
    c = bound_coefficient(v) if coefficient is None else coefficient
    snr = params.effective_power * params.antenna_count * bound_snr_factor(
        params.ring_radius, r_u, v
    )
    return BoundPair(math.log2(1.0 + snr), math.log2(1.0 + c * snr), c, bound_ordering(v))


def riemann_i0(layout, r_u, v):
    """Finite-M ring average ``(1/M) sum_m D_m^(-v)`` for a user at distance ``r_u``.

    The user sits on the positive x axis; by symmetry of the ring only the
    relative angles matter.
    """
    check_exponent(v)
    d = np.hypot(layout.positions[:, 0] - r_u, layout.positions[:, 1])
    if (d == 0).any():
        raise SingularityError(f"user at distance {r_u} coincides with an antenna")
    return float(np.mean(d ** (-v)))


def riemann_error_bound(r, r_u, v, antenna_count):
    """Upper bound ``(2/M)[|r - r_u|^(-v) - (r + r_u)^(-v)]`` on the finite-M error."""
    if r == r_u:
        raise SingularityError("error bound diverges on the ring")
    return 2.0 / antenna_count * (abs(r - r_u) ** (-v) - (r + r_u) ** (-v))
