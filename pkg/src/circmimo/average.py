"""Cell-average asymptotic rate per user for uniformly placed users.

User distances follow the density ``2x/R^2`` on ``[0, R]``. Two closed-form
expressions bracket the average (up to the ``log(1+x) ~ log(x)`` step used
to integrate them), a nested quadrature gives the reference value, and a
Monte Carlo estimator simulates the ZF receiver directly.
"""

import math
import warnings
from dataclasses import dataclass
from functools import partial

import numpy as np
from scipy import integrate

from . import analytic
from .errors import DomainError, SingularChannelError
from .geometry import CellGeometry, build_ring, distances_from_xy, sample_users
from .montecarlo import (
    MAX_CONSECUTIVE_REJECTIONS,
    STREAM_CELL_AVERAGE,
    RateEstimate,
    draw_rates,
    run_trials,
    trial_rng,
)

LOG2E = math.log2(math.e)
APPROXIMATION_SNR_THRESHOLD = 10.0


class ApproximationWarning(UserWarning):
    """The high-SNR step behind the closed-form averages is not accurate here."""


def _check_interior(params):
    r, R = params.ring_radius, params.cell_radius
    if not 0.0 < r < R:
        raise DomainError(
            f"closed-form averages need 0 < r < R, got r={r}, R={R}"
        )


def min_bound_snr(params):
    """Smallest ``P M (r_u^2+r^2)^(v/2-1)/|r_u^2-r^2|^(v-1)`` over ``r_u`` in ``[0, R]``.

    In ``t = r_u^2`` the factor increases on ``[0, r^2)`` and decreases on
    ``(r^2, R^2]``, so the minimum sits at ``r_u = 0`` or ``r_u = R``.
    """
    r, R, v = params.ring_radius, params.cell_radius, params.exponent
    ends = [analytic.bound_snr_factor(r, x, v) for x in (0.0, R) if x != r]
    return params.effective_power * params.antenna_count * min(ends)


def average_bound_b1(params):
    """First closed-form bound on the cell-average rate, in bits/s/Hz."""
    _check_interior(params)
    R, r, v = params.cell_radius, params.ring_radius, params.exponent
    snr = min_bound_snr(params)
    if snr < APPROXIMATION_SNR_THRESHOLD:
        warnings.warn(
            f"P*M*I0 drops to {snr:.3g} inside the cell; the closed-form average "
            "assumes it is large",
            ApproximationWarning,
            stacklevel=2,
        )
    s = r * r / (R * R)
    pm = params.effective_power * params.antenna_count
    return (
        math.log2(pm)
        + (0.5 * v - 1.0) * (1.0 + s) * math.log2(R * R + r * r)
        - (v - 1.0) * (1.0 - s) * math.log2(R * R - r * r)
        - (3.0 * v - 4.0) * s * math.log2(r)
        + 0.5 * v * LOG2E
    )


def average_bound_offset(v):
    """``log2(Gamma(v/2-1/2)^2 / (pi Gamma(v-1))) + 3(v/2-1)``, the second bound's shift."""
    return math.log2(
        math.gamma(0.5 * v - 0.5) ** 2 / (math.pi * math.gamma(v - 1.0))
    ) + 3.0 * (0.5 * v - 1.0)


def average_bound_b2(params):
    return average_bound_b1(params) + average_bound_offset(params.exponent)


def average_bound_b1_derivative(params):
    """Derivative of :func:`average_bound_b1` with respect to the ring radius."""
    _check_interior(params)
    R, r, v = params.cell_radius, params.ring_radius, params.exponent
    ratio = R * R / (r * r)
    return r * LOG2E / (R * R) * (
        (v - 2.0) * math.log(ratio + 1.0) + (2.0 * v - 2.0) * math.log(ratio - 1.0)
    )


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_err: float
    converged: bool


def average_rate_quadrature(params, use_exact_rate=True, integrand=None,
                            epsabs=1e-9, epsrel=1e-10):
    """``(2/R^2) int_0^R r_u f(r_u) dr_u`` with the domain split at ``r_u = r``.

    ``f`` is the asymptotic rate when ``use_exact_rate`` is set and the first
    per-user bound otherwise; a custom ``integrand`` overrides both. The
    logarithmic singularity at ``r_u = r`` is integrable and only ever met as
    an interval endpoint, where the adaptive rule does not evaluate.
    """
    R, r = params.cell_radius, params.ring_radius
    if integrand is not None:
        f = integrand
    elif use_exact_rate:
        def f(x):
            return analytic.circle_rate(params, x).rate_bits
    else:
        def f(x):
            return analytic.rate_bounds(params, x).b1_bits

    pieces = [(0.0, r), (r, R)] if 0.0 < r < R else [(0.0, R)]
    total = err = 0.0
    converged = True
    for a, b in pieces:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", integrate.IntegrationWarning)
            val, e = integrate.quad(
                lambda x: x * f(x), a, b, epsabs=epsabs, epsrel=epsrel, limit=200
            )
        if any(issubclass(w.category, integrate.IntegrationWarning) for w in caught):
            converged = False
        total += val
        err += e
    scale = 2.0 / (R * R)
    return QuadratureResult(scale * total, scale * err, converged)


def _cell_chunk(indices, layout, user_count, v, power, seed, min_distance):
    out = np.empty(len(indices))
    rejected = 0
    geom = layout.geometry
    for row, idx in enumerate(indices):
        rng = trial_rng(seed, STREAM_CELL_AVERAGE, idx)
        for _ in range(MAX_CONSECUTIVE_REJECTIONS + 1):
            radii, angles = sample_users(geom, rng, user_count)
            uxy = np.column_stack((radii * np.cos(angles), radii * np.sin(angles)))
            d = distances_from_xy(layout, uxy)
            if d.min() >= min_distance and d.min() > 0:
                break
            rejected += 1
        else:
            raise SingularChannelError(
                f"{MAX_CONSECUTIVE_REJECTIONS} consecutive user placements within "
                f"{min_distance} m of an antenna"
            )
        rates, rej = draw_rates(d ** (-0.5 * v), power, rng)
        rejected += rej
        out[row] = rates.mean()
    return out, rejected


def average_rate_montecarlo(params, cfg):
    """Simulated cell-average ZF rate per user.

    Each composite trial places ``params.user_count`` users uniformly in the
    cell, draws one fading realization and records the mean rate over the
    users. Placements with a user closer than ``cfg.min_distance`` to an
    antenna are redrawn. Power and seeding come from ``cfg``.
    """
    if params.antenna_count < params.user_count:
        raise DomainError(
            f"need M >= K, got M={params.antenna_count}, K={params.user_count}"
        )
    geom = CellGeometry(params.cell_radius, params.ring_radius)
    layout = build_ring(geom, params.antenna_count)
    chunk = partial(
        _cell_chunk,
        layout=layout,
        user_count=params.user_count,
        v=params.exponent,
        power=cfg.effective_power(params.exponent, params.cell_radius),
        seed=cfg.master_seed,
        min_distance=cfg.min_distance,
    )
    samples, rejected = run_trials(chunk, cfg.trials, cfg.workers)
    return RateEstimate.from_samples(samples, rejected)


@dataclass(frozen=True)
class AverageRateReport:
    bar_b1_bits: float
    bar_b2_bits: float
    quadrature_bits: float
    quadrature_abs_err: float
    mc: RateEstimate | None = None

    @property
    def gap(self):
        return abs(self.bar_b1_bits - self.bar_b2_bits)


def average_report(params, cfg=None):
    quad = average_rate_quadrature(params, use_exact_rate=True)
    mc = average_rate_montecarlo(params, cfg) if cfg is not None else None
    return AverageRateReport(
        average_bound_b1(params), average_bound_b2(params), quad.value, quad.abs_err, mc
    )
