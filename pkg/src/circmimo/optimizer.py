"""Ring radius that maximizes the closed-form cell-average rate.

Setting the derivative of the first average bound to zero gives, with
``t = R^2/r^2 - 1``,

    t^(3 + 2/(v-2)) + 2 t^(2 + 2/(v-2)) - 1 = 0,

whose root ``t0`` in (0, 1) yields ``r_opt = R / sqrt(t0 + 1)``. The root
depends on ``v`` alone, so the optimal ratio ``r_opt/R`` does not depend on
the transmit power or the antenna count.
"""

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import optimize

from .average import ApproximationWarning, average_bound_b1
from .errors import DomainError

ROOT_XTOL = 1e-16
V2_LIMIT_RATIO = 1.0 / math.sqrt(2.0)


def optimality_polynomial(x, v):
    """Left side of the stationarity equation in ``x = t``."""
    e = 2.0 / (v - 2.0)
    return x ** (3.0 + e) + 2.0 * x ** (2.0 + e) - 1.0


def stationarity_residual(ratio, v):
    """``(R^2/r^2 + 1)^((v/2-1)/(v-1)) (R^2/r^2 - 1) - 1`` at ``r/R = ratio``."""
    q = 1.0 / (ratio * ratio)
    return (q + 1.0) ** ((0.5 * v - 1.0) / (v - 1.0)) * (q - 1.0) - 1.0


@dataclass(frozen=True)
class RadiusSolution:
    exponent: float
    t0: float
    r_opt_m: float
    ratio: float
    residual: float
    limit: bool = False  # True when v = 2 and the analytic limit was returned


def solve_radius(v, cell_radius=1.0):
    """Optimal ring radius for path-loss exponent ``v`` in ``[2, 6]``.

    The polynomial is -1 at 0, +2 at 1 and strictly increasing between, so
    Brent's bracketing method on (0, 1) finds the unique root. At ``v = 2``
    the exponent diverges and the limit ``t0 = 1`` (ratio ``1/sqrt 2``) is
    returned with ``limit=True``.
    """
    if not 2.0 <= v <= 6.0:
        raise DomainError(f"path-loss exponent must lie in [2, 6], got {v}")
    if not cell_radius > 0:
        raise DomainError(f"cell radius must be positive, got {cell_radius}")
    if v == 2.0:
        return RadiusSolution(v, 1.0, cell_radius * V2_LIMIT_RATIO, V2_LIMIT_RATIO, 0.0, True)
    t0 = optimize.brentq(
        optimality_polynomial, 0.0, 1.0, args=(v,), xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps
    )
    ratio = 1.0 / math.sqrt(t0 + 1.0)
    return RadiusSolution(v, t0, cell_radius * ratio, ratio, optimality_polynomial(t0, v))


@dataclass(frozen=True)
class ScanResult:
    radii: np.ndarray
    rates: np.ndarray
    r_opt_m: float
    argmax_m: float
    step_m: float
    sign_change_ok: bool

    @property
    def argmax_within_step(self):
        return abs(self.argmax_m - self.r_opt_m) <= self.step_m * (1 + 1e-9)


def optimality_scan(params, step_m=None, grid_points=100):
    """Evaluate the first average bound over ring radii in (0, R).

    The grid is ``step_m, 2 step_m, ...`` below ``R`` (or ``grid_points``
    evenly spaced interior points). Finite differences of the scanned curve
    must be positive below the optimum and negative above it.
    """
    R = params.cell_radius
    if step_m is None:
        step_m = R / (grid_points + 1)
    radii = np.arange(step_m, R - 0.5 * step_m, step_m)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ApproximationWarning)
        rates = np.array([average_bound_b1(replace(params, ring_radius=float(x))) for x in radii])
    sol = solve_radius(params.exponent, R)
    slopes = np.diff(rates)
    mids = 0.5 * (radii[1:] + radii[:-1])
    # the interval that straddles r_opt may have either sign
    below = mids < sol.r_opt_m - step_m
    above = mids > sol.r_opt_m + step_m
    ok = bool(np.all(slopes[below] > 0) and np.all(slopes[above] < 0))
    return ScanResult(radii, rates, sol.r_opt_m, float(radii[np.argmax(rates)]), step_m, ok)
