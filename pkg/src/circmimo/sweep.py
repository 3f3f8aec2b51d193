"""Parameter sweeps producing plot-ready CSV tables."""

import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import analytic
from .average import (
    ApproximationWarning,
    average_bound_b1,
    average_bound_b2,
    average_rate_montecarlo,
    average_rate_quadrature,
)
from .errors import ConfigError, DomainError, SingularityError
from .geometry import CellGeometry, UserLocation, build_ring, distances_from_xy, sample_users
from .montecarlo import MAX_CONSECUTIVE_REJECTIONS, ergodic_rate, trial_rng

AXES = ("user_radius", "ring_radius", "antennas", "power_db")
COLUMNS = ("asymptotic_bits", "b1_bits", "b2_bits", "mc_bits", "mc_half_width")
STREAM_CO_USERS = 4


@dataclass
class SweepRow:
    value: float
    asymptotic_bits: float | None = None
    b1_bits: float | None = None
    b2_bits: float | None = None
    mc_bits: float | None = None
    mc_half_width: float | None = None
    note: str = ""


@dataclass
class SweepTable:
    swept_name: str
    metric: str
    rows: list = field(default_factory=list)

    def to_csv(self):
        out = io.StringIO()
        out.write(",".join((self.swept_name,) + COLUMNS + ("note",)) + "\n")
        for row in self.rows:
            cells = [_fmt(row.value)] + [_fmt(getattr(row, c)) for c in COLUMNS]
            cells.append(row.note.replace(",", ";"))
            out.write(",".join(cells) + "\n")
        return out.getvalue()

    def best_row(self, column="asymptotic_bits"):
        rows = [r for r in self.rows if getattr(r, column) is not None]
        return max(rows, key=lambda r: getattr(r, column))


def _fmt(x):
    if x is None:
        return ""
    if not math.isfinite(x):
        raise ValueError(f"refusing to write non-finite value {x}")
    return f"{x:.10g}"


def sweep_values(axis, start=None, stop=None, steps=None, values=None):
    """Sorted, de-duplicated sweep points; antenna counts are rounded to integers."""
    if axis not in AXES:
        raise ConfigError("axis", f"must be one of {', '.join(AXES)}")
    if values is None:
        if start is None or stop is None or not steps:
            raise ConfigError("range", "give either explicit values or start, stop and steps")
        values = np.linspace(start, stop, int(steps))
    pts = [int(round(v)) if axis == "antennas" else float(v) for v in values]
    return sorted(set(pts))


def co_users(geom, layout, count, seed, min_distance):
    """Fixed companion users for single-user sweeps, drawn uniformly from ``seed``."""
    rng = trial_rng(seed, STREAM_CO_USERS, 0)
    users = []
    for _ in range(count * (MAX_CONSECUTIVE_REJECTIONS + 1)):
        if len(users) == count:
            break
        radii, angles = sample_users(geom, rng, 1)
        uxy = np.array([[radii[0] * math.cos(angles[0]), radii[0] * math.sin(angles[0])]])
        if distances_from_xy(layout, uxy).min() >= max(min_distance, 1e-12):
            users.append(UserLocation(float(radii[0]), float(angles[0])))
    if len(users) < count:
        raise DomainError("could not place companion users away from the antennas")
    return users


def user_row(scenario, params, r_u, companions):
    row = SweepRow(r_u)
    if not 0 <= r_u <= params.cell_radius:
        raise ConfigError("user_radius_m", f"{r_u} lies outside the cell")
    try:
        asy = analytic.circle_rate(params, r_u)
        bounds = analytic.rate_bounds(params, r_u)
    except SingularityError as exc:
        row.note = f"excluded: {exc}"
        return row
    row.asymptotic_bits, row.b1_bits, row.b2_bits = asy.rate_bits, bounds.b1_bits, bounds.b2_bits
    mc_cfg = scenario.mc_config(params)
    if mc_cfg is not None:
        geom = CellGeometry(params.cell_radius, params.ring_radius)
        layout = build_ring(geom, params.antenna_count)
        users = [UserLocation(r_u, 0.0)] + companions(geom, layout)
        try:
            est = ergodic_rate(layout, users, params.exponent, mc_cfg, 0)
        except DomainError as exc:
            row.note = f"mc skipped: {exc}"
        else:
            row.mc_bits, row.mc_half_width = est.mean_rate_bits, est.half_width_95
    return row


def average_row(scenario, params, value):
    row = SweepRow(value)
    notes = []
    quad = average_rate_quadrature(params, use_exact_rate=True)
    row.asymptotic_bits = quad.value
    if not quad.converged:
        notes.append(f"quadrature error {quad.abs_err:.3g}")
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ApproximationWarning)
            row.b1_bits = average_bound_b1(params)
            row.b2_bits = average_bound_b2(params)
        if caught:
            notes.append("low SNR: closed-form average approximate")
    except DomainError as exc:
        notes.append(f"bounds undefined: {exc}")
    mc_cfg = scenario.mc_config(params)
    if mc_cfg is not None:
        est = average_rate_montecarlo(params, mc_cfg)
        row.mc_bits, row.mc_half_width = est.mean_rate_bits, est.half_width_95
    row.note = "; ".join(notes)
    return row


def run_sweep(scenario, axis, points, metric=None):
    """Build a :class:`SweepTable` over ``points`` of ``axis``.

    ``metric`` is ``"user"`` (rate of one user at ``user_radius_m``) or
    ``"average"`` (cell-average rate); it defaults to ``"user"`` for the
    user-radius axis and ``"average"`` otherwise.
    """
    scenario.validate()
    metric = metric or ("user" if axis == "user_radius" else "average")
    if metric not in ("user", "average"):
        raise ConfigError("metric", "must be 'user' or 'average'")
    if axis == "user_radius" and metric != "user":
        raise ConfigError("metric", "the user-radius axis only supports the user metric")
    table = SweepTable(axis, metric)
    cache = {}

    def companions(geom, layout):
        key = (geom, layout.antenna_count)
        if key not in cache:
            cache[key] = co_users(
                geom, layout, scenario.user_count - 1, scenario.master_seed,
                scenario.min_distance_m,
            )
        return cache[key]

    for value in points:
        changes = {}
        r_u = scenario.user_radius_m
        if axis == "user_radius":
            r_u = value
        elif axis == "ring_radius":
            changes["ring_radius"] = value
        elif axis == "antennas":
            changes["antenna_count"] = value
        else:
            changes["power_db"] = value
        params = scenario.system_params(**changes)
        if metric == "user":
            table.rows.append(user_row(scenario, params, r_u, companions))
        else:
            table.rows.append(average_row(scenario, params, value))
    if not any(r.asymptotic_bits is not None for r in table.rows):
        raise ConfigError("range", "no valid points remain after excluding singular values")
    return table
