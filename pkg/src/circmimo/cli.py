"""Command-line front end.

Settings are resolved as: built-in defaults (seed overridable through
``CIRCMIMO_SEED``), then the ``--config`` file, then explicit flags.

Exit codes: 0 success, 1 configuration or domain error, 2 failed validation.
"""

import argparse
import json
import sys

from . import analytic
from .average import average_report
from .config import default_config, dump_config, load_config
from .errors import ConfigError, DomainError, SingularityError
from .optimizer import solve_radius
from .sweep import AXES, co_users, run_sweep, sweep_values, user_row
from .validation import run_validation

EXIT_OK, EXIT_ERROR, EXIT_VALIDATION = 0, 1, 2

# flag -> ScenarioConfig field
_FLAGS = {
    "cell_radius": "cell_radius_m",
    "ring_radius": "ring_radius_m",
    "antennas": "antenna_count",
    "users": "user_count",
    "exponent": "exponent_v",
    "power_db": "power_db",
    "normalization": "power_normalization",
    "trials": "trials",
    "seed": "master_seed",
    "user_radius": "user_radius_m",
    "workers": "workers",
    "min_distance": "min_distance_m",
    "output": "output_path",
}


def _scenario_parser():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("scenario")
    g.add_argument("--config", help="key = value scenario file")
    g.add_argument("--cell-radius", type=float, help="cell radius R in metres")
    g.add_argument("--ring-radius", type=float, help="antenna ring radius r in metres")
    g.add_argument("--antennas", type=int, help="number of antennas M")
    g.add_argument("--users", type=int, help="number of users K")
    g.add_argument("--exponent", type=float, help="path-loss exponent v in [2, 6]")
    g.add_argument("--power-db", type=float, help="per-user power P in dB")
    g.add_argument("--normalization", choices=("raw", "midpoint"))
    g.add_argument("--trials", type=int, help="Monte Carlo trials (0 disables simulation)")
    g.add_argument("--seed", type=lambda s: int(s, 0), help="master seed")
    g.add_argument("--user-radius", type=float, help="user distance r_u from the centre")
    g.add_argument("--workers", type=int, help="worker processes for Monte Carlo trials")
    g.add_argument("--min-distance", type=float, help="minimum antenna-user distance in metres")
    g.add_argument("--output", help="write the table or record to this CSV file")
    g.add_argument("--write-config", metavar="PATH",
                   help="also save the resolved scenario to PATH")
    return p


def build_parser():
    common = _scenario_parser()
    parser = argparse.ArgumentParser(
        prog="circmimo",
        description="Uplink ZF rates for massive MIMO with a circular antenna ring.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("rate-user", parents=[common], help="rate of one user at --user-radius")
    sub.add_parser("rate-average", parents=[common], help="cell-average rate per user")

    sw = sub.add_parser("sweep", parents=[common], help="sweep one parameter to CSV")
    sw.add_argument("--axis", choices=AXES, required=True)
    sw.add_argument("--start", type=float)
    sw.add_argument("--stop", type=float)
    sw.add_argument("--steps", type=int)
    sw.add_argument("--values", help="comma-separated sweep values")
    sw.add_argument("--metric", choices=("user", "average"))

    sub.add_parser("optimize", parents=[common], help="optimal ring radius")

    val = sub.add_parser("validate", parents=[common], help="run the numerical self-checks")
    val.add_argument("--corrupt-coefficient", type=float, default=1.0, help=argparse.SUPPRESS)
    return parser


def resolve_scenario(args, environ=None):
    cfg = default_config(environ)
    if args.config:
        cfg = load_config(args.config, cfg)
    overrides = {field: getattr(args, flag) for flag, field in _FLAGS.items()
                 if getattr(args, flag, None) is not None}
    cfg = cfg.replace(**overrides).validate()
    if args.write_config:
        with open(args.write_config, "w", encoding="utf-8") as fh:
            fh.write(dump_config(cfg))
    return cfg


def _emit_record(record, cfg, out):
    for key, value in record.items():
        out.write(f"{key} = {_text(value)}\n")
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(record) + "\n")
            fh.write(",".join(_text(v) for v in record.values()) + "\n")


def _text(value):
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def cmd_rate_user(cfg, out):
    params = cfg.system_params()
    r_u = cfg.user_radius_m
    # probe the analytic side first so a user on the ring fails before any simulation
    pair = analytic.rate_bounds(params, r_u)

    def companions(geom, layout):
        return co_users(geom, layout, cfg.user_count - 1, cfg.master_seed, cfg.min_distance_m)

    row = user_row(cfg, params, r_u, companions)
    if row.note.startswith("mc skipped"):
        raise DomainError(row.note)
    record = {
        "user_radius_m": r_u,
        "asymptotic_bits": row.asymptotic_bits,
        "b1_bits": row.b1_bits,
        "b2_bits": row.b2_bits,
        "ordering": pair.ordering.value,
    }
    if row.mc_bits is not None:
        record["mc_bits"] = row.mc_bits
        record["mc_half_width"] = row.mc_half_width
        record["mc_trials"] = cfg.trials
        record["master_seed"] = cfg.master_seed
    _emit_record(record, cfg, out)
    return EXIT_OK


def cmd_rate_average(cfg, out):
    params = cfg.system_params()
    report = average_report(params, cfg.mc_config(params))
    record = {
        "bar_b1": report.bar_b1_bits,
        "bar_b2": report.bar_b2_bits,
        "quadrature": report.quadrature_bits,
        "quadrature_err": report.quadrature_abs_err,
    }
    if report.mc is not None:
        record["mc"] = report.mc.mean_rate_bits
        record["mc_half_width"] = report.mc.half_width_95
        record["mc_trials"] = report.mc.trials_used
        record["master_seed"] = cfg.master_seed
    _emit_record(record, cfg, out)
    return EXIT_OK


def cmd_sweep(cfg, args, out):
    values = None
    if args.values:
        try:
            values = [float(v) for v in args.values.split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError("values", str(exc)) from exc
    points = sweep_values(args.axis, args.start, args.stop, args.steps, values)
    table = run_sweep(cfg, args.axis, points, args.metric)
    text = table.to_csv()
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_optimize(cfg, out):
    sol = solve_radius(cfg.exponent_v, cfg.cell_radius_m)
    record = {
        "exponent_v": sol.exponent,
        "t0": sol.t0,
        "r_opt_m": sol.r_opt_m,
        "ratio": sol.ratio,
        "residual": sol.residual,
        "limit": str(sol.limit).lower(),
    }
    _emit_record(record, cfg, out)
    return EXIT_OK


def cmd_validate(cfg, args, out):
    results = run_validation(cfg, coefficient_scale=args.corrupt_coefficient)
    for res in results:
        out.write(json.dumps(res.as_dict(), sort_keys=True) + "\n")
    failed = [r.criterion for r in results if not r.passed]
    out.write(json.dumps({"passed": not failed, "failed": failed}) + "\n")
    return EXIT_VALIDATION if failed else EXIT_OK


def main(argv=None, out=None, environ=None):
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_scenario(args, environ)
        if args.command == "rate-user":
            return cmd_rate_user(cfg, out)
        if args.command == "rate-average":
            return cmd_rate_average(cfg, out)
        if args.command == "sweep":
            return cmd_sweep(cfg, args, out)
        if args.command == "optimize":
            return cmd_optimize(cfg, out)
        return cmd_validate(cfg, args, out)
    except SingularityError as exc:
        print(f"circmimo: singular configuration: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ConfigError, DomainError, OSError) as exc:
        print(f"circmimo: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
