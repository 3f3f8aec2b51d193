"""Scenario configuration: flat ``key = value`` files with ``#`` comments."""

import dataclasses
import os
from dataclasses import dataclass, fields

from .errors import ConfigError, DomainError
from .montecarlo import DEFAULT_SEED, DEFAULT_TRIALS, McConfig
from .params import PowerNormalization, SystemParams

SEED_ENV_VAR = "CIRCMIMO_SEED"


@dataclass(frozen=True)
class ScenarioConfig:
    cell_radius_m: float = 1000.0
    ring_radius_m: float = 500.0
    antenna_count: int = 300
    user_count: int = 9
    exponent_v: float = 3.6
    power_db: float = 10.0
    power_normalization: str = "midpoint"
    trials: int = DEFAULT_TRIALS
    master_seed: int = DEFAULT_SEED
    user_radius_m: float = 300.0
    workers: int = 1
    min_distance_m: float = 1.0
    output_path: str = ""

    def validate(self):
        """Raise :class:`ConfigError` naming the first invalid field."""
        checks = [
            ("cell_radius_m", self.cell_radius_m > 0, "must be positive"),
            ("ring_radius_m", 0 <= self.ring_radius_m <= self.cell_radius_m,
             "must lie in [0, cell_radius_m]"),
            ("antenna_count", self.antenna_count >= 1, "must be >= 1"),
            ("user_count", 1 <= self.user_count <= self.antenna_count,
             "must lie in [1, antenna_count]"),
            ("exponent_v", 2.0 <= self.exponent_v <= 6.0, "must lie in [2, 6]"),
            ("power_normalization",
             self.power_normalization in {n.value for n in PowerNormalization},
             "must be 'raw' or 'midpoint'"),
            ("trials", self.trials >= 0, "must be >= 0"),
            ("master_seed", 0 <= self.master_seed < 2 ** 64, "must fit in 64 unsigned bits"),
            ("user_radius_m", 0 <= self.user_radius_m <= self.cell_radius_m,
             "must lie in [0, cell_radius_m]"),
            ("workers", self.workers >= 1, "must be >= 1"),
            ("min_distance_m", self.min_distance_m >= 0, "must be >= 0"),
        ]
        for name, ok, message in checks:
            if not ok:
                raise ConfigError(name, f"{message} (got {getattr(self, name)!r})")
        return self

    def system_params(self, **changes):
        values = dict(
            cell_radius=self.cell_radius_m,
            ring_radius=self.ring_radius_m,
            antenna_count=self.antenna_count,
            user_count=self.user_count,
            exponent=self.exponent_v,
            power_db=self.power_db,
            normalization=self.power_normalization,
        )
        values.update(changes)
        try:
            return SystemParams(**values)
        except DomainError as exc:
            raise ConfigError("scenario", str(exc)) from exc

    def mc_config(self, params=None):
        """Monte Carlo settings, or ``None`` when ``trials`` is 0."""
        if self.trials == 0:
            return None
        params = params or self.system_params()
        return McConfig.for_params(
            params,
            trials=self.trials,
            master_seed=self.master_seed,
            workers=self.workers,
            min_distance=self.min_distance_m,
        )

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


_TYPES = {f.name: f.type for f in fields(ScenarioConfig)}


def coerce(name, raw):
    """Convert a raw string to the type of configuration field ``name``."""
    if name not in _TYPES:
        raise ConfigError(name, "unknown configuration key")
    cast = _TYPES[name]
    text = str(raw).strip()
    try:
        return int(text, 0) if cast is int else cast(text)
    except ValueError as exc:
        raise ConfigError(name, f"cannot parse {raw!r} as {cast.__name__}") from exc


def default_config(environ=None):
    """Defaults, with the seed taken from ``CIRCMIMO_SEED`` when set."""
    environ = os.environ if environ is None else environ
    cfg = ScenarioConfig()
    if environ.get(SEED_ENV_VAR):
        cfg = cfg.replace(master_seed=coerce("master_seed", environ[SEED_ENV_VAR]))
    return cfg


def parse_config(text, base=None):
    """Apply ``key = value`` lines from ``text`` on top of ``base``."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        values[key] = coerce(key, raw)
    return (base or ScenarioConfig()).replace(**values)


def load_config(path, base=None):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), base)


def dump_config(cfg):
    lines = ["# circmimo scenario"]
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        lines.append(f"{f.name} = {value!r}" if isinstance(value, float) else f"{f.name} = {value}")
    return "\n".join(lines) + "\n"
