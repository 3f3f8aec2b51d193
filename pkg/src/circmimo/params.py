"""System parameters and transmit power normalization."""

from dataclasses import dataclass
from enum import Enum

from .errors import DomainError

MIN_EXPONENT = 2.0
MAX_EXPONENT = 6.0


class PowerNormalization(str, Enum):
    """How the nominal per-user power ``P`` maps to the transmitted power.

    ``MIDPOINT`` scales by ``(R/2)**v`` so that a user 500 m from an antenna
    in a 1000 m cell sees an average received SNR of ``P``.
    """

    RAW = "raw"
    MIDPOINT = "midpoint"


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


def check_exponent(v):
    if not MIN_EXPONENT <= v <= MAX_EXPONENT:
        raise DomainError(f"path-loss exponent must lie in [2, 6], got {v}")


def effective_power(power, v, cell_radius, normalization=PowerNormalization.MIDPOINT):
    """Linear per-user transmit power after normalization."""
    normalization = PowerNormalization(normalization)
    if normalization is PowerNormalization.MIDPOINT:
        return power * (cell_radius / 2.0) ** v
    return power


@dataclass(frozen=True)
class SystemParams:
    """Scenario parameters shared by the analytic, averaging and optimizer code.

    Defaults reproduce the reference setup: R = 1000 m, r = 500 m, K = 9,
    v = 3.6, P = 10 dB with midpoint normalization.
    """

    cell_radius: float = 1000.0
    ring_radius: float = 500.0
    antenna_count: int = 300
    user_count: int = 9
    exponent: float = 3.6
    power_db: float = 10.0
    normalization: PowerNormalization = PowerNormalization.MIDPOINT

    def __post_init__(self):
        object.__setattr__(self, "normalization", PowerNormalization(self.normalization))
        if not self.cell_radius > 0:
            raise DomainError(f"cell radius must be positive, got {self.cell_radius}")
        if not 0 <= self.ring_radius <= self.cell_radius:
            raise DomainError(
                f"ring radius must lie in [0, {self.cell_radius}], got {self.ring_radius}"
            )
        if self.antenna_count < 1:
            raise DomainError(f"antenna count must be >= 1, got {self.antenna_count}")
        if self.user_count < 1:
            raise DomainError(f"user count must be >= 1, got {self.user_count}")
        check_exponent(self.exponent)

    @property
    def power(self):
        """Nominal linear power ``P`` before normalization."""
        return db_to_linear(self.power_db)

    @property
    def effective_power(self):
        return effective_power(self.power, self.exponent, self.cell_radius, self.normalization)
