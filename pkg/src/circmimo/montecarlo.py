"""Monte Carlo estimation of ergodic zero-forcing uplink rates.

Every trial draws from its own Philox substream keyed by
``(master_seed, stream tag)`` with the trial index in the counter's top
word, so a trial's samples do not depend on which worker ran it or in what
order. Per-trial results are gathered in trial-index order before any
reduction, which makes the reported means bit-identical for any worker
count.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np
import scipy.linalg

from .channel import DEFAULT_MIN_DISTANCE, path_loss_matrix, rayleigh_fading, unit_phase_fading
from .errors import DomainError, SingularChannelError
from .geometry import distance_matrix
from .params import PowerNormalization, db_to_linear, effective_power

DEFAULT_TRIALS = 2000
DEFAULT_SEED = 20150901
MAX_CONSECUTIVE_REJECTIONS = 10
CONDITION_LIMIT = 1e12
Z95 = 1.959963984540054

# stream tags keep the different experiments on disjoint keys
STREAM_ERGODIC = 1
STREAM_CELL_AVERAGE = 2
STREAM_PROBE = 3

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class McConfig:
    trials: int = DEFAULT_TRIALS
    master_seed: int = DEFAULT_SEED
    power: float = 10.0
    power_normalization: PowerNormalization = PowerNormalization.MIDPOINT
    workers: int = 1
    min_distance: float = DEFAULT_MIN_DISTANCE

    def __post_init__(self):
        object.__setattr__(
            self, "power_normalization", PowerNormalization(self.power_normalization)
        )
        if self.trials < 1:
            raise DomainError(f"trials must be >= 1, got {self.trials}")
        if not self.power > 0:
            raise DomainError(f"power must be positive, got {self.power}")
        if self.workers < 1:
            raise DomainError(f"workers must be >= 1, got {self.workers}")

    @classmethod
    def from_db(cls, power_db, **kwargs):
        return cls(power=db_to_linear(power_db), **kwargs)

    @classmethod
    def for_params(cls, params, **kwargs):
        """Monte Carlo config carrying the power settings of ``params``."""
        return cls(power=params.power, power_normalization=params.normalization, **kwargs)

    def effective_power(self, v, cell_radius):
        return effective_power(self.power, v, cell_radius, self.power_normalization)


@dataclass(frozen=True)
class RateEstimate:
    """Sample mean of per-trial rates with a normal-approximation 95% half-width.

    With a single trial the half-width is undefined and reported as 0.
    """

    mean_rate_bits: float
    half_width_95: float
    trials_used: int
    rejected: int = 0

    @classmethod
    def from_samples(cls, samples, rejected=0):
        samples = np.asarray(samples, dtype=float)
        n = samples.size
        mean = float(np.mean(samples))
        hw = float(Z95 * np.std(samples, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return cls(mean, hw, n, int(rejected))


def trial_rng(master_seed, tag, index):
    """Counter-based generator for one trial."""
    key = [master_seed & _MASK64, tag & _MASK64]
    return np.random.Generator(np.random.Philox(key=key, counter=[0, 0, 0, index]))


def zf_noise_gains(G):
    """Diagonal of ``(G^H G)^{-1}``; raises on a numerically singular Gram."""
    G = np.asarray(G)
    if G.ndim == 1:
        G = G[:, None]
    M, K = G.shape
    if M < K:
        raise DomainError(f"zero forcing needs M >= K, got M={M}, K={K}")
    gram = G.conj().T @ G
    if np.linalg.cond(gram) > CONDITION_LIMIT:
        raise SingularChannelError("Gram matrix condition number above 1e12")
    try:
        chol = scipy.linalg.cholesky(gram, lower=True)
    except np.linalg.LinAlgError as exc:
        raise SingularChannelError(str(exc)) from exc
    # inv(gram) = L^{-H} L^{-1}, so its diagonal is the column norms of L^{-1}
    linv = scipy.linalg.solve_triangular(chol, np.eye(K), lower=True)
    return np.sum(np.abs(linv) ** 2, axis=0)


def zf_rates(G, power):
    """Instantaneous ZF rate of every user, ``log2(1 + P / [(G^H G)^{-1}]_kk)``."""
    return np.log2(1.0 + power / zf_noise_gains(G))


def zf_instantaneous_rate(channel, power, k):
    """ZF rate in bits/s/Hz of user ``k`` (0-based) for one channel realization."""
    G = getattr(channel, "matrix", channel)
    return float(zf_rates(G, power)[k])


def draw_rates(sqrt_beta, power, rng, fading=rayleigh_fading):
    """Draw fading until the Gram matrix is usable; return ``(rates, rejections)``."""
    for rejected in range(MAX_CONSECUTIVE_REJECTIONS + 1):
        h = fading(rng, sqrt_beta.shape)
        try:
            return zf_rates(h * sqrt_beta, power), rejected
        except SingularChannelError:
            continue
    raise SingularChannelError(
        f"{MAX_CONSECUTIVE_REJECTIONS} consecutive singular channel draws"
    )


def _ergodic_chunk(indices, sqrt_beta, power, seed, fading):
    out = np.empty((len(indices), sqrt_beta.shape[1]))
    rejected = 0
    for row, idx in enumerate(indices):
        out[row], rej = draw_rates(sqrt_beta, power, trial_rng(seed, STREAM_ERGODIC, idx), fading)
        rejected += rej
    return out, rejected


def run_trials(chunk_fn, trials, workers=1):
    """Evaluate ``chunk_fn(indices)`` over ``range(trials)``.

    ``chunk_fn`` returns ``(rows, rejected)``; rows are stacked in trial
    order regardless of how the index range was split across workers.
    """
    if workers <= 1 or trials < 2:
        return chunk_fn(range(trials))
    bounds = np.linspace(0, trials, min(workers * 4, trials) + 1).astype(int)
    chunks = [range(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(chunk_fn, chunks))
    return np.concatenate([p[0] for p in parts]), sum(p[1] for p in parts)


def ergodic_rates(layout, users, v, cfg, fading=rayleigh_fading):
    """Ergodic ZF rate of every user in ``users`` over ``cfg.trials`` fading draws."""
    if layout.antenna_count < len(users):
        raise DomainError(f"need M >= K, got M={layout.antenna_count}, K={len(users)}")
    beta = path_loss_matrix(distance_matrix(layout, users), v, cfg.min_distance)
    power = cfg.effective_power(v, layout.geometry.cell_radius_m)
    chunk = partial(
        _ergodic_chunk,
        sqrt_beta=np.sqrt(beta.values),
        power=power,
        seed=cfg.master_seed,
        fading=fading,
    )
    rates, rejected = run_trials(chunk, cfg.trials, cfg.workers)
    return [RateEstimate.from_samples(rates[:, k], rejected) for k in range(rates.shape[1])]


def ergodic_rate(layout, users, v, cfg, k, fading=rayleigh_fading):
    """Ergodic ZF rate of user ``k`` (0-based) in the set ``users``."""
    return ergodic_rates(layout, users, v, cfg, fading)[k]


@dataclass(frozen=True)
class ProbeReport:
    """Empirical law-of-large-numbers check for long i.n.i.d. vectors.

    ``norm_*`` fields describe ``|p^H p / M - mean(sigma_p^2)|``,
    ``cross_*`` fields ``|p^H q| / M``. The envelopes are the Chebyshev
    bounds ``C / (M eps^2)`` on the probability of exceeding ``epsilon``.
    """

    antenna_count: int
    trials: int
    epsilon: float
    mean_norm_deviation: float
    mean_sq_norm_deviation: float
    norm_exceed_fraction: float
    norm_envelope: float
    mean_cross: float
    mean_sq_cross: float
    cross_exceed_fraction: float
    cross_envelope: float


_FOURTH_MOMENT = {"gaussian": 2.0, "unit_phase": 1.0}
_PROBE_FADING = {"gaussian": rayleigh_fading, "unit_phase": unit_phase_fading}


def lln_probe(variance_profile, trials, rng, *, q_profile=None, distribution="gaussian",
              epsilon=0.05):
    """Sample ``p`` and ``q`` with per-entry variances and measure the LLN deviations.

    Entries are ``sqrt(sigma_i^2) * h_i`` with ``h_i`` drawn from
    ``distribution`` (``"gaussian"`` or ``"unit_phase"``). ``q_profile``
    defaults to ``variance_profile``; pass zeros to get ``q = 0``.
    """
    if distribution not in _FOURTH_MOMENT:
        raise ValueError(f"unknown distribution {distribution!r}")
    sp = np.asarray(variance_profile, dtype=float)
    sq = sp if q_profile is None else np.asarray(q_profile, dtype=float)
    if sp.shape != sq.shape or sp.ndim != 1:
        raise ValueError("variance profiles must be 1-D and of equal length")
    if (sp < 0).any() or (sq < 0).any():
        raise ValueError("variances must be nonnegative")
    M = sp.size
    draw = _PROBE_FADING[distribution]
    kappa = _FOURTH_MOMENT[distribution]

    p = draw(rng, (trials, M)) * np.sqrt(sp)
    q = draw(rng, (trials, M)) * np.sqrt(sq)
    norm_dev = np.abs(np.sum(np.abs(p) ** 2, axis=1) / M - sp.mean())
    cross = np.abs(np.sum(p.conj() * q, axis=1)) / M

    # E|p_i|^4 = kappa sigma_i^4 and E|p_i q_i|^2 = sigma_p,i^2 sigma_q,i^2
    c_norm = kappa * float(np.max(sp ** 2)) if M else 0.0
    c_cross = float(np.max(sp * sq)) if M else 0.0
    return ProbeReport(
        antenna_count=M,
        trials=trials,
        epsilon=epsilon,
        mean_norm_deviation=float(norm_dev.mean()),
        mean_sq_norm_deviation=float(np.mean(norm_dev ** 2)),
        norm_exceed_fraction=float(np.mean(norm_dev >= epsilon)),
        norm_envelope=c_norm / (M * epsilon ** 2),
        mean_cross=float(cross.mean()),
        mean_sq_cross=float(np.mean(cross ** 2)),
        cross_exceed_fraction=float(np.mean(cross >= epsilon)),
        cross_envelope=c_cross / (M * epsilon ** 2),
    )
