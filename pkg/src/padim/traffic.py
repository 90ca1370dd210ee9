"""State-dependent M/G/m/m loss queue driven by a daily load profile.

With ``n`` users in the cell every user gets rate ``R_n``; relative to the
single-user rate this slows service by ``f(n) = R_n / R_1``.  The limiting
distribution is insensitive to the service-time law:

    pi(n) ∝ a**n / (n! * f(1) * ... * f(n)),   a = lambda * sigma / R_1

and is evaluated in the log domain because ``m`` can exceed 170.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import ConfigError, NoConvergenceError

HOURS = 24
DEFAULT_SIGMA_BITS = 1e6
DEFAULT_TARGET_BLOCKING = 0.02
BUNDLED_PROFILES = ("earth_europe", "commercial", "residential")


@dataclass(frozen=True)
class QueueInputs:
    m: int
    sigma_t: float  # bits per session
    rates: np.ndarray  # R_1..R_m, bit/s
    arrival_rate: float = 0.0  # sessions/s

    def __post_init__(self):
        rates = np.asarray(self.rates, dtype=float)
        object.__setattr__(self, "rates", rates)
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if rates.shape != (self.m,):
            raise ValueError(f"expected {self.m} rates, got {rates.shape}")
        if np.any(rates <= 0):
            raise ValueError("all per-state rates must be positive")
        if not self.sigma_t > 0:
            raise ValueError("sigma_t must be positive")
        if self.arrival_rate < 0:
            raise ValueError("arrival rate must be non-negative")

    def with_arrival_rate(self, lam: float) -> "QueueInputs":
        return replace(self, arrival_rate=float(lam))

    @property
    def offered_load(self) -> float:
        """``lambda * sigma / R_1``, in erlangs of single-user service."""
        return self.arrival_rate * self.sigma_t / self.rates[0]

    @classmethod
    def from_table(cls, table, sigma_t: float = DEFAULT_SIGMA_BITS, arrival_rate: float = 0.0):
        return cls(table.m, sigma_t, np.asarray(table.rate[1:], dtype=float), arrival_rate)


@dataclass(frozen=True)
class StateDistribution:
    pi: np.ndarray

    @property
    def m(self) -> int:
        return len(self.pi) - 1

    @property
    def blocking(self) -> float:
        return float(self.pi[-1])

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.pi)

    def mean(self) -> float:
        return float(np.dot(np.arange(len(self.pi)), self.pi))


@dataclass(frozen=True)
class DailyProfile:
    hourly_load: np.ndarray
    name: str = "profile"

    def __post_init__(self):
        load = np.asarray(self.hourly_load, dtype=float)
        object.__setattr__(self, "hourly_load", load)
        if load.shape != (HOURS,):
            raise ConfigError(f"a daily profile needs {HOURS} hourly values, got {load.size}")
        if np.any(load <= 0) or np.any(load > 1):
            raise ConfigError("hourly loads must lie in (0, 1]")
        if not math.isclose(float(load.max()), 1.0, rel_tol=0, abs_tol=1e-12):
            raise ConfigError(f"profile peak must be 1.0, got {load.max()}")


def log_weights(q: QueueInputs) -> np.ndarray:
    n = np.arange(q.m + 1)
    log_f = np.log(q.rates / q.rates[0])
    log_fprod = np.concatenate([[0.0], np.cumsum(log_f)])
    return n * math.log(q.offered_load) - gammaln(n + 1) - log_fprod


def queue_distribution(q: QueueInputs) -> StateDistribution:
    if q.arrival_rate == 0.0:
        pi = np.zeros(q.m + 1)
        pi[0] = 1.0
        return StateDistribution(pi)
    lw = log_weights(q)
    return StateDistribution(np.exp(lw - logsumexp(lw)))


def erlang_b(servers: int, offered_load: float) -> float:
    """Blocking probability of an M/M/c/c system, by the standard recursion."""
    b = 1.0
    for c in range(1, servers + 1):
        b = offered_load * b / (c + offered_load * b)
    return b


def erlang_distribution(servers: int, offered_load: float) -> np.ndarray:
    """Truncated-Poisson state probabilities built up by ratio recursion."""
    w = np.ones(servers + 1)
    for n in range(1, servers + 1):
        w[n] = w[n - 1] * offered_load / n
    # w can overflow for huge loads; the tests stay within float range
    return w / w.sum()


def solve_lambda_max(
    q_template: QueueInputs,
    target_blocking: float = DEFAULT_TARGET_BLOCKING,
    tol: float = 1e-12,
    max_iter: int = 200,
) -> float:
    """Arrival rate at which the top state has probability ``target_blocking``."""
    if not 0 < target_blocking < 1:
        raise ValueError("target blocking must lie in (0, 1)")

    def blocking(lam):
        return queue_distribution(q_template.with_arrival_rate(lam)).blocking

    unit = q_template.rates[0] / q_template.sigma_t  # offered load of 1
    lo = hi = unit
    b_hi = blocking(hi)
    for _ in range(max_iter):
        if b_hi >= target_blocking:
            break
        lo, hi = hi, hi * 2.0
        b_new = blocking(hi)
        if b_new < b_hi:
            raise NoConvergenceError("blocking is not increasing in the arrival rate")
        b_hi = b_new
    else:
        raise NoConvergenceError("could not bracket the target blocking from above")
    b_lo = blocking(lo)
    for _ in range(max_iter):
        if b_lo <= target_blocking:
            break
        hi, lo = lo, lo / 2.0
        b_lo = blocking(lo)
    else:
        raise NoConvergenceError("could not bracket the target blocking from below")

    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        b_mid = blocking(mid)
        if abs(b_mid - target_blocking) <= tol or hi - lo <= 4 * np.spacing(hi):
            return float(mid)
        if b_mid < target_blocking:
            lo = mid
        else:
            hi = mid
    raise NoConvergenceError(f"bisection did not converge in {max_iter} iterations")


def hourly_distributions(profile: DailyProfile, lambda_max: float, q_template: QueueInputs):
    return [
        queue_distribution(q_template.with_arrival_rate(load * lambda_max))
        for load in profile.hourly_load
    ]


def parse_profile(text: str, name: str = "profile") -> DailyProfile:
    values = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise ConfigError(f"profile {name}: line {lineno}: not a number: {line!r}") from None
    return DailyProfile(np.array(values), name)


def load_profile(source: str | Path) -> DailyProfile:
    """Read a 24-line profile file, or a bundled profile by name."""
    if str(source) in BUNDLED_PROFILES:
        text = resources.files("padim.profiles").joinpath(f"{source}.txt").read_text()
        return parse_profile(text, str(source))
    path = Path(source)
    if not path.is_file():
        raise ConfigError(f"profile file not found: {path}")
    return parse_profile(path.read_text(), path.stem)
