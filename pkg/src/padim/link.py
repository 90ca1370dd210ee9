"""System parameters, SINR coefficient and zero-forcing downlink rate."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, OverheadOverflowError, ZFViolationError
from .geometry import CouplingStats

PILOT_MODES = ("current-users", "fixed-max-users")


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class SystemConfig:
    """Scalar system parameters; defaults reproduce the reference scenario."""

    bandwidth: float = 20e6  # Hz
    coherence_time: float = 10e-3  # s
    coherence_bandwidth: float = 180e3  # Hz
    coherence_block: float = 1800.0  # symbols
    total_noise: float = dbm_to_watts(-96.0)  # W, noise power over the band
    downlink_power: float = 20.0  # W, fixed total transmit power per BS
    pilot_overhead_mode: str = "current-users"
    pilot_users: int = 300  # K used for pilots in fixed-max-users mode
    # amplifier defaults
    eta: float = 0.8
    alpha: float = 0.0082
    headroom_db: float = 8.0
    # circuit / baseband
    p_syn: float = 2.0  # W
    p_bs: float = 1.0  # W per antenna
    p_oth: float = 18.0  # W
    p_cod: float = 0.1  # W/(Gbit/s)
    p_dec: float = 0.8  # W/(Gbit/s)
    l_bs: float = 12.8e9  # flops/W
    # charge the M*K^2 channel-estimation/precoder cost once per coherence
    # block (B/U), like the K^3 term; False uses B per symbol
    quadratic_bb_per_block: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        expected = self.coherence_bandwidth * self.coherence_time
        if not math.isclose(self.coherence_block, expected, rel_tol=1e-9):
            raise ConfigError(
                f"coherence_block U={self.coherence_block} must equal "
                f"coherence_bandwidth*coherence_time={expected}"
            )
        positive = {
            "bandwidth": self.bandwidth,
            "coherence_time": self.coherence_time,
            "coherence_bandwidth": self.coherence_bandwidth,
            "total_noise": self.total_noise,
            "downlink_power": self.downlink_power,
            "alpha": self.alpha,
            "p_syn": self.p_syn,
            "p_bs": self.p_bs,
            "p_oth": self.p_oth,
            "p_cod": self.p_cod,
            "p_dec": self.p_dec,
            "l_bs": self.l_bs,
        }
        for name, value in positive.items():
            if not (value > 0 and math.isfinite(value)):
                raise ConfigError(f"{name} must be positive and finite, got {value}")
        if not (0 < self.eta <= 1):
            raise ConfigError(f"eta must lie in (0, 1], got {self.eta}")
        if self.headroom_db < 0:
            raise ConfigError(f"headroom_db must be >= 0, got {self.headroom_db}")
        if self.pilot_overhead_mode not in PILOT_MODES:
            raise ConfigError(f"pilot_overhead_mode must be one of {PILOT_MODES}")
        if self.pilot_users < 1:
            raise ConfigError("pilot_users must be >= 1")

    @property
    def coding_power(self) -> float:
        """P_COD + P_DEC in joules per bit."""
        return (self.p_cod + self.p_dec) * 1e-9

    @property
    def headroom(self) -> float:
        return 10.0 ** (self.headroom_db / 10.0)


def sinr_coefficient(cfg: SystemConfig, coupling: CouplingStats, users: int) -> float:
    if users < 1:
        raise ValueError(f"users must be >= 1, got {users}")
    denom = coupling.lambda_cc * cfg.total_noise + coupling.interference_sum
    return (cfg.downlink_power / users) / denom


def pilot_users(cfg: SystemConfig, users: int) -> int:
    return users if cfg.pilot_overhead_mode == "current-users" else cfg.pilot_users


def per_user_rate(cfg: SystemConfig, gamma: float, antennas, users: int):
    """ZF rate per user in bit/s; ``antennas`` may be an integer array."""
    m = np.asarray(antennas)
    if np.any(m <= users):
        raise ZFViolationError(f"zero forcing needs M > K (K={users}, min M={int(np.min(m))})")
    k_pilot = pilot_users(cfg, users)
    if k_pilot >= cfg.coherence_block:
        raise OverheadOverflowError(
            f"{k_pilot} pilots do not fit in a coherence block of {cfg.coherence_block}"
        )
    prelog = (1.0 - k_pilot / cfg.coherence_block) * cfg.bandwidth
    rate = prelog * np.log2(1.0 + gamma * (m - users))
    return float(rate) if np.ndim(rate) == 0 else rate
