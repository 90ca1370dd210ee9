"""Amplifier, baseband and total base-station power; energy efficiency.

Two amplifier families are modelled.  A traditional PA (TPA) draws
``sqrt(p * p_max) / eta`` for mean output ``p``; an envelope-tracking PA
(ET-PA) draws ``(p + alpha * p_max) / ((1 + alpha) * eta)``.  Both reach the
peak efficiency ``eta`` at ``p = p_max``.

A :class:`PaSpec` with ``p_max_pa=None`` describes the *variable* amplifier
whose maximum output tracks the mean output plus the PAPR headroom, which
is the upper-bound reference used for the global optimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, HeadroomExceededError
from .geometry import CouplingStats
from .link import SystemConfig, per_user_rate, sinr_coefficient

FAMILIES = ("etpa", "tpa")


@dataclass(frozen=True)
class PaSpec:
    family: str = "etpa"
    p_max_pa: float | None = None  # W; None means variable headroom
    eta: float = 0.8
    alpha: float = 0.0082
    headroom_db: float = 8.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown PA family {self.family!r}; expected one of {FAMILIES}")
        if not (0 < self.eta <= 1):
            raise ConfigError(f"eta must lie in (0, 1], got {self.eta}")
        if self.family == "etpa" and not self.alpha > 0:
            raise ConfigError(f"ET-PA needs alpha > 0, got {self.alpha}")
        if self.p_max_pa is not None and not self.p_max_pa > 0:
            raise ConfigError(f"p_max_pa must be positive, got {self.p_max_pa}")

    @classmethod
    def from_config(cls, cfg: SystemConfig, family: str = "etpa", p_max_pa: float | None = None):
        return cls(family, p_max_pa, cfg.eta, cfg.alpha, cfg.headroom_db)

    @property
    def variable(self) -> bool:
        return self.p_max_pa is None

    @property
    def headroom(self) -> float:
        return 10.0 ** (self.headroom_db / 10.0)

    @property
    def max_mean_power(self) -> float:
        if self.variable:
            return math.inf
        return self.p_max_pa / self.headroom

    @property
    def c1_star(self) -> float:
        return self.alpha / ((1.0 + self.alpha) * self.eta)

    def with_pmax(self, p_max_pa: float | None) -> "PaSpec":
        return replace(self, p_max_pa=p_max_pa)

    def label(self) -> str:
        return "variable" if self.variable else f"{self.p_max_pa:.6g}W"


@dataclass(frozen=True)
class PowerCoeffs:
    """Decomposition ``P = c0 + c1*M + sqrt(c2*M) + rate_coeff*K*R``."""

    c0: float
    c1: float
    c2: float
    c1_star: float
    rate_coeff: float


def min_active_antennas(pa: PaSpec, downlink_power: float) -> int:
    """Fewest antennas that can carry ``downlink_power`` within the headroom."""
    if pa.variable:
        return 1
    need = downlink_power * pa.headroom / pa.p_max_pa
    # candidates are built as (P_c/M)*headroom, so guard against round-off
    return max(1, math.ceil(need * (1.0 - 1e-12)))


def pa_input_power(pa: PaSpec, p, check: bool = True):
    """Input power drawn by one amplifier at mean output ``p`` (watts)."""
    p = np.asarray(p, dtype=float)
    if np.any(p < 0):
        raise ValueError("mean output power must be non-negative")
    if pa.variable:
        p_max = p * pa.headroom
    else:
        if check and np.any(p > pa.max_mean_power * (1.0 + 1e-12)):
            raise HeadroomExceededError(
                f"mean output {float(np.max(p)):.6g} W exceeds "
                f"{pa.max_mean_power:.6g} W allowed by P_max={pa.p_max_pa} W"
            )
        p_max = pa.p_max_pa
    if pa.family == "tpa":
        out = np.sqrt(p * p_max) / pa.eta
    else:
        out = (p + pa.alpha * p_max) / ((1.0 + pa.alpha) * pa.eta)
    return float(out) if np.ndim(out) == 0 else out


def pa_array_power(pa: PaSpec, total_power: float, antennas, check: bool = True):
    """Input power of ``antennas`` equal-power amplifiers sharing ``total_power``."""
    m = np.asarray(antennas, dtype=float)
    if np.any(m < 1):
        raise ValueError("need at least one antenna")
    try:
        out = m * pa_input_power(pa, total_power / m, check=check)
    except HeadroomExceededError as exc:
        raise HeadroomExceededError(
            f"{exc}; activate at least {min_active_antennas(pa, total_power)} antennas"
        ) from None
    return float(out) if np.ndim(out) == 0 else out


def _bb_terms(cfg: SystemConfig, users):
    k = users
    flops = cfg.bandwidth / cfg.l_bs
    c0_bb = cfg.p_syn + flops / (3.0 * cfg.coherence_block) * k**3
    c12 = 3.0 * flops / cfg.coherence_block if cfg.quadratic_bb_per_block else 3.0 * flops
    c1_bb = cfg.p_bs + flops * (2.0 + 1.0 / cfg.coherence_block) * k + c12 * k**2
    return c0_bb, c1_bb


def baseband_power(cfg: SystemConfig, antennas, users, rate):
    """Circuit and baseband power, including rate-proportional coding."""
    if np.any(np.asarray(antennas) < 1) or users < 0 or np.any(np.asarray(rate) < 0):
        raise ValueError("need M >= 1, K >= 0, R >= 0")
    c0_bb, c1_bb = _bb_terms(cfg, users)
    return c0_bb + np.asarray(antennas) * c1_bb + cfg.coding_power * users * np.asarray(rate)


def total_power(cfg: SystemConfig, pa: PaSpec, antennas, users, rate, check: bool = True):
    out = (
        pa_array_power(pa, cfg.downlink_power, antennas, check=check)
        + baseband_power(cfg, antennas, users, rate)
        + cfg.p_oth
    )
    return float(out) if np.ndim(out) == 0 else out


def power_coeffs(cfg: SystemConfig, pa: PaSpec, users: int) -> PowerCoeffs:
    if users < 0:
        raise ValueError("users must be >= 0")
    c0_bb, c1_bb = _bb_terms(cfg, users)
    p_c = cfg.downlink_power
    c0 = c0_bb + cfg.p_oth
    c1 = c1_bb
    c2 = 0.0
    if pa.family == "etpa":
        c0 += p_c / ((1.0 + pa.alpha) * pa.eta)
        if pa.variable:
            # alpha*P_max*M collapses to alpha*P_c*headroom
            c0 += pa.c1_star * p_c * pa.headroom
        else:
            c1 += pa.c1_star * pa.p_max_pa
    else:
        if pa.variable:
            c0 += p_c * math.sqrt(pa.headroom) / pa.eta
        else:
            c2 = p_c * pa.p_max_pa / pa.eta**2
    return PowerCoeffs(c0, c1, c2, pa.c1_star, cfg.coding_power)


def ee_from_rate(coeffs: PowerCoeffs, antennas, users: int, rate):
    m = np.asarray(antennas, dtype=float)
    power = coeffs.c0 + coeffs.c1 * m + np.sqrt(coeffs.c2 * m) + coeffs.rate_coeff * users * rate
    return users * rate / power, power


def energy_efficiency(cfg: SystemConfig, pa: PaSpec, coupling: CouplingStats, antennas, users: int):
    """Sum throughput over total power, bit/J.

    Raises if the antenna count violates zero forcing or cannot carry the
    downlink power within the amplifier's headroom.
    """
    if users == 0:
        return 0.0 if np.ndim(antennas) == 0 else np.zeros(np.shape(antennas))
    m = np.asarray(antennas)
    m_min = min_active_antennas(pa, cfg.downlink_power)
    if np.any(m < m_min):
        raise HeadroomExceededError(f"P_max={pa.p_max_pa} W needs at least {m_min} antennas")
    gamma = sinr_coefficient(cfg, coupling, users)
    rate = per_user_rate(cfg, gamma, m, users)
    ee, _ = ee_from_rate(power_coeffs(cfg, pa, users), m, users, rate)
    return float(ee) if np.ndim(ee) == 0 else ee
