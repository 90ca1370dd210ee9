"""Energy-efficient antenna counts per user load.

For an amplifier whose array power is affine in the antenna count (ET-PA,
or any variable-headroom PA) the optimum follows from the principal branch
of the Lambert W function; the integer answer is then refined against the
exact efficiency, which also carries the rate-proportional coding power.
Square-root (fixed TPA) power laws are handled by exhaustive search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, ScanTooShortError
from .geometry import CouplingStats
from .link import SystemConfig, per_user_rate, pilot_users, sinr_coefficient
from .power import PaSpec, ee_from_rate, min_active_antennas, power_coeffs, total_power

DEFAULT_M_MAX = 2000
DEFAULT_K_SCAN_MAX = 300
DECREASE_RUN = 20

_INV_E = math.exp(-1.0)


def lambert_w0(x: float) -> float:
    """Principal branch W0 of the Lambert function for real ``x >= -1/e``."""
    x = float(x)
    if math.isnan(x) or x < -_INV_E:
        raise ValueError(f"lambert_w0 is undefined for x < -1/e (got {x})")
    if x == 0.0:
        return 0.0
    if x == -_INV_E:
        return -1.0
    if math.isinf(x):
        return math.inf

    # initial guess: branch-point series, log1p in the middle, asymptotics above
    q = 2.0 * (math.e * x + 1.0)
    if q < 0.5:
        p = math.sqrt(max(q, 0.0))
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    elif x < 3.0:
        w = math.log1p(x)
    else:
        l1 = math.log(x)
        l2 = math.log(l1)
        w = l1 - l2 + l2 / l1

    for _ in range(100):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w_new = w - dw
        if w_new <= -1.0:
            # keep Halley on the principal branch near the branch point
            w_new = 0.5 * (w - 1.0)
        if abs(w_new - w) <= 4e-16 * (1.0 + abs(w_new)):
            return w_new
        w = w_new
    return w


def continuous_optimum(gamma: float, c0: float, c1: float, users: int) -> float:
    """Stationary point of ``K*log(1+gamma*(M-K)) / (c0 + c1*M)`` over real M."""
    b = 1.0 - users * gamma
    arg = (gamma * c0 - b * c1) / (c1 * math.e)
    w = lambert_w0(arg)
    return (math.exp(w + 1.0) - b) / gamma


def _lower_bound(cfg: SystemConfig, pa: PaSpec, users: int) -> int:
    return max(users + 1, min_active_antennas(pa, cfg.downlink_power))


def _ee_at(cfg, pa, coupling, users, antennas):
    antennas = np.asarray(antennas)
    gamma = sinr_coefficient(cfg, coupling, users)
    rate = per_user_rate(cfg, gamma, antennas, users)
    ee, _ = ee_from_rate(power_coeffs(cfg, pa, users), antennas, users, rate)
    return ee


def optimal_antennas_closed_form(
    cfg: SystemConfig,
    pa: PaSpec,
    coupling: CouplingStats,
    users: int,
    m_max: int = DEFAULT_M_MAX,
) -> int:
    """Lambert-W optimum rounded to the best feasible integer.

    The closed form ignores the coding power (it depends on M through the
    rate), so neighbouring integers are compared on the exact efficiency and
    a local ascent finishes the job.
    """
    if users < 1:
        raise ValueError("users must be >= 1")
    coeffs = power_coeffs(cfg, pa, users)
    if coeffs.c2 != 0.0:
        raise ValueError("closed form needs an array power affine in M (ET-PA or variable PA)")
    lower = _lower_bound(cfg, pa, users)
    if lower > m_max:
        raise InfeasibleError(f"no feasible antenna count in [{lower}, {m_max}]")
    gamma = sinr_coefficient(cfg, coupling, users)
    m_star = continuous_optimum(gamma, coeffs.c0, coeffs.c1, users)

    base = math.floor(min(max(m_star, lower), m_max))
    cand = np.unique(np.clip(np.arange(base - 1, base + 3), lower, m_max))
    ee = _ee_at(cfg, pa, coupling, users, cand)
    best = int(cand[np.argmax(ee)])
    best_ee = float(np.max(ee))

    def ee1(m):
        return float(_ee_at(cfg, pa, coupling, users, m))

    while best + 1 <= m_max and ee1(best + 1) > best_ee:
        best += 1
        best_ee = ee1(best)
    while best - 1 >= lower and ee1(best - 1) >= best_ee:
        best -= 1
        best_ee = ee1(best)
    return best


def optimal_antennas_etpa(cfg, pa, coupling, users, m_max=DEFAULT_M_MAX) -> int:
    if pa.family != "etpa":
        raise ValueError("optimal_antennas_etpa needs an ET-PA")
    return optimal_antennas_closed_form(cfg, pa, coupling, users, m_max)


def optimal_antennas_search(
    cfg: SystemConfig,
    pa: PaSpec,
    coupling: CouplingStats,
    users: int,
    m_max: int = DEFAULT_M_MAX,
) -> int:
    """Exhaustive argmax of the exact efficiency; ties go to fewer antennas."""
    if users < 1:
        raise ValueError("users must be >= 1")
    lower = _lower_bound(cfg, pa, users)
    if lower > m_max:
        raise InfeasibleError(f"no feasible antenna count in [{lower}, {m_max}]")
    m = np.arange(lower, m_max + 1)
    ee = _ee_at(cfg, pa, coupling, users, m)
    return int(m[np.argmax(ee)])


def optimal_antennas(cfg, pa, coupling, users, m_max=DEFAULT_M_MAX) -> int:
    if power_coeffs(cfg, pa, users).c2 == 0.0:
        return optimal_antennas_closed_form(cfg, pa, coupling, users, m_max)
    return optimal_antennas_search(cfg, pa, coupling, users, m_max)


@dataclass(frozen=True)
class GlobalOptimum:
    m_gopt: int
    k_gopt: int
    ee: float
    users: np.ndarray  # scanned K
    antennas: np.ndarray  # per-K optimal M
    ee_curve: np.ndarray  # per-K optimal EE

    @property
    def ratio(self) -> float:
        return self.m_gopt / self.k_gopt


def global_optimum(
    cfg: SystemConfig,
    pa: PaSpec,
    coupling: CouplingStats,
    k_scan_max: int = DEFAULT_K_SCAN_MAX,
    m_max: int = DEFAULT_M_MAX,
) -> GlobalOptimum:
    ks, ms, ees = [], [], []
    for k in range(1, k_scan_max + 1):
        if pilot_users(cfg, k) >= cfg.coherence_block or _lower_bound(cfg, pa, k) > m_max:
            break
        m = optimal_antennas(cfg, pa, coupling, k, m_max)
        ks.append(k)
        ms.append(m)
        ees.append(float(_ee_at(cfg, pa, coupling, k, m)))
    if not ks:
        raise InfeasibleError("no feasible user count to scan")
    ees_arr = np.array(ees)
    i = int(np.argmax(ees_arr))
    if len(ks) - 1 - i < DECREASE_RUN:
        raise ScanTooShortError(
            f"EE still near its maximum at K={ks[-1]} (best K={ks[i]}); raise k_scan_max"
        )
    return GlobalOptimum(ms[i], ks[i], float(ees_arr[i]), np.array(ks), np.array(ms), ees_arr)


@dataclass(frozen=True)
class LoadAdaptiveTable:
    """Per-state operating points for states n = 0..m."""

    antennas: np.ndarray
    rate: np.ndarray  # bit/s per user
    ee: np.ndarray  # bit/J
    power: np.ndarray  # W
    m: int
    m_gopt: int | None = None
    k_gopt: int | None = None

    def rows(self):
        for n in range(self.m + 1):
            yield n, int(self.antennas[n]), float(self.rate[n]), float(self.ee[n]), float(self.power[n])


def _table_from_antennas(cfg, pa, coupling, antennas, m, m_gopt=None, k_gopt=None):
    antennas = np.asarray(antennas, dtype=int)
    rate = np.zeros(m + 1)
    ee = np.zeros(m + 1)
    power = np.zeros(m + 1)
    power[0] = total_power(cfg, pa, int(antennas[0]), 0, 0.0)
    for n in range(1, m + 1):
        gamma = sinr_coefficient(cfg, coupling, n)
        rate[n] = per_user_rate(cfg, gamma, int(antennas[n]), n)
        power[n] = total_power(cfg, pa, int(antennas[n]), n, rate[n])
        ee[n] = n * rate[n] / power[n]
    return LoadAdaptiveTable(antennas, rate, ee, power, m, m_gopt, k_gopt)


def build_table(
    cfg: SystemConfig,
    pa: PaSpec,
    coupling: CouplingStats,
    m: int,
    m_max: int = DEFAULT_M_MAX,
    m_gopt: int | None = None,
    k_gopt: int | None = None,
) -> LoadAdaptiveTable:
    """Optimal antennas, rate, EE and power for every user state up to ``m``.

    The empty cell keeps the minimum number of antennas that can carry the
    downlink power.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    antennas = [min_active_antennas(pa, cfg.downlink_power)]
    antennas += [optimal_antennas(cfg, pa, coupling, n, m_max) for n in range(1, m + 1)]
    return _table_from_antennas(cfg, pa, coupling, antennas, m, m_gopt, k_gopt)


def fixed_table(cfg, pa, coupling, m: int, antennas: int) -> LoadAdaptiveTable:
    """Table of a system that always keeps ``antennas`` active."""
    return _table_from_antennas(cfg, pa, coupling, [antennas] * (m + 1), m)


def variable_headroom_curve(
    cfg: SystemConfig,
    coupling: CouplingStats,
    k_range,
    family: str = "etpa",
    m_max: int = DEFAULT_M_MAX,
):
    """(K, M, EE) for a PA whose maximum output always sits at the headroom."""
    pa = PaSpec.from_config(cfg, family, None)
    out = []
    for k in k_range:
        m = optimal_antennas(cfg, pa, coupling, int(k), m_max)
        out.append((int(k), m, float(_ee_at(cfg, pa, coupling, int(k), m))))
    return out


def ee_curve(cfg, pa, coupling, k_range, m_max=DEFAULT_M_MAX):
    """(K, M, EE) per-K optimum for an arbitrary PA; infeasible K are skipped."""
    out = []
    for k in k_range:
        k = int(k)
        if _lower_bound(cfg, pa, k) > m_max:
            continue
        m = optimal_antennas(cfg, pa, coupling, k, m_max)
        out.append((k, m, float(_ee_at(cfg, pa, coupling, k, m))))
    return out
