"""Choice of the amplifier maximum output power over a daily load cycle.

Every antenna count ``M = 1..M_gOpt`` defines one candidate ``P_max`` (the
smallest amplifier that lets ``M`` antennas carry the downlink power within
the PAPR headroom).  Each candidate is scored by the day-weighted energy
efficiency: state probabilities from the loss queue, hour by hour, applied
to the per-state efficiencies of the candidate's load-adaptive table.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import CouplingStats
from .link import SystemConfig
from .optimize import (
    DEFAULT_K_SCAN_MAX,
    DEFAULT_M_MAX,
    GlobalOptimum,
    LoadAdaptiveTable,
    build_table,
    fixed_table,
    global_optimum,
)
from .power import PaSpec, min_active_antennas
from .traffic import (
    DEFAULT_SIGMA_BITS,
    DEFAULT_TARGET_BLOCKING,
    HOURS,
    DailyProfile,
    QueueInputs,
    StateDistribution,
    hourly_distributions,
    solve_lambda_max,
)


def candidate_pmax_values(cfg: SystemConfig, m_gopt: int) -> np.ndarray:
    """``(P_c / M) * headroom`` for ``M = 1..m_gopt``, largest first."""
    if m_gopt < 1:
        raise ValueError("m_gopt must be >= 1")
    m = np.arange(1, m_gopt + 1)
    return cfg.downlink_power / m * cfg.headroom


@dataclass(frozen=True)
class WeightedEE:
    value: float
    table: LoadAdaptiveTable
    lambda_max: float
    distributions: list[StateDistribution] = field(repr=False)


def day_weighted_ee(table: LoadAdaptiveTable, distributions) -> float:
    """Mean over the hours of the expected per-state efficiency."""
    pi = np.array([d.pi for d in distributions])
    # state 0 carries no throughput
    return float(np.sum(pi[:, 1:] @ table.ee[1:]) / len(distributions))


def weighted_ee_for_table(
    table: LoadAdaptiveTable,
    profile: DailyProfile,
    sigma_t: float = DEFAULT_SIGMA_BITS,
    target_blocking: float = DEFAULT_TARGET_BLOCKING,
) -> WeightedEE:
    q = QueueInputs.from_table(table, sigma_t)
    lam = solve_lambda_max(q, target_blocking)
    dists = hourly_distributions(profile, lam, q)
    return WeightedEE(day_weighted_ee(table, dists), table, lam, dists)


def weighted_ee(
    cfg: SystemConfig,
    pa: PaSpec,
    coupling: CouplingStats,
    profile: DailyProfile,
    m: int,
    sigma_t: float = DEFAULT_SIGMA_BITS,
    target_blocking: float = DEFAULT_TARGET_BLOCKING,
    m_max: int = DEFAULT_M_MAX,
) -> WeightedEE:
    table = build_table(cfg, pa, coupling, m, m_max)
    return weighted_ee_for_table(table, profile, sigma_t, target_blocking)


@dataclass(frozen=True)
class Candidate:
    p_max_pa: float
    min_active_antennas: int
    weighted_ee: float
    lambda_max: float


@dataclass(frozen=True)
class DimensioningReport:
    family: str
    profile_name: str
    candidates: list[Candidate]
    best_index: int
    m: int
    m_gopt: int
    k_gopt: int
    baseline_weighted_ee: float | None = None
    gain_percent: float | None = None

    @property
    def best(self) -> Candidate:
        return self.candidates[self.best_index]

    @property
    def best_p_max_pa(self) -> float:
        return self.best.p_max_pa

    @property
    def best_weighted_ee(self) -> float:
        return self.best.weighted_ee

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "profile": self.profile_name,
            "m_users": self.m,
            "m_gopt": self.m_gopt,
            "k_gopt": self.k_gopt,
            "best_p_max_pa_W": self.best_p_max_pa,
            "best_min_active_antennas": self.best.min_active_antennas,
            "best_weighted_ee_bits_per_joule": self.best_weighted_ee,
            "baseline_weighted_ee_bits_per_joule": self.baseline_weighted_ee,
            "gain_percent": self.gain_percent,
            "candidates": [
                {
                    "p_max_pa_W": c.p_max_pa,
                    "min_active_antennas": c.min_active_antennas,
                    "weighted_ee_bits_per_joule": c.weighted_ee,
                    "lambda_max_per_s": c.lambda_max,
                }
                for c in self.candidates
            ],
        }


def dimension_pa(
    cfg: SystemConfig,
    coupling: CouplingStats,
    profile: DailyProfile,
    family: str = "etpa",
    sigma_t: float = DEFAULT_SIGMA_BITS,
    target_blocking: float = DEFAULT_TARGET_BLOCKING,
    k_scan_max: int = DEFAULT_K_SCAN_MAX,
    m_max: int = DEFAULT_M_MAX,
    gopt: GlobalOptimum | None = None,
) -> DimensioningReport:
    """Score every candidate P_max and keep the best (ties: smaller P_max).

    The number of servers ``m`` and the candidate range come from the global
    optimum of the variable-headroom amplifier of the same family.
    """
    if gopt is None:
        gopt = global_optimum(cfg, PaSpec.from_config(cfg, family), coupling, k_scan_max, m_max)
    m = gopt.k_gopt
    candidates = []
    for p_max in candidate_pmax_values(cfg, gopt.m_gopt):
        pa = PaSpec.from_config(cfg, family, float(p_max))
        res = weighted_ee(cfg, pa, coupling, profile, m, sigma_t, target_blocking, m_max)
        candidates.append(
            Candidate(float(p_max), min_active_antennas(pa, cfg.downlink_power), res.value, res.lambda_max)
        )
    values = np.array([c.weighted_ee for c in candidates])
    best_ee = values.max()
    # candidates run from large to small P_max; ties go to the smaller one
    best = int(np.flatnonzero(values == best_ee)[-1])
    return DimensioningReport(family, profile.name, candidates, best, m, gopt.m_gopt, gopt.k_gopt)


@dataclass(frozen=True)
class BaselineComparison:
    adaptive: WeightedEE
    fixed: WeightedEE
    fixed_antennas: int

    @property
    def gain_percent(self) -> float:
        return 100.0 * (self.adaptive.value - self.fixed.value) / self.fixed.value

    def dominance_fraction(self) -> float:
        """Share of user states n >= 1 where the adaptive system is at least as efficient."""
        a = self.adaptive.table.ee[1:]
        f = self.fixed.table.ee[1:]
        return float(np.mean(a >= f * (1.0 - 1e-12)))


def compare_tables(
    adaptive: LoadAdaptiveTable,
    fixed: LoadAdaptiveTable,
    profile: DailyProfile,
    sigma_t: float = DEFAULT_SIGMA_BITS,
    target_blocking: float = DEFAULT_TARGET_BLOCKING,
) -> BaselineComparison:
    a = weighted_ee_for_table(adaptive, profile, sigma_t, target_blocking)
    f = weighted_ee_for_table(fixed, profile, sigma_t, target_blocking)
    return BaselineComparison(a, f, int(fixed.antennas[-1]))


def baseline_comparison(
    cfg: SystemConfig,
    pa_best: PaSpec,
    coupling: CouplingStats,
    profile: DailyProfile,
    m: int,
    m_gopt: int,
    baseline_pa: PaSpec | None = None,
    sigma_t: float = DEFAULT_SIGMA_BITS,
    target_blocking: float = DEFAULT_TARGET_BLOCKING,
    m_max: int = DEFAULT_M_MAX,
) -> BaselineComparison:
    """Load-adaptive system with ``pa_best`` against one that always runs ``m_gopt`` antennas.

    Both systems use the dimensioned amplifier unless ``baseline_pa`` is given.
    """
    if baseline_pa is None:
        baseline_pa = pa_best
    adaptive = build_table(cfg, pa_best, coupling, m, m_max)
    fixed = fixed_table(cfg, baseline_pa, coupling, m, m_gopt)
    return compare_tables(adaptive, fixed, profile, sigma_t, target_blocking)


def hourly_weighted_breakdown(result: WeightedEE) -> np.ndarray:
    """Expected EE for each hour (the summands of the daily average)."""
    pi = np.array([d.pi for d in result.distributions])
    out = pi[:, 1:] @ result.table.ee[1:]
    assert len(out) == HOURS
    return out
