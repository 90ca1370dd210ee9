"""Flat ``key = value`` run configuration.

Every key has a default reproducing the reference scenario, so an empty
file is a valid configuration.  Units are part of the key names.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .errors import ConfigError, ConfigParseError
from .geometry import DEFAULT_GRID_SIZE, DEFAULT_SEED, PATHLOSS_EXPONENT, PATHLOSS_LOG10_GAIN
from .link import SystemConfig, dbm_to_watts
from .optimize import DEFAULT_K_SCAN_MAX, DEFAULT_M_MAX
from .power import FAMILIES, PaSpec
from .traffic import DEFAULT_SIGMA_BITS, DEFAULT_TARGET_BLOCKING

PMAX_REF_ANTENNAS = 20


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int(text: str) -> int:
    v = float(text)
    if not v.is_integer():
        raise ValueError(f"not an integer: {text!r}")
    return int(v)


# key -> (converter, unit/description)
KEYS = {
    "bandwidth_hz": (float, "Hz"),
    "coherence_time_s": (float, "s"),
    "coherence_bandwidth_hz": (float, "Hz"),
    "coherence_block": (float, "symbols; derived from B_c*T_c when omitted"),
    "noise_dbm": (float, "dBm, total noise over the band"),
    "noise_w": (float, "W, alternative to noise_dbm"),
    "downlink_power_w": (float, "W"),
    "pilot_overhead_mode": (str, "current-users | fixed-max-users"),
    "pilot_users": (_int, "pilots in fixed-max-users mode"),
    "eta": (float, "peak PA efficiency in (0, 1]"),
    "alpha": (float, "ET-PA parameter"),
    "headroom_db": (float, "dB between P_max and the mean output"),
    "p_syn_w": (float, "W"),
    "p_bs_w": (float, "W per antenna"),
    "p_oth_w": (float, "W"),
    "p_cod_w_per_gbps": (float, "W/(Gbit/s)"),
    "p_dec_w_per_gbps": (float, "W/(Gbit/s)"),
    "l_bs_flops_per_w": (float, "flop/J"),
    "quadratic_bb_per_block": (_bool, "charge the M*K^2 baseband term once per coherence block"),
    "d_max_m": (float, "m, cell radius"),
    "d_min_m": (float, "m, exclusion radius around the site"),
    "grid_size": (_int, "test points"),
    "grid_seed": (_int, "sampler seed"),
    "pathloss_log10_gain": (float, "log10 of the gain at 1 m"),
    "pathloss_exponent": (float, "distance exponent"),
    "profile": (str, "bundled profile name or path to a 24-line file"),
    "sigma_bits": (float, "bits per user session"),
    "target_blocking": (float, "top-state probability at 100% load"),
    "k_scan_max": (_int, "largest user count scanned"),
    "m_max": (_int, "largest antenna count considered"),
    "pa_family": (str, "etpa | tpa"),
    "p_max_pa": (str, "variable | <x>dB | <x>W"),
    "pmax_ref_antennas": (_int, "antenna count that defines dB-labelled P_max"),
    "output_dir": (str, "directory for CSV and manifests"),
}


@dataclass(frozen=True)
class RunConfig:
    system: SystemConfig = field(default_factory=SystemConfig)
    d_max: float = 500.0
    d_min: float = 35.0
    grid_size: int = DEFAULT_GRID_SIZE
    grid_seed: int = DEFAULT_SEED
    pathloss_log10_gain: float = PATHLOSS_LOG10_GAIN
    pathloss_exponent: float = PATHLOSS_EXPONENT
    profile: str = "earth_europe"
    sigma_bits: float = DEFAULT_SIGMA_BITS
    target_blocking: float = DEFAULT_TARGET_BLOCKING
    k_scan_max: int = DEFAULT_K_SCAN_MAX
    m_max: int = DEFAULT_M_MAX
    pa_family: str = "etpa"
    p_max_pa: str = "variable"
    pmax_ref_antennas: int = PMAX_REF_ANTENNAS
    output_dir: str = "out"
    raw: tuple = ()  # (key, value) pairs as given, for manifests

    def pa(self, family: str | None = None, label: str | None = None) -> PaSpec:
        family = family or self.pa_family
        p_max = parse_pmax(label or self.p_max_pa, self.system, self.pmax_ref_antennas)
        return PaSpec.from_config(self.system, family, p_max)

    def pathloss_kw(self) -> dict:
        return {"log10_gain": self.pathloss_log10_gain, "exponent": self.pathloss_exponent}

    def to_text(self) -> str:
        """Flat-file rendering of the explicitly given keys."""
        return "".join(f"{k} = {v}\n" for k, v in self.raw)

    def digest(self) -> str:
        resolved = self.resolved()
        resolved.pop("output_dir")
        return hashlib.sha256(repr(sorted(resolved.items())).encode()).hexdigest()

    def resolved(self) -> dict:
        out = {f.name: getattr(self.system, f.name) for f in fields(self.system)}
        for f in fields(self):
            if f.name not in ("system", "raw"):
                out[f.name] = getattr(self, f.name)
        return out


def parse_pmax(label: str, system: SystemConfig, ref_antennas: int = PMAX_REF_ANTENNAS) -> float | None:
    """``variable`` -> None; ``8dB`` -> (P_c/ref)*10**0.8; ``4.5`` or ``4.5W`` -> watts."""
    t = str(label).strip().lower()
    try:
        if t == "variable":
            return None
        if t.endswith("db"):
            return system.downlink_power / ref_antennas * 10.0 ** (float(t[:-2]) / 10.0)
        value = float(t[:-1] if t.endswith("w") else t)
    except ValueError:
        raise ConfigError(f"cannot read P_max label {label!r}") from None
    if not value > 0:
        raise ConfigError(f"P_max must be positive, got {label!r}")
    return value


def parse_pairs(text: str):
    pairs = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigParseError(f"unknown key {key!r}", lineno)
        if key in seen:
            raise ConfigParseError(f"duplicate key {key!r}", lineno)
        try:
            KEYS[key][0](value)
        except ValueError as exc:
            raise ConfigParseError(f"{key}: {exc}", lineno) from None
        seen.add(key)
        pairs.append((key, value, lineno))
    return pairs


def build_config(pairs) -> RunConfig:
    values = {}
    for key, value, lineno in pairs:
        values[key] = KEYS[key][0](value)
    if "noise_dbm" in values and "noise_w" in values:
        raise ConfigError("give either noise_dbm or noise_w, not both")

    sysmap = {
        "bandwidth_hz": "bandwidth",
        "coherence_time_s": "coherence_time",
        "coherence_bandwidth_hz": "coherence_bandwidth",
        "coherence_block": "coherence_block",
        "noise_w": "total_noise",
        "downlink_power_w": "downlink_power",
        "pilot_overhead_mode": "pilot_overhead_mode",
        "pilot_users": "pilot_users",
        "eta": "eta",
        "alpha": "alpha",
        "headroom_db": "headroom_db",
        "p_syn_w": "p_syn",
        "p_bs_w": "p_bs",
        "p_oth_w": "p_oth",
        "p_cod_w_per_gbps": "p_cod",
        "p_dec_w_per_gbps": "p_dec",
        "l_bs_flops_per_w": "l_bs",
        "quadratic_bb_per_block": "quadratic_bb_per_block",
    }
    skw = {sysmap[k]: v for k, v in values.items() if k in sysmap}
    if "noise_dbm" in values:
        skw["total_noise"] = dbm_to_watts(values["noise_dbm"])
    if "coherence_block" not in values:
        base = SystemConfig()
        skw["coherence_block"] = skw.get("coherence_bandwidth", base.coherence_bandwidth) * skw.get(
            "coherence_time", base.coherence_time
        )
    system = SystemConfig(**skw)

    runmap = {
        "d_max_m": "d_max",
        "d_min_m": "d_min",
        "grid_size": "grid_size",
        "grid_seed": "grid_seed",
        "pathloss_log10_gain": "pathloss_log10_gain",
        "pathloss_exponent": "pathloss_exponent",
        "profile": "profile",
        "sigma_bits": "sigma_bits",
        "target_blocking": "target_blocking",
        "k_scan_max": "k_scan_max",
        "m_max": "m_max",
        "pa_family": "pa_family",
        "p_max_pa": "p_max_pa",
        "pmax_ref_antennas": "pmax_ref_antennas",
        "output_dir": "output_dir",
    }
    rkw = {runmap[k]: v for k, v in values.items() if k in runmap}
    raw = tuple((k, v) for k, v, _ in pairs)
    cfg = RunConfig(system=system, raw=raw, **rkw)
    validate_run_config(cfg)
    return cfg


def validate_run_config(cfg: RunConfig) -> None:
    if not (0 < cfg.d_min < cfg.d_max):
        raise ConfigError(f"need 0 < d_min_m < d_max_m, got {cfg.d_min} and {cfg.d_max}")
    if cfg.grid_size < 1:
        raise ConfigError("grid_size must be >= 1")
    if not cfg.sigma_bits > 0:
        raise ConfigError("sigma_bits must be positive")
    if not 0 < cfg.target_blocking < 1:
        raise ConfigError("target_blocking must lie in (0, 1)")
    if cfg.k_scan_max < 1 or cfg.m_max < 2:
        raise ConfigError("k_scan_max must be >= 1 and m_max >= 2")
    if cfg.pa_family not in FAMILIES:
        raise ConfigError(f"pa_family must be one of {FAMILIES}")
    if cfg.pmax_ref_antennas < 1:
        raise ConfigError("pmax_ref_antennas must be >= 1")
    if not math.isfinite(cfg.pathloss_exponent) or cfg.pathloss_exponent <= 0:
        raise ConfigError("pathloss_exponent must be positive")
    parse_pmax(cfg.p_max_pa, cfg.system, cfg.pmax_ref_antennas)


def loads_config(text: str, overrides=()) -> RunConfig:
    pairs = parse_pairs(text)
    if overrides:
        extra = parse_pairs("\n".join(overrides))
        keys = {k for k, _, _ in extra}
        pairs = [p for p in pairs if p[0] not in keys] + [(k, v, None) for k, v, _ in extra]
    return build_config(pairs)


def load_config(path, overrides=()) -> RunConfig:
    """Read a config file; ``overrides`` are extra ``key=value`` lines applied last."""
    if path is None:
        return loads_config("", overrides)
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return loads_config(p.read_text(), overrides)


def with_output_dir(cfg: RunConfig, output_dir: str) -> RunConfig:
    return replace(cfg, output_dir=str(output_dir))
