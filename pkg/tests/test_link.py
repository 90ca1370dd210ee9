import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from padim.errors import ConfigError, OverheadOverflowError, ZFViolationError
from padim.geometry import CouplingStats
from padim.link import SystemConfig, dbm_to_watts, per_user_rate, pilot_users, sinr_coefficient

GAMMA_K100 = 0.016214799485639687
RATE_K50_M100 = 27035196.044644747


def test_defaults_consistent():
    cfg = SystemConfig()
    assert cfg.coherence_block == cfg.coherence_bandwidth * cfg.coherence_time == 1800
    assert cfg.total_noise == pytest.approx(2.5119e-13, rel=1e-4)
    assert cfg.coding_power == pytest.approx(0.9e-9)


@pytest.mark.parametrize(
    "kw",
    [
        {"coherence_block": 1000.0},
        {"eta": 0.0},
        {"eta": 1.2},
        {"bandwidth": -1.0},
        {"downlink_power": math.nan},
        {"pilot_overhead_mode": "bogus"},
        {"headroom_db": -1.0},
    ],
)
def test_invalid_system_config(kw):
    with pytest.raises(ConfigError):
        SystemConfig(**kw)


def test_dbm_to_watts():
    assert dbm_to_watts(30.0) == 1.0
    assert dbm_to_watts(0.0) == pytest.approx(1e-3)


def test_gamma_identity(cfg):
    # lambda_cc*noise + I = 1 makes gamma equal to P_c/K
    unit = CouplingStats(lambda_cc=1.0 / cfg.total_noise, interference_sum=0.0)
    assert sinr_coefficient(cfg, unit, 1) == pytest.approx(cfg.downlink_power)
    c = CouplingStats(lambda_cc=0.5 / cfg.total_noise, interference_sum=cfg.downlink_power - 0.5)
    for k in (1, 7, 100):
        assert sinr_coefficient(cfg, c, k) == pytest.approx(1.0 / k, rel=1e-12)


def test_gamma_halves(cfg, coupling):
    assert sinr_coefficient(cfg, coupling, 2) == pytest.approx(sinr_coefficient(cfg, coupling, 1) / 2, rel=1e-15)


def test_gamma_regression(cfg, coupling):
    assert sinr_coefficient(cfg, coupling, 100) == pytest.approx(GAMMA_K100, rel=1e-12)


def test_gamma_rejects_no_users(cfg, coupling):
    with pytest.raises(ValueError):
        sinr_coefficient(cfg, coupling, 0)


def test_rate_identity(cfg):
    # gamma*(M-K) = 1 gives log2(2) = 1
    r = per_user_rate(cfg, 0.5, 12, 10)
    assert r == pytest.approx((1 - 10 / 1800) * 20e6, rel=1e-12)


def test_rate_regression(cfg, coupling):
    gamma = sinr_coefficient(cfg, coupling, 50)
    r = per_user_rate(cfg, gamma, 100, 50)
    assert r == pytest.approx(RATE_K50_M100, rel=1e-12)
    # independent restatement
    expected = (1 - 50 / 1800) * 20e6 * math.log(1 + gamma * 50) / math.log(2)
    assert r == pytest.approx(expected, rel=1e-12)


def test_rate_errors(cfg):
    with pytest.raises(ZFViolationError):
        per_user_rate(cfg, 0.1, 10, 10)
    with pytest.raises(ZFViolationError):
        per_user_rate(cfg, 0.1, np.array([11, 9]), 10)
    with pytest.raises(OverheadOverflowError):
        per_user_rate(cfg, 0.1, 5000, 1800)


def test_fixed_pilot_mode():
    cfg = SystemConfig(pilot_overhead_mode="fixed-max-users", pilot_users=300)
    assert pilot_users(cfg, 5) == 300
    r = per_user_rate(cfg, 0.5, 12, 10)
    assert r == pytest.approx((1 - 300 / 1800) * 20e6)


def test_rate_monotone_in_antennas(cfg, coupling):
    gamma = sinr_coefficient(cfg, coupling, 20)
    r = per_user_rate(cfg, gamma, np.arange(21, 2000), 20)
    assert np.all(np.diff(r) > 0)


def test_rate_log_growth(cfg, coupling):
    # for large M the rate grows by one bit per doubling of M-K
    gamma = sinr_coefficient(cfg, coupling, 10)
    r1 = per_user_rate(cfg, gamma, 10 + 10**5, 10)
    r2 = per_user_rate(cfg, gamma, 10 + 2 * 10**5, 10)
    prelog = (1 - 10 / 1800) * 20e6
    assert math.isfinite(r1)
    assert (r2 - r1) / prelog == pytest.approx(1.0, rel=1e-3)


@settings(max_examples=50, deadline=None)
@given(
    s=st.floats(0.1, 100.0),
    k=st.integers(1, 200),
    extra=st.integers(1, 500),
)
def test_rate_invariant_to_common_scaling(s, k, extra):
    # scaling the transmit power and the noise/interference terms together leaves gamma alone
    base = SystemConfig()
    scaled = SystemConfig(downlink_power=20.0 * s, total_noise=base.total_noise * s)
    c = CouplingStats(1e13, 9.0)
    cs = CouplingStats(1e13, 9.0 * s)
    g0 = sinr_coefficient(base, c, k)
    g1 = sinr_coefficient(scaled, cs, k)
    assert g1 == pytest.approx(g0, rel=1e-12)
    assert per_user_rate(scaled, g1, k + extra, k) == pytest.approx(per_user_rate(base, g0, k + extra, k), rel=1e-12)
