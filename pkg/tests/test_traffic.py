import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from padim.errors import ConfigError
from padim.optimize import build_table
from padim.traffic import (
    BUNDLED_PROFILES,
    DailyProfile,
    QueueInputs,
    erlang_b,
    erlang_distribution,
    hourly_distributions,
    load_profile,
    parse_profile,
    queue_distribution,
    solve_lambda_max,
)

LAMBDA_MAX_VAR = 2029.4601844980657


def unit_queue(m, load, sigma=1.0):
    # f == 1 and R_1 = sigma, so lambda equals the offered load
    return QueueInputs(m, sigma, np.full(m, sigma), load)


def test_small_examples():
    # a = 1, f(2) = 1/2: weights 1, 1, 1/(2 * 1/2) ... normalised
    q = QueueInputs(2, 1.0, [1.0, 0.5], 1.0)
    assert np.allclose(queue_distribution(q).pi, [1 / 3, 1 / 3, 1 / 3], atol=1e-15)
    q = QueueInputs(2, 1.0, [1.0, 1.0], 1.0)
    assert np.allclose(queue_distribution(q).pi, [0.4, 0.4, 0.2], atol=1e-15)


def test_zero_arrivals():
    pi = queue_distribution(unit_queue(5, 0.0)).pi
    assert pi[0] == 1.0 and pi[1:].sum() == 0.0


def test_erlang_b_values():
    assert erlang_b(1, 1.0) == pytest.approx(0.5)
    assert erlang_b(2, 1.0) == pytest.approx(0.2)


@pytest.mark.parametrize("m", [1, 10, 50, 200])
@pytest.mark.parametrize("load", [0.1, 1.0, 10.0, 100.0, 300.0])
def test_erlang_equivalence(m, load):
    pi = queue_distribution(unit_queue(m, load)).pi
    assert abs(pi[-1] - erlang_b(m, load)) <= 1e-10
    assert np.max(np.abs(pi - erlang_distribution(m, load))) <= 1e-10
    assert abs(pi.sum() - 1) <= 1e-12


def test_input_validation():
    with pytest.raises(ValueError):
        QueueInputs(0, 1.0, [])
    with pytest.raises(ValueError):
        QueueInputs(2, 1.0, [1.0])
    with pytest.raises(ValueError):
        QueueInputs(2, 1.0, [1.0, 0.0])
    with pytest.raises(ValueError):
        QueueInputs(2, 1.0, [1.0, 1.0], -1.0)


def test_solver_inverts_erlang():
    lam = solve_lambda_max(unit_queue(10, 0.0), 0.02)
    assert abs(erlang_b(10, lam) - 0.02) <= 1e-9
    assert lam == pytest.approx(5.084, abs=1e-3)


def test_solver_small_target():
    q = unit_queue(20, 0.0)
    lam = solve_lambda_max(q, 1e-9)
    assert queue_distribution(q.with_arrival_rate(lam)).blocking == pytest.approx(1e-9, abs=1e-12)
    with pytest.raises(ValueError):
        solve_lambda_max(q, 0.0)


@pytest.fixture(scope="module")
def var_table(cfg, coupling, etpa_var):
    return build_table(cfg, etpa_var, coupling, 61)


def test_lambda_max_regression(var_table):
    q = QueueInputs.from_table(var_table, 1e6)
    lam = solve_lambda_max(q)
    assert lam == pytest.approx(LAMBDA_MAX_VAR, rel=1e-9)
    assert abs(queue_distribution(q.with_arrival_rate(lam)).blocking - 0.02) <= 1e-6


def test_hourly_peak_blocking_and_dominance(var_table):
    q = QueueInputs.from_table(var_table, 1e6)
    lam = solve_lambda_max(q)
    prof = load_profile("earth_europe")
    dists = hourly_distributions(prof, lam, q)
    peak = int(np.argmax(prof.hourly_load))
    assert abs(dists[peak].blocking - 0.02) <= 1e-6
    # higher load shifts mass to more users
    order = np.argsort(prof.hourly_load)
    cdfs = [dists[i].cdf() for i in order]
    for lo, hi in zip(cdfs, cdfs[1:]):
        assert np.all(hi <= lo + 1e-12)


def test_light_load_mostly_empty(var_table):
    q = QueueInputs.from_table(var_table, 1e6)
    lam = solve_lambda_max(q)
    assert queue_distribution(q.with_arrival_rate(0.01 * lam)).pi[0] > 0.5


@settings(max_examples=80, deadline=None)
@given(
    m=st.integers(1, 300),
    load=st.floats(1e-3, 1e3),
    decay=st.floats(0.0, 0.05),
)
def test_distribution_normalised(m, load, decay):
    rates = 1e6 * np.exp(-decay * np.arange(m))
    pi = queue_distribution(QueueInputs(m, 1e6, rates, load)).pi
    assert abs(pi.sum() - 1.0) <= 1e-12
    assert np.all(pi >= 0)


@settings(max_examples=60, deadline=None)
@given(m=st.integers(1, 120), load=st.floats(1e-2, 200.0))
def test_blocking_increases_with_load(m, load):
    rates = 1e6 / (1 + 0.01 * np.arange(m))
    q = QueueInputs(m, 1e6, rates)
    b1 = queue_distribution(q.with_arrival_rate(load)).blocking
    b2 = queue_distribution(q.with_arrival_rate(load * 1.5)).blocking
    assert b2 >= b1


@pytest.mark.parametrize("name", BUNDLED_PROFILES)
def test_bundled_profiles(name):
    prof = load_profile(name)
    assert prof.hourly_load.shape == (24,)
    assert prof.hourly_load.max() == 1.0


def test_profile_validation(tmp_path):
    with pytest.raises(ConfigError):
        DailyProfile(np.ones(23))
    with pytest.raises(ConfigError):
        DailyProfile(np.full(24, 0.5))
    bad = np.ones(24)
    bad[3] = 0.0
    with pytest.raises(ConfigError):
        DailyProfile(bad)
    with pytest.raises(ConfigError, match="line 2"):
        parse_profile("1\nabc\n")
    with pytest.raises(ConfigError):
        load_profile(tmp_path / "missing.txt")
    f = tmp_path / "flat.txt"
    f.write_text("# flat\n" + "1.0\n" * 24)
    assert load_profile(f).name == "flat"
