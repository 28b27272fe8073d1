import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal
from scipy import stats

from tpmkit import fixtures
from tpmkit.errors import NoRootError, ValidationError
from tpmkit.matrix_core import TransitionMatrix
from tpmkit.portfolio_sim import (
    FactorModel,
    SimulationConfig,
    conditional_expected_loss,
    conditional_migration,
    conditional_pd,
    direct_jump_loss_quantile,
    implied_correlation,
    migration_thresholds,
    order_statistic,
    percentile_table,
    simulate_pool,
)


@pytest.fixture(scope="module")
def hist():
    return fixtures.load_tpm("tbl_Hu_TPM_1")


def test_factor_model_conventions():
    assert FactorModel.from_rho(0.6).beta == pytest.approx(math.sqrt(0.6))
    assert FactorModel.from_correlation(0.6, "beta").beta == 0.6
    assert FactorModel.from_correlation(0.36, "rho").rho == pytest.approx(0.36)
    with pytest.raises(ValidationError):
        FactorModel(1.0)
    with pytest.raises(ValidationError):
        FactorModel.from_rho(-0.1)


def test_conditional_pd_limits():
    assert conditional_pd(0.02, 0.0, 3.0) == pytest.approx(0.02)
    assert conditional_pd(0.0, 0.5, -2.0) == 0.0
    assert conditional_pd(1.0, 0.5, -2.0) == 1.0
    lo, hi = conditional_pd(0.02, 0.5, np.array([2.0, -2.0]))
    assert lo < 0.02 < hi


def test_conditional_pd_integrates_to_pd():
    x, w = np.polynomial.hermite_e.hermegauss(80)
    avg = np.sum(w * conditional_pd(0.05, 0.6, x)) / np.sqrt(2 * np.pi)
    assert avg == pytest.approx(0.05, abs=1e-8)


def test_direct_jump_quantile_oracle():
    pd, rho, q = 0.0971, 0.6, 0.999
    v = direct_jump_loss_quantile(pd, math.sqrt(rho), q)
    oracle = stats.norm.cdf((stats.norm.ppf(pd) + math.sqrt(rho) * stats.norm.ppf(q)) / math.sqrt(1 - rho))
    assert v == pytest.approx(oracle, abs=1e-14)


def test_conditional_expected_loss():
    x = -1.5
    e = conditional_expected_loss([1.0, 2.0], 0.4, [0.01, 0.02], 0.3, x)
    expected = 0.4 * (conditional_pd(0.01, 0.3, x) + 2 * conditional_pd(0.02, 0.3, x))
    assert e == pytest.approx(expected)


def test_implied_correlation_example():
    beta, rho = implied_correlation(0.016, 0.0566, 0.98)
    assert beta == pytest.approx(0.3112, abs=1e-4)
    assert rho == pytest.approx(beta**2)
    assert direct_jump_loss_quantile(0.016, beta, 0.98) == pytest.approx(0.0566, abs=1e-12)


def test_implied_correlation_edges():
    assert implied_correlation(0.05, 0.05, 0.5) == (0.0, 0.0)
    with pytest.raises(NoRootError):
        implied_correlation(0.02, 0.01, 0.99)
    with pytest.raises(ValidationError):
        implied_correlation(0.0, 0.1, 0.99)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.001, 0.2), st.floats(0.05, 0.8), st.sampled_from([0.95, 0.98, 0.99, 0.999]))
def test_implied_correlation_inverts_quantile(pd, beta, q):
    df = direct_jump_loss_quantile(pd, beta, q)
    b, _ = implied_correlation(pd, df, q)
    assert b <= beta + 1e-7
    assert direct_jump_loss_quantile(pd, b, q) == pytest.approx(df, rel=1e-9)


def test_thresholds_and_conditional_migration(hist):
    p = hist.entries
    z = migration_thresholds(p)
    cm = conditional_migration(z, 0.0, np.array([0.3]))
    assert_allclose(cm[0], p, atol=1e-12)
    cm = conditional_migration(z, 0.7, np.linspace(-3, 3, 7))
    assert_allclose(cm.sum(axis=-1), 1.0, atol=1e-12)
    assert cm.min() >= 0
    # bad factor draws push mass towards default
    assert np.all(np.diff(cm[:, 3, -1]) <= 0)


def test_order_statistic():
    v = np.arange(1, 101, dtype=float)
    assert order_statistic(v, 0.99) == 99.0
    assert order_statistic(v, 0.995) == 100.0
    assert order_statistic(v, 0.001) == 1.0
    with pytest.raises(ValidationError):
        order_statistic(v, 1.0)


def test_granular_beta_zero_is_deterministic(hist):
    p = np.linalg.matrix_power(hist.entries, 3)
    cfg = SimulationConfig(hist, "BB", pool_size=None, steps=3, scenarios=50, seed=1)
    r = simulate_pool(cfg)
    i = 4
    assert_allclose(r.df, p[i, -1], atol=1e-14)
    assert_allclose(r.tmr, 1 - p[i, i], atol=1e-14)
    assert_allclose(r.tmd, p[i, :i].sum() - p[i, i + 1:].sum(), atol=1e-14)


def test_single_step_binomial(hist):
    n, pd = 50, hist.entries[5, -1]
    cfg = SimulationConfig(hist, "B", pool_size=n, steps=1, scenarios=20_000, seed=3)
    r = simulate_pool(cfg)
    k = np.arange(n + 1)
    emp = np.searchsorted(np.sort(r.df * n), k + 0.5) / len(r.df)
    eps = math.sqrt(math.log(2 / 0.001) / (2 * len(r.df)))
    assert np.abs(emp - stats.binom.cdf(k, n, pd)).max() <= eps


def test_direct_jump_uses_matrix_power(hist):
    cfg = SimulationConfig(hist, "A", pool_size=None, steps=4, mode="direct_jump", scenarios=10)
    r = simulate_pool(cfg)
    assert_allclose(r.df, np.linalg.matrix_power(hist.entries, 4)[2, -1], atol=1e-14)


def test_worker_count_does_not_change_results(hist):
    cfg = SimulationConfig(hist, "BBB", pool_size=40, steps=3, scenarios=3000, seed=11, beta=0.5, block_size=256)
    a, b = simulate_pool(cfg, workers=1), simulate_pool(cfg, workers=4)
    for s in ("df", "tmd", "tmr"):
        assert_array_equal(getattr(a, s), getattr(b, s))
    c = simulate_pool(SimulationConfig(hist, "BBB", pool_size=40, steps=3, scenarios=3000, seed=12, beta=0.5, block_size=256))
    assert not np.array_equal(a.df, c.df)


def test_percentile_orientation(hist):
    cfg = SimulationConfig(hist, "BB", pool_size=100, steps=2, scenarios=4000, seed=5, beta=0.6)
    r = simulate_pool(cfg)
    assert r.percentiles["df"][0.99] >= r.mean["df"]
    assert r.percentiles["tmd"][0.99] <= r.mean["tmd"]
    assert r.percentiles["tmr"][0.99] >= r.mean["tmr"]
    assert np.all(r.tmr >= np.abs(r.tmd) - 1e-12)


def test_percentile_table_layout(hist):
    cfg = SimulationConfig(hist, "A", pool_size=10, steps=1, scenarios=100, percentiles=(0.99,))
    res = {"A": {"multi_step": simulate_pool(cfg)}}
    rows = percentile_table(res, "df", ["A"], {"A": 0.0006})
    assert [r[0] for r in rows] == ["DF", "Historical Average", "MS Average", "MS-99.00%"]


def test_config_validation(hist):
    with pytest.raises(ValidationError):
        SimulationConfig(hist, "D")
    with pytest.raises(ValidationError):
        SimulationConfig(hist, "A", scenarios=0)
    with pytest.raises(ValidationError):
        SimulationConfig(hist, "A", mode="other")
    with pytest.raises(ValidationError):
        SimulationConfig(hist, "A", percentiles=(1.5,))
    bad = TransitionMatrix(hist.schema, hist.entries * 0.9)
    with pytest.raises(ValidationError):
        SimulationConfig(bad, "A")
