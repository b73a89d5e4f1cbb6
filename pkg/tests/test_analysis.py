import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from shearsep import analysis
from shearsep.analysis import (
    EmpiricalDistribution,
    MultiURho,
    MultiVAlpha,
    RescaledURho,
    RescaledVAlpha,
    SingleScale,
    ThresholdURho,
    ThresholdVAlpha,
    bound_row,
    bound_value,
    ks_statistic,
    mann_kendall,
    quantile_coupling,
    threshold_n,
)


# ---------------------------------------------------------------------------
# bound formulas
# ---------------------------------------------------------------------------

def test_single_scale_bound_values():
    assert bound_value(SingleScale(L=1.0, N=10**6)) == pytest.approx(0.642, abs=1e-12)
    assert bound_value(SingleScale(L=0.0, N=10**6)) == pytest.approx(0.640, abs=1e-12)


def test_multiscale_bound_value_and_vacuity():
    assert bound_value(MultiURho(rho=0.25, n=320)) == pytest.approx(3.0, abs=1e-12)
    raw, clamped, vacuous = bound_row(MultiURho(rho=0.25, n=320))
    assert vacuous and clamped == 1.0
    raw, clamped, vacuous = bound_row(MultiURho(rho=0.25, n=3200))
    assert not vacuous and raw == clamped


def test_rescaled_bounds():
    assert bound_value(RescaledURho(rho=0.25, n=32)) == pytest.approx(64 * 2 ** -1.0, abs=1e-12)
    assert bound_value(RescaledVAlpha(n=64)) == pytest.approx(64 * 2 ** -4.0, abs=1e-12)
    assert bound_value(MultiVAlpha(n=64)) == pytest.approx(512 * 2 ** -2.0, abs=1e-12)


def test_bounds_monotone_in_scale_parameters():
    for kind in (lambda n: SingleScale(L=1.0, N=n),
                 lambda n: RescaledURho(rho=0.3, n=n),
                 lambda n: RescaledVAlpha(n=n),
                 lambda n: MultiURho(rho=0.3, n=n),
                 lambda n: MultiVAlpha(n=n)):
        vals = [bound_value(kind(n)) for n in (10, 100, 1000, 10000)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_bound_parameter_validation():
    with pytest.raises(ValueError):
        bound_value(RescaledURho(rho=0.6, n=10))
    with pytest.raises(ValueError):
        bound_value(SingleScale(L=-1.0, N=10))
    with pytest.raises(ValueError):
        bound_value(ThresholdURho(rho=0.25, w_norm=1.0))


def test_bound_table_csv(tmp_path):
    f = tmp_path / "bounds.csv"
    analysis.bound_table_csv([SingleScale(L=1.0, N=100), MultiVAlpha(n=64)], f)
    lines = f.read_text().splitlines()
    assert lines[0] == "kind,params,raw_bound,clamped,vacuous"
    assert len(lines) == 3
    assert lines[1].startswith("SingleScale,L=1.0;N=100,")


# ---------------------------------------------------------------------------
# thresholds
# ---------------------------------------------------------------------------

def test_threshold_u_rho():
    assert threshold_n(ThresholdURho(rho=0.25, w_norm=1.0)) == 128
    # smaller norms lower only the log term
    assert threshold_n(ThresholdURho(rho=0.25, w_norm=0.5)) == 96


def test_threshold_v_alpha():
    assert threshold_n(ThresholdVAlpha(alpha=0.0, beta=1.0, w_norm=1.0)) == 64
    # the constant floor of 64 survives arbitrarily small norms
    assert threshold_n(ThresholdVAlpha(alpha=0.0, beta=1.0, w_norm=1e-12)) == 64


def test_threshold_rejects_useless_regularity():
    with pytest.raises(ValueError):
        threshold_n(ThresholdVAlpha(alpha=0.4, beta=0.8, w_norm=1.0))  # beta <= 1/(2(1-alpha))
    with pytest.raises(ValueError):
        threshold_n(ThresholdURho(rho=0.25, w_norm=0.0))


# ---------------------------------------------------------------------------
# KS statistic
# ---------------------------------------------------------------------------

def _ks_brute(samples, cdf):
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    best = 0.0
    for i, xi in enumerate(x):
        f = cdf(np.array([xi]))[0] if callable(cdf) else cdf(xi)
        best = max(best, abs((i + 1) / n - f), abs(i / n - f))
    return best


def test_ks_matches_brute_force_random_cases():
    rng = np.random.default_rng(7)
    for _ in range(20):
        x = rng.normal(size=rng.integers(2, 400))
        fast = ks_statistic(x, norm.cdf)
        slow = _ks_brute(x, lambda v: norm.cdf(v))
        assert fast == pytest.approx(slow, abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-50, 50), min_size=2, max_size=200))
def test_ks_brute_force_property(xs):
    fast = ks_statistic(np.array(xs), norm.cdf)
    slow = _ks_brute(np.array(xs), lambda v: norm.cdf(v))
    assert abs(fast - slow) <= 1e-12


def test_ks_on_reference_samples_small():
    rng = np.random.default_rng(11)
    x = rng.normal(size=10_000)
    assert ks_statistic(x, norm.cdf) <= 0.02


def test_ks_single_atom_against_continuous():
    x = np.zeros(100)
    assert ks_statistic(x, norm.cdf) >= 0.5


def test_ks_requires_two_samples():
    with pytest.raises(ValueError):
        ks_statistic(np.array([1.0]), norm.cdf)


def test_two_sample_ks_same_distribution():
    rng = np.random.default_rng(3)
    x, y = rng.normal(size=5000), rng.normal(size=5000)
    crit = analysis.ks_critical_value(5000, alpha=0.01) * math.sqrt(2.0)
    assert analysis.ks_two_sample(x, y) <= crit


# ---------------------------------------------------------------------------
# Mann-Kendall trend
# ---------------------------------------------------------------------------

def test_mann_kendall_signs():
    assert mann_kendall(np.arange(10))[0] == 45
    assert mann_kendall(np.arange(10)[::-1])[0] == -45
    assert mann_kendall(np.zeros(10)) == (0, 0.0)
    assert analysis.no_increasing_trend(np.zeros(5))
    assert analysis.no_increasing_trend(np.linspace(1, 0, 12))
    assert not analysis.no_increasing_trend(np.linspace(0, 1, 12))


# ---------------------------------------------------------------------------
# quantile coupling
# ---------------------------------------------------------------------------

def test_coupling_two_atom_antidiagonal():
    res = quantile_coupling(np.array([0.0, 1.0]))
    pairs = {tuple(p) for p in res.pairs}
    assert pairs == {(0.0, 1.0), (1.0, 0.0)}
    counts = {tuple(p): 0 for p in res.pairs}
    for p in res.pairs:
        counts[tuple(p)] += 1
    assert counts[(0.0, 1.0)] == counts[(1.0, 0.0)]
    assert res.diagonal_mass == 0.0
    assert not res.atom_violation


def test_coupling_full_atom_flagged():
    res = quantile_coupling(np.array([3.0]))
    assert res.diagonal_mass == 1.0
    assert res.atom_violation
    assert np.all(res.pairs == 3.0)


def test_coupling_uniform_grid_marginals_exact():
    values = np.arange(100) / 100.0
    res = quantile_coupling(values)
    assert res.diagonal_mass == 0.0
    left = np.sort(res.pairs[:, 0])
    right = np.sort(res.pairs[:, 1])
    expect = np.repeat(np.sort(values), res.grid_size // 100)
    assert np.array_equal(left, expect)
    assert np.array_equal(right, expect)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=2, max_size=120, unique=True))
def test_coupling_marginals_and_diagonal_property(values):
    mu = EmpiricalDistribution(np.array(values))
    res = quantile_coupling(mu)
    m = res.grid_size
    expect = np.repeat(mu.values, m // len(mu))
    assert np.array_equal(np.sort(res.pairs[:, 0]), expect)
    assert np.array_equal(np.sort(res.pairs[:, 1]), expect)
    assert res.diagonal_mass == 0.0  # atomless: every atom has mass 1/n <= 1/2


def test_coupling_half_atom_boundary():
    # an atom of exactly half mass still couples off the diagonal
    res = quantile_coupling(np.array([0.0, 0.0, 1.0, 2.0]))
    assert res.diagonal_mass == 0.0
    assert not res.atom_violation


def test_coupling_majority_atom_lands_on_diagonal():
    res = quantile_coupling(np.array([5.0, 5.0, 5.0, 1.0]))
    assert res.atom_violation
    assert res.diagonal_mass > 0.0


def test_coupling_grid_size_must_be_compatible():
    with pytest.raises(ValueError):
        quantile_coupling(np.array([0.0, 1.0]), grid_size=6)
