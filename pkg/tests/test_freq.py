import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from digitlaw.bayes import DigitCounts, DirichletPrior, log_bf01_dirichlet, max_log_bf01, uniform_counts
from digitlaw.freq import (
    band_log_bf,
    chisq_stat,
    critical_value,
    threshold_counts,
    threshold_log_bf,
    threshold_matrix,
)

A1 = DirichletPrior.symmetric(1)
A50 = DirichletPrior.symmetric(50)


def test_chisq_stat_examples():
    assert chisq_stat(uniform_counts(1000)) == 0.0
    assert chisq_stat(DigitCounts((2, 0, 1, 1, 1, 1, 1, 1, 1, 1))) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        chisq_stat(DigitCounts.zeros())


@given(st.lists(st.integers(0, 10**6), min_size=10, max_size=10).filter(lambda c: sum(c) > 0))
def test_chisq_stat_matches_exact_and_scipy(c):
    n = sum(c)
    exact = sum(Fraction(x) ** 2 for x in (Fraction(v) - Fraction(n, 10) for v in c)) / Fraction(n, 10)
    assert chisq_stat(DigitCounts(tuple(c))) == pytest.approx(float(exact), rel=1e-12)
    assert chisq_stat(np.array([c]))[0] == pytest.approx(float(exact), rel=1e-12)
    assert chisq_stat(DigitCounts(tuple(c))) == pytest.approx(stats.chisquare(c).statistic, rel=1e-9)


def test_critical_value():
    assert critical_value() == pytest.approx(stats.chi2.ppf(0.95, 9), rel=1e-12)
    assert critical_value(0.01, 3) == pytest.approx(stats.chi2.ppf(0.99, 3), rel=1e-12)
    with pytest.raises(ValueError):
        critical_value(0.0)


def test_threshold_counts_n1000():
    tc = threshold_counts(1000)
    assert tc.counts.counts == (100,) * 8 + (129, 71)
    assert 100 + round(math.sqrt(16.9190 * 50)) == 129
    assert tc.statistic == pytest.approx(16.82)
    assert tc.critical == critical_value()


def test_threshold_degenerate_alpha_near_one():
    assert threshold_counts(10, alpha=1 - 1e-9).counts.counts == (1,) * 10


@pytest.mark.parametrize("n", [0, 15, 1001])
def test_threshold_rejects_off_grid(n):
    with pytest.raises(ValueError):
        threshold_counts(n)


def test_threshold_rejects_unreachable_critical_value():
    # At N = 20 the required excess exceeds what two cells can hold.
    with pytest.raises(ValueError):
        threshold_counts(20)


@pytest.mark.parametrize("n", [10**3, 10**4, 123_450, 10**6, 10**8])
def test_threshold_reduces_to_two_cells(n):
    """Eight summands vanish, the two remaining ones are equal squares."""
    tc = threshold_counts(n)
    base = n // 10
    n8 = tc.counts.counts[8]
    two_term = 2 * (n8 - base) ** 2 / base
    assert tc.counts.total == n
    assert tc.statistic == pytest.approx(two_term, rel=1e-14)


def test_threshold_statistic_slack_on_grid():
    crit = critical_value()
    for n in range(10**4, 10**6 + 1, 1000):
        assert abs(chisq_stat(threshold_counts(n).counts) - crit) <= 0.2, n


def test_threshold_matrix_matches_scalar():
    ns = np.array([5, 10, 20, 1000, 1005, 10**6])
    m = threshold_matrix(ns)
    assert np.isnan(m[[0, 1, 2, 4]]).all()
    assert m[3].tolist() == list(threshold_counts(1000).counts.counts)
    assert m[5].tolist() == list(threshold_counts(10**6).counts.counts)


def test_threshold_log_bf_examples():
    assert threshold_log_bf(1000, A1) == log_bf01_dirichlet(DigitCounts((100,) * 8 + (129, 71)), A1)
    assert threshold_log_bf(10**4, A1) < max_log_bf01(10**4, A1)
    assert threshold_log_bf(10**6, A1) > threshold_log_bf(10**4, A1)


def test_band_log_bf_vectorized():
    ns = np.arange(1000, 200_001, 1000)
    band = band_log_bf(ns, A50)
    for n, v in zip(ns[::37], band[::37]):
        assert v == pytest.approx(threshold_log_bf(int(n), A50), abs=1e-12)
    assert np.isnan(band_log_bf(np.array([15, 20]), A1)).all()


@pytest.mark.parametrize("prior", [A1, A50], ids=["a1", "a50"])
def test_band_increases_with_n(prior):
    coarse = band_log_bf(np.arange(10**4, 10**8 + 1, 10**5), prior)
    assert np.all(np.diff(coarse) > 0)
    # On the 1000-digit grid, n8 steps by whole counts, so the band carries
    # a small sawtooth; the dips stay far below the two-decimal scale.
    fine = band_log_bf(np.arange(10**4, 10**7 + 1, 1000), prior)
    assert np.diff(fine).min() > -0.02


def test_uniform_monte_carlo_rejection_rate_small():
    rng = np.random.default_rng(11)
    draws = rng.multinomial(10**4, [0.1] * 10, size=2000)
    rate = np.mean(chisq_stat(draws) > critical_value())
    assert rate == pytest.approx(0.05, abs=0.02)


def test_jeffreys_lindley_witness():
    # The threshold dataset nudged one count past the boundary: rejected at
    # alpha = .05, yet strong evidence for equal frequencies.
    n = 10**6
    c = list(threshold_counts(n).counts.counts)
    c[8] += 1
    c[9] -= 1
    counts = DigitCounts(tuple(c))
    assert chisq_stat(counts) > critical_value()
    assert log_bf01_dirichlet(counts, A1) > math.log(10)
