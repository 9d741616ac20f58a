import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from covpol import metrics

import oracles


def test_macro_fraction_examples():
    assert metrics.macro_fraction(np.zeros(164, bool)) == 0
    assert metrics.macro_fraction(np.ones(164, bool)) == 1
    s = np.zeros(164, bool)
    s[:13] = True
    assert metrics.macro_fraction(s) == pytest.approx(0.0793, abs=1e-4)


def test_micro_accuracy_examples():
    a = np.array([1, 0, 1, 0], bool)
    assert metrics.micro_accuracy(a, a) == 1
    assert metrics.micro_accuracy(a, ~a) == 0
    assert metrics.micro_accuracy(a, np.array([1, 1, 0, 0], bool)) == 0.5
    with pytest.raises(ValueError):
        metrics.micro_accuracy(a, a[:3])


@pytest.mark.property
def test_micro_accuracy_is_one_minus_hamming_exhaustive():
    for x in itertools.product([False, True], repeat=4):
        for y in itertools.product([False, True], repeat=4):
            assert metrics.micro_accuracy(np.array(x), np.array(y)) == oracles.hamming_accuracy(x, y)


def test_mse_examples():
    y = np.linspace(0, 0.9, 31)
    assert np.all(metrics.mse_curve(y, y) == 0)
    np.testing.assert_allclose(metrics.mse_curve(y + 0.1, y), 0.01)
    worst = y.copy()
    worst[12] += 0.1
    assert metrics.mse_curve(worst, y).max() == pytest.approx(0.01)
    with pytest.raises(ValueError):
        metrics.mse_curve(y, y[:-1])


def test_summed_mse_examples():
    assert metrics.summed_mse(np.zeros(31)) == 0
    assert metrics.summed_mse(np.full(32, 0.01)) == pytest.approx(0.32)


@settings(max_examples=100, deadline=None)
@given(arrays(float, st.integers(2, 40), elements=st.floats(0, 1)))
def test_summed_mse_vs_trapezoid(mse):
    diff = metrics.summed_mse(mse) - oracles.trapezoid(mse)
    assert diff == pytest.approx((mse[0] + mse[-1]) / 2, abs=1e-9)


def test_summarize_degenerate_and_extremes():
    same = np.tile(np.linspace(0, 1, 5)[:, None], (1, 7))
    s = metrics.summarize_ensemble(same)
    assert np.all(s.std == 0)
    np.testing.assert_allclose(s.ci95[:, 0], s.mean)
    np.testing.assert_allclose(s.ci50[:, 1], s.mean)

    two = np.array([[0.0, 1.0]] * 3)
    s = metrics.summarize_ensemble(two)
    np.testing.assert_allclose(s.mean, 0.5)
    assert np.all(s.ci95[:, 0] <= 0.025) and np.all(s.ci95[:, 1] >= 0.975)

    with pytest.raises(ValueError):
        metrics.summarize_ensemble(np.zeros((5, 1)))


def test_summarize_bernoulli_std():
    rng = np.random.default_rng(17)
    draws = (rng.random((6, 10_000)) < 0.5).astype(float)
    s = metrics.summarize_ensemble(draws)
    # the std of a sample std for Bernoulli(0.5) is far below 1/sqrt(n)
    assert np.all(np.abs(s.std - 0.5) < 3 * 0.5 / np.sqrt(10_000))
    assert np.all(np.abs(s.mean - 0.5) < 3 * 0.5 / np.sqrt(10_000))


@settings(max_examples=60, deadline=None)
@given(arrays(float, (6, 9), elements=st.floats(0, 1)))
def test_summary_bands_are_ordered(fr):
    s = metrics.summarize_ensemble(fr)
    assert np.all(s.ci95[:, 0] <= s.ci50[:, 0] + 1e-12)
    assert np.all(s.ci50[:, 0] <= s.ci50[:, 1] + 1e-12)
    assert np.all(s.ci50[:, 1] <= s.ci95[:, 1] + 1e-12)
    assert np.all((s.mean >= fr.min(axis=1) - 1e-12) & (s.mean <= fr.max(axis=1) + 1e-12))


def test_pearson_examples():
    a = np.array([0.1, 0.3, 0.2, 0.9])
    assert metrics.pearson_correlation(a, a) == pytest.approx(1)
    assert metrics.pearson_correlation(a, -a) == pytest.approx(-1)
    assert metrics.pearson_correlation(a, 2 * a + 3) == pytest.approx(1)
    with pytest.raises(ValueError):
        metrics.pearson_correlation(a, np.ones(4))


@settings(max_examples=60, deadline=None)
@given(arrays(float, 10, elements=st.floats(-5, 5)), arrays(float, 10, elements=st.floats(-5, 5)))
def test_pearson_matches_numpy(a, b):
    if np.ptp(a) < 1e-3 or np.ptp(b) < 1e-3:
        return
    assert metrics.pearson_correlation(a, b) == pytest.approx(np.corrcoef(a, b)[0, 1], abs=1e-9)


def test_ensemble_array_helpers():
    traj = np.zeros((3, 2, 4), bool)
    traj[1:, 0, :2] = True
    obs = np.zeros((4, 3), bool)
    np.testing.assert_allclose(metrics.macro_fractions(traj), [[0, 0], [0.5, 0], [0.5, 0]])
    np.testing.assert_allclose(metrics.micro_accuracies(traj, obs), [[1, 1], [0.5, 1], [0.5, 1]])
    per_run = metrics.per_run_mse_curve(metrics.macro_fractions(traj), np.zeros(3))
    np.testing.assert_allclose(per_run, [0, 0.125, 0.125])
