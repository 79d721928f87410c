import numpy as np
import pytest
from numpy.testing import assert_allclose

from sfmnet.baselines import ca_baseline, cv_baseline
from sfmnet.metrics import mde


def linear_track(n, v=(1.0, 0.5), dt=0.1):
    return np.arange(n)[:, None] * dt * np.asarray(v)


def quadratic_track(n, v=(1.0, 0.0), a=(0.0, 0.4), dt=0.1):
    t = np.arange(n)[:, None] * dt
    return t * np.asarray(v) + 0.5 * t**2 * np.asarray(a)


def test_cv_exact_on_uniform_motion():
    track = linear_track(60)
    pred = cv_baseline(track[:10], horizon=4.8, dt=0.1)
    assert mde(pred, track[10:58]) == pytest.approx(0.0, abs=1e-12)


def test_cv_stationary_window():
    window = np.zeros((5, 2))
    pred = cv_baseline(window, horizon=1.0, dt=0.1)
    assert_allclose(pred, 0.0)


def test_cv_needs_two_points():
    with pytest.raises(ValueError):
        cv_baseline(np.zeros((1, 2)), horizon=1.0, dt=0.1)


def test_ca_exact_on_quadratic_cv_not():
    track = quadratic_track(70)
    window = track[:10]
    horizon = 4.0
    ca = ca_baseline(window, horizon, 0.1)
    cv = cv_baseline(window, horizon, 0.1)
    truth = track[10:50]
    assert mde(ca, truth) == pytest.approx(0.0, abs=1e-9)
    assert mde(cv, truth) > 0.1


def test_ca_needs_three_points():
    with pytest.raises(ValueError):
        ca_baseline(np.zeros((2, 2)), horizon=1.0, dt=0.1)


def test_ca_reduces_to_cv_without_acceleration():
    track = linear_track(30)
    ca = ca_baseline(track[:10], horizon=1.5, dt=0.1)
    cv = cv_baseline(track[:10], horizon=1.5, dt=0.1)
    assert_allclose(ca, cv, atol=1e-12)


def test_prediction_lengths():
    track = linear_track(12)
    assert len(cv_baseline(track, 4.8, 0.1)) == 48
    assert len(ca_baseline(track, 2.35, 0.1)) == 24  # rounded
