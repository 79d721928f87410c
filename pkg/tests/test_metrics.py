import numpy as np
import pytest

from sfmnet.metrics import fde, mde


def test_mde_identical_zero():
    t = np.random.default_rng(0).normal(0, 1, (10, 2))
    assert mde(t, t) == 0.0


def test_mde_constant_offset():
    t = np.random.default_rng(1).normal(0, 1, (10, 2))
    assert mde(t + np.array([1.0, 0.0]), t) == pytest.approx(1.0)


def test_mde_mean_arithmetic():
    pred = np.array([[1.0, 0.0], [3.0, 0.0]])
    truth = np.array([[0.0, 0.0], [0.0, 0.0]])
    assert mde(pred, truth) == pytest.approx(2.0)


def test_mde_translation_invariant_jointly():
    rng = np.random.default_rng(2)
    a = rng.normal(0, 1, (8, 2))
    b = rng.normal(0, 1, (8, 2))
    shift = np.array([13.0, -7.0])
    assert mde(a + shift, b + shift) == pytest.approx(mde(a, b))


def test_mde_length_mismatch():
    with pytest.raises(ValueError):
        mde(np.zeros((3, 2)), np.zeros((4, 2)))


def test_fde_identical_zero():
    t = np.random.default_rng(3).normal(0, 1, (5, 2))
    assert fde(t, t) == 0.0


def test_fde_hypotenuse():
    pred = np.array([[9.0, 9.0], [0.0, 0.0]])
    truth = np.array([[1.0, 1.0], [3.0, 4.0]])
    assert fde(pred, truth) == pytest.approx(5.0)


def test_fde_ignores_non_final_points():
    rng = np.random.default_rng(4)
    pred = rng.normal(0, 1, (6, 2))
    truth = rng.normal(0, 1, (6, 2))
    scrambled = pred.copy()
    scrambled[:-1] = rng.normal(0, 5, (5, 2))
    assert fde(scrambled, truth) == pytest.approx(fde(pred, truth))


def test_fde_empty_raises():
    with pytest.raises(ValueError):
        fde(np.zeros((0, 2)), np.zeros((0, 2)))


def test_metrics_nonnegative():
    rng = np.random.default_rng(5)
    for _ in range(20):
        a = rng.normal(0, 2, (7, 2))
        b = rng.normal(0, 2, (7, 2))
        assert mde(a, b) >= 0.0
        assert fde(a, b) >= 0.0
