import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import NaiveOnlineLearner, gram_norm_sq
from ovklearn.exceptions import ConfigError, DimensionMismatch, NumericsError
from ovklearn.kernels import NonSeparablePoly, SeparableGaussian
from ovklearn.losses import EpsilonInsensitive, SquaredLoss
from ovklearn.onorma import (
    ONORMA,
    TruncationSchedule,
    norm_recursion,
    truncation_window,
)


def stream(seed, n, p=4, d=3, scale=0.5):
    rng = np.random.default_rng(seed)
    xs = rng.uniform(0.0, 1.0, size=(n, p))
    ys = scale * rng.normal(size=(n, d))
    return xs, ys


def test_truncation_window_hand_values():
    assert truncation_window(100, 100, 0.25) == 100
    # 100^0.75 = 31.62...
    assert truncation_window(200, 100, 0.25) == 131
    assert truncation_window(101, 100, 0.25) == 101
    assert truncation_window(50, 100, 0.25) == 50
    assert truncation_window(0, 100, 0.25) == 0


def test_truncation_window_validation():
    with pytest.raises(ConfigError):
        truncation_window(10, 100, 0.5)
    with pytest.raises(ConfigError):
        truncation_window(10, 100, 0.0)
    with pytest.raises(ConfigError):
        truncation_window(10, 0, 0.25)
    with pytest.raises(ConfigError):
        truncation_window(-1, 100, 0.25)
    with pytest.raises(ConfigError):
        TruncationSchedule(t0=10, epsilon=0.6)


@settings(max_examples=200, deadline=None)
@given(
    t=st.integers(0, 5000),
    t0=st.integers(1, 300),
    epsilon=st.floats(0.01, 0.49),
)
def test_truncation_window_properties(t, t0, epsilon):
    s = truncation_window(t, t0, epsilon)
    assert 0 <= s <= t
    assert truncation_window(t + 1, t0, epsilon) >= s
    if t <= t0:
        assert s == t


def test_norm_recursion_hand_value():
    # 0.25 * 1 + <I a, a> + 2 * 0.5 * <g, a> with a = (1, 1), g = (1, 0)
    got = norm_recursion(1.0, np.array([1.0, 0.0]), np.eye(2), np.array([1.0, 1.0]), 0.5)
    assert abs(got - 3.25) <= 1e-15


def test_first_step():
    k = SeparableGaussian(mu=1.0, dim=2)
    model = ONORMA(k, lam=0.01, eta0=1.0)
    x = np.array([0.2, 0.4, 0.8])
    y = np.array([1.0, -2.0])
    res = model.step(x, y)
    # f_0 = 0, so the first prediction is the zero vector
    assert np.array_equal(res.prediction, np.zeros(2))
    assert res.loss == 0.5 * 5.0
    assert res.instantaneous_risk == res.loss
    # eta_1 = 1: the new coefficient is exactly y
    assert abs(res.new_coeff_norm - np.sqrt(5.0)) <= 1e-12
    assert model.support_size == 1
    assert np.allclose(model.predict(x), k.apply(x, x, y), atol=1e-12)
    assert abs(model.norm_sq - float(y @ (k(x, x) @ y))) <= 1e-12


def test_two_step_decay_of_first_coefficient():
    k = SeparableGaussian(mu=1.0, dim=2)
    model = ONORMA(k, lam=0.5, eta0=0.5)
    xs, ys = stream(31, 2)
    xs, ys = xs, ys[:, :2]
    model.step(xs[0], ys[0])
    first = model._state.coeffs[0].copy()
    assert np.allclose(first, 0.5 * ys[0], atol=1e-15)
    model.step(xs[1], ys[1])
    decay2 = 1.0 - (0.5 / np.sqrt(2.0)) * 0.5
    assert np.allclose(model._state.coeffs[0], decay2 * first, rtol=1e-12)


def test_learning_rate_schedule():
    model = ONORMA(SeparableGaussian(mu=1.0, dim=2), lam=0.01, eta0=0.8)
    assert model.learning_rate(4) == 0.4
    assert model.learning_rate(1) == 0.8


def test_matches_naive_oracle_through_renormalization():
    # lam and eta0 chosen so the lazy scale underflows repeatedly
    k = SeparableGaussian(mu=1.0, dim=3)
    model = ONORMA(k, lam=0.9, eta0=0.9)
    naive = NaiveOnlineLearner(k, lam=0.9, eta0=0.9)
    xs, ys = stream(32, 500)
    folds = 0
    prev_scale = model._state.scale
    for x, y in zip(xs, ys):
        res = model.step(x, y)
        expected = naive.step(x, y)
        assert np.allclose(res.prediction, expected, rtol=1e-10, atol=1e-10)
        if model._state.scale > prev_scale:
            folds += 1
        prev_scale = model._state.scale
    assert folds >= 2  # the run actually exercised renormalization
    assert model.support_size == len(naive.terms)
    probe = np.array([0.5, 0.1, 0.9, 0.3])
    assert np.allclose(model.predict(probe), naive.predict(probe), rtol=1e-10, atol=1e-10)


def test_matches_naive_oracle_with_truncation():
    schedule = TruncationSchedule(t0=20, epsilon=0.25)
    k = NonSeparablePoly(mu=0.4, dim=2)
    model = ONORMA(k, lam=0.2, eta0=0.5, truncation=schedule)
    naive = NaiveOnlineLearner(k, lam=0.2, eta0=0.5, truncation=schedule)
    xs, ys = stream(33, 300, d=2, scale=0.3)
    for t, (x, y) in enumerate(zip(xs, ys), start=1):
        res = model.step(x, y)
        expected = naive.step(x, y)
        assert np.allclose(res.prediction, expected, rtol=1e-10, atol=1e-10)
        assert model.support_size == len(naive.terms)
        assert model.support_size <= schedule.window(t)


def test_norm_tracker_matches_gram_oracle():
    k = SeparableGaussian(mu=2.0, dim=2)
    model = ONORMA(k, lam=0.1, eta0=0.5)
    xs, ys = stream(34, 200, d=2)
    for i, (x, y) in enumerate(zip(xs, ys), start=1):
        model.step(x, y)
        if i % 25 == 0:
            exact = model.hypothesis_norm_sq()
            assert abs(model.norm_sq - exact) <= 1e-8 * max(1.0, exact)
    state = model._state
    oracle = gram_norm_sq(k, list(state.support), list(state.coeffs))
    assert abs(model.hypothesis_norm_sq() - oracle) <= 1e-9 * max(1.0, oracle)
    assert abs(model.norm_sq - oracle) <= 1e-8 * max(1.0, oracle)


def test_norm_tracker_with_truncation_drops():
    schedule = TruncationSchedule(t0=15, epsilon=0.25)
    k = SeparableGaussian(mu=1.0, dim=2)
    model = ONORMA(k, lam=0.1, eta0=0.5, truncation=schedule)
    xs, ys = stream(35, 120, d=2)
    for i, (x, y) in enumerate(zip(xs, ys), start=1):
        model.step(x, y)
        if i % 10 == 0:
            exact = model.hypothesis_norm_sq()
            assert abs(model.norm_sq - exact) <= 1e-8 * max(1.0, exact)
    assert model.support_size < 120  # drops actually happened


def test_predict_empty_and_batch():
    model = ONORMA(SeparableGaussian(mu=1.0, dim=3), lam=0.1, eta0=0.5)
    assert np.array_equal(model.predict(np.ones(4)), np.zeros(3))
    batch = model.predict(np.ones((5, 4)))
    assert np.array_equal(batch, np.zeros((5, 3)))
    xs, ys = stream(36, 20)
    model.fit(xs, ys)
    queries = np.random.default_rng(37).uniform(size=(6, 4))
    rows = np.stack([model.predict(q) for q in queries])
    assert np.allclose(model.predict(queries), rows, rtol=1e-12, atol=1e-12)


def test_zero_gradient_steps_do_not_grow_support():
    wide = EpsilonInsensitive(epsilon=100.0)
    model = ONORMA(SeparableGaussian(mu=1.0, dim=2), loss=wide, lam=0.1, eta0=0.5)
    xs, ys = stream(38, 30, d=2)
    results = model.fit(xs, ys)
    assert model.support_size == 0
    assert model.norm_sq == 0.0
    assert all(r.new_coeff_norm == 0.0 for r in results)
    # squared loss with an exactly-zero first target: gradient is zero too
    m2 = ONORMA(SeparableGaussian(mu=1.0, dim=2), lam=0.1, eta0=0.5)
    m2.step(np.ones(3), np.zeros(2))
    assert m2.support_size == 0


def test_constructor_validation():
    k = SeparableGaussian(mu=1.0, dim=2)
    with pytest.raises(ConfigError):
        ONORMA(k, lam=0.0)
    with pytest.raises(ConfigError):
        ONORMA(k, lam=-1.0)
    with pytest.raises(ConfigError):
        ONORMA(k, lam=0.5, eta0=0.0)
    with pytest.raises(ConfigError):
        ONORMA(k, lam=0.5, eta0=2.0)  # eta0 * lam = 1


def test_step_validation():
    model = ONORMA(SeparableGaussian(mu=1.0, dim=2), lam=0.1, eta0=0.5)
    with pytest.raises(DimensionMismatch):
        model.step(np.ones((2, 3)), np.zeros(2))
    with pytest.raises(DimensionMismatch):
        model.step(np.ones(3), np.zeros(3))
    model.step(np.ones(3), np.zeros(2) + 0.5)
    with pytest.raises(DimensionMismatch):
        model.step(np.ones(4), np.full(2, 0.5))  # input dim changed mid-run


def test_non_finite_gradient_raises():
    model = ONORMA(SeparableGaussian(mu=1.0, dim=2), lam=0.1, eta0=0.5)
    with pytest.raises(NumericsError, match="step 1"):
        model.step(np.ones(3), np.array([np.inf, 0.0]))


def test_online_causality():
    # the emitted prediction must equal the pre-step hypothesis at x, and
    # mutating the caller's arrays afterwards must not corrupt the model
    k = SeparableGaussian(mu=1.0, dim=2)
    model = ONORMA(k, lam=0.1, eta0=0.5)
    control = ONORMA(k, lam=0.1, eta0=0.5)
    xs, ys = stream(39, 50, d=2)
    for x, y in zip(xs, ys):
        x_probe = x.copy()
        y_probe = y.copy()
        before = model.predict(x_probe)
        res = model.step(x_probe, y_probe)
        control.step(x, y)
        assert np.array_equal(res.prediction, before)
        x_probe[:] = 999.0
        y_probe[:] = -999.0
    check = np.full(4, 0.25)
    assert np.array_equal(model.predict(check), control.predict(check))


def test_instantaneous_risk_decomposition():
    model = ONORMA(SeparableGaussian(mu=1.0, dim=3), lam=0.3, eta0=0.5)
    xs, ys = stream(40, 60)
    for x, y in zip(xs, ys):
        norm_before = model.norm_sq
        res = model.step(x, y)
        assert abs(res.instantaneous_risk - (res.loss + 0.15 * norm_before)) <= 1e-12
        assert res.instantaneous_risk >= res.loss - 1e-15


def test_new_coeff_norm_matches_gradient_scale():
    model = ONORMA(SeparableGaussian(mu=1.0, dim=2), lam=0.1, eta0=0.7)
    xs, ys = stream(41, 40, d=2)
    for t, (x, y) in enumerate(zip(xs, ys), start=1):
        res = model.step(x, y)
        eta = 0.7 / np.sqrt(t)
        expected = eta * np.linalg.norm(res.prediction - y)
        assert abs(res.new_coeff_norm - expected) <= 1e-12 * max(1.0, expected)


def test_fit_returns_one_result_per_example():
    model = ONORMA(SeparableGaussian(mu=1.0, dim=3), lam=0.1, eta0=0.5)
    xs, ys = stream(42, 25)
    results = model.fit(xs, ys)
    assert len(results) == 25
    assert model.t == 25
