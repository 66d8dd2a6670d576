"""Thermometer threshold plans: fitting, realization, encoding, gradients."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from lutnn.encoder import (
    RHO_IMAGE,
    RHO_TABULAR,
    ThresholdPlan,
    _encode_soft_cached,
    encode_hard,
    encode_soft,
    encode_soft_back,
    fit_distributive,
    fit_uniform,
    realize_thresholds,
)
from lutnn.oracle import finite_diff

finite = {"allow_nan": False, "allow_infinity": False}


def small_plan(l=4, d=3, rho=0.1, learnable=False, shared=False):
    base = np.array([0.0, -1.0, 2.0])[:d] if not shared else np.zeros(1)
    deltas = np.linspace(-1, 1, (l - 1) * (1 if shared else d)).reshape(l - 1, -1)
    return ThresholdPlan(l, d, base, deltas, rho=rho, learnable=learnable, shared=shared)


@settings(max_examples=100, deadline=None)
@given(
    hnp.arrays(np.float64, (5, 2), elements=st.floats(-5, 5, **finite)),
    hnp.arrays(np.float64, (2,), elements=st.floats(-5, 5, **finite)),
)
def test_realized_thresholds_strictly_increase(deltas, base):
    plan = ThresholdPlan(6, 2, base, deltas, rho=0.5)
    t = realize_thresholds(plan)
    assert t.shape == (6, 2)
    assert np.all(np.diff(t, axis=0) > 0)


def test_encode_hard_prefix_monotone(rng):
    plan = small_plan()
    x = rng.normal(size=(50, 3), scale=3)
    bits = encode_hard(plan, x).reshape(50, 3, 4)
    # a set bit at a higher threshold forces every lower bit in the ladder
    assert np.all(np.diff(bits, axis=2) <= 0)


def test_encode_hard_tie_sets_bit():
    plan = ThresholdPlan(2, 1, np.array([1.0]), np.array([[0.0]]), rho=0.1)
    t = realize_thresholds(plan)
    bits = encode_hard(plan, np.array([t[0, 0]]))
    assert bits[0] == 1.0  # comparison is <=, an exact hit counts


def test_encode_hard_shapes():
    plan = small_plan()
    single = encode_hard(plan, np.zeros(3))
    batch = encode_hard(plan, np.zeros((7, 3)))
    assert single.shape == (12,)
    assert batch.shape == (7, 12)
    np.testing.assert_array_equal(batch[0], single)


def test_encode_rejects_wrong_feature_count():
    plan = small_plan()
    with pytest.raises(ValueError, match="features"):
        encode_hard(plan, np.zeros((2, 5)))
    with pytest.raises(ValueError, match="features"):
        encode_soft(plan, np.zeros((2, 5)))


def test_encode_soft_approaches_hard_as_rho_shrinks(rng):
    base = np.array([0.0, -1.0, 2.0])
    deltas = np.linspace(-1, 1, 9).reshape(3, 3)
    x = rng.normal(size=(40, 3), scale=3)
    # keep every sample away from every threshold so the limit is clean
    wide = ThresholdPlan(4, 3, base, deltas, rho=1.0)
    t = realize_thresholds(wide)
    margin = np.abs(x[:, :, None] - t.T[None, :, :]).min()
    assume_ok = margin > 1e-3
    assert assume_ok, "degenerate draw, widen the margin filter"
    hard = encode_hard(wide, x)
    for rho in (1e-4, 1e-6):
        plan = ThresholdPlan(4, 3, base, deltas, rho=rho)
        soft = encode_soft(plan, x)
        np.testing.assert_allclose(soft, hard, rtol=0, atol=1e-9)


def test_encode_soft_noise_shifts_probability():
    plan = ThresholdPlan(1, 1, np.zeros(1), np.zeros((0, 1)), rho=1.0)
    x = np.array([[0.0]])
    assert encode_soft(plan, x)[0, 0] == 0.5
    up = encode_soft(plan, x, noise=np.array([3.0]))
    down = encode_soft(plan, x, noise=np.array([-3.0]))
    assert up[0, 0] == pytest.approx(1 / (1 + np.exp(-3)))
    assert down[0, 0] == pytest.approx(1 / (1 + np.exp(3)))


@pytest.mark.parametrize("shared", [False, True])
def test_encode_soft_back_gradcheck(rng, shared):
    plan = small_plan(l=3, d=2 if not shared else 4, rho=0.7, learnable=True, shared=shared)
    d = plan.feature_count
    x = rng.normal(size=(6, d), scale=2)
    weights = rng.normal(size=(6, plan.output_width))

    def loss_at(base, deltas):
        probe = ThresholdPlan(
            plan.bits_per_feature, d, base.copy(), deltas.copy(),
            rho=plan.rho, learnable=True, shared=shared,
        )
        return float((encode_soft(probe, x) * weights).sum())

    bits, cache = _encode_soft_cached(plan, x)
    dbase, ddeltas = encode_soft_back(plan, cache, weights)

    fd_base = finite_diff(
        lambda b: loss_at(b.reshape(plan.base.shape), plan.deltas), plan.base.ravel(), step=1e-6
    )
    np.testing.assert_allclose(dbase.ravel(), fd_base, rtol=1e-5, atol=1e-7)
    fd_deltas = finite_diff(
        lambda dl: loss_at(plan.base, dl.reshape(plan.deltas.shape)),
        plan.deltas.ravel(),
        step=1e-6,
    )
    np.testing.assert_allclose(ddeltas.ravel(), fd_deltas, rtol=1e-5, atol=1e-7)


def test_fit_uniform_spacing():
    samples = np.array([[0.0, 10.0], [4.0, 30.0]])
    plan = fit_uniform(samples, 3)
    t = realize_thresholds(plan)
    np.testing.assert_allclose(t[:, 0], [1.0, 2.0, 3.0], atol=1e-9)
    np.testing.assert_allclose(t[:, 1], [15.0, 20.0, 25.0], atol=1e-9)


def test_fit_uniform_constant_feature_collapses():
    samples = np.full((10, 1), 7.5)
    plan = fit_uniform(samples, 3)
    t = realize_thresholds(plan)
    np.testing.assert_allclose(t[:, 0], 7.5, atol=1e-6)
    # the constant itself still encodes to all ones
    assert encode_hard(plan, np.array([7.5])).sum() == 3


def test_fit_distributive_hits_quantiles(rng):
    samples = rng.normal(size=(4001, 2), scale=[1.0, 50.0])
    plan = fit_distributive(samples, 3)
    t = realize_thresholds(plan)
    expected = np.quantile(samples, [0.25, 0.5, 0.75], axis=0)
    np.testing.assert_allclose(t, expected, rtol=1e-6, atol=1e-6)


def test_fit_distributive_balances_bits(rng):
    samples = np.exp(rng.normal(size=(5000, 1), scale=2))  # heavy tail
    plan = fit_distributive(samples, 4)
    bits = encode_hard(plan, samples).reshape(-1, 4)
    rates = bits.mean(axis=0)
    np.testing.assert_allclose(rates, [0.8, 0.6, 0.4, 0.2], atol=0.03)


def test_fit_shared_pools_features(rng):
    samples = rng.uniform(size=(100, 5))
    plan = fit_distributive(samples, 3, shared=True)
    assert plan.shared and plan.base.shape == (1,)
    t = realize_thresholds(plan)
    assert t.shape == (3, 5)
    # every feature sees the same ladder
    assert np.all(t == t[:, :1])


def test_fit_validation():
    with pytest.raises(ValueError, match="matrix"):
        fit_uniform(np.zeros(3), 2)
    with pytest.raises(ValueError, match="at least one bit"):
        fit_uniform(np.zeros((2, 2)), 0)
    with pytest.raises(ValueError, match="samples"):
        fit_distributive(np.zeros((2, 2)), 5)


def test_plan_validation():
    with pytest.raises(ValueError, match="bit"):
        ThresholdPlan(0, 1, np.zeros(1), np.zeros((0, 1)))
    with pytest.raises(ValueError, match="rho"):
        ThresholdPlan(1, 1, np.zeros(1), np.zeros((0, 1)), rho=0.0)
    with pytest.raises(ValueError, match="finite"):
        ThresholdPlan(2, 1, np.array([np.nan]), np.zeros((1, 1)))


def test_rho_defaults_are_sane():
    assert 0 < RHO_IMAGE < RHO_TABULAR < 1
