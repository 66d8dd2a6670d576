"""Thermometer input encoding with fixed or learnable thresholds.

A plan holds, per feature, an ordered ladder of l thresholds. The ladder is
stored as a free base plus softplus-mapped gaps, which keeps the realized
thresholds strictly increasing under any gradient update. Encoding a value
against its ladder yields l bits whose 1s form a prefix (hard) or a soft
sigmoid relaxation of that prefix.

Bit layout: feature j occupies output positions [j*l, (j+1)*l), ordered by
ascending threshold. Hard bit i of feature j is [ threshold[i][j] <= x_j ].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# floor for degenerate (constant-feature) gaps; keeps softplus_inv finite while
# collapsing the realized ladder to machine-equal thresholds
_MIN_GAP = 1e-30

RHO_TABULAR = 0.001
RHO_IMAGE = 0.0002


def softplus(v):
    v = np.asarray(v, dtype=np.float64)
    return np.where(v > 30.0, v, np.log1p(np.exp(np.minimum(v, 30.0))))


def softplus_inv(y):
    """Inverse of softplus; y must be positive."""
    y = np.asarray(y, dtype=np.float64)
    if np.any(y <= 0):
        raise ValueError("softplus_inv needs positive gaps")
    small = y < 30.0
    y_small = np.where(small, y, 1.0)
    y_large = np.where(small, 30.0, y)
    return np.where(small, np.log(np.expm1(y_small)), y_large + np.log1p(-np.exp(-y_large)))


@dataclass
class ThresholdPlan:
    """Per-feature threshold ladders for thermometer encoding.

    base has shape (d,), deltas (l-1, d); a shared plan stores column
    vectors of width 1 that broadcast over features.
    """

    bits_per_feature: int
    feature_count: int
    base: np.ndarray
    deltas: np.ndarray
    rho: float = RHO_TABULAR
    learnable: bool = False
    shared: bool = False

    def __post_init__(self):
        if self.bits_per_feature < 1:
            raise ValueError("need at least one bit per feature")
        if self.feature_count < 1:
            raise ValueError("need at least one feature")
        if not self.rho > 0:
            raise ValueError("relaxation width rho must be positive")
        width = 1 if self.shared else self.feature_count
        self.base = np.asarray(self.base, dtype=np.float64).reshape(width)
        self.deltas = np.asarray(self.deltas, dtype=np.float64).reshape(
            self.bits_per_feature - 1, width
        )
        if not (np.all(np.isfinite(self.base)) and np.all(np.isfinite(self.deltas))):
            raise ValueError("plan parameters must be finite")

    @property
    def output_width(self) -> int:
        return self.bits_per_feature * self.feature_count


def realize_thresholds(plan: ThresholdPlan) -> np.ndarray:
    """Materialize the (l, d) threshold matrix from base and gaps."""
    gaps = softplus(plan.deltas)
    col = np.concatenate([plan.base[None, :], gaps], axis=0).cumsum(axis=0)
    if plan.shared:
        col = np.broadcast_to(col, (plan.bits_per_feature, plan.feature_count))
    return np.ascontiguousarray(col)


def _check_features(plan: ThresholdPlan, x: np.ndarray):
    if x.shape[-1] != plan.feature_count:
        raise ValueError(
            f"input has {x.shape[-1]} features, plan encodes {plan.feature_count}"
        )


def encode_hard(plan: ThresholdPlan, x) -> np.ndarray:
    """Exact thermometer bits: bit i of feature j is [ t_ij <= x_j ].

    Accepts (d,) or (N, d); returns (l*d,) or (N, l*d) float64 0/1.
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    _check_features(plan, x)
    t = realize_thresholds(plan)  # (l, d)
    bits = (t.T[None, :, :] <= x[:, :, None]).astype(np.float64)  # (N, d, l)
    out = bits.reshape(x.shape[0], plan.output_width)
    return out[0] if single else out


def encode_soft(plan: ThresholdPlan, x, noise=None) -> np.ndarray:
    """Relaxed thermometer bits: sigmoid((x_j - t_ij) / rho + noise).

    noise, when given, is a logistic draw broadcastable to (N, d, l); it
    makes a hard threshold of each bit Bernoulli with the noiseless
    probability.
    """
    bits, _ = _encode_soft_cached(plan, x, noise)
    return bits


def _encode_soft_cached(plan: ThresholdPlan, x, noise=None):
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    _check_features(plan, x)
    t = realize_thresholds(plan)
    u = (x[:, :, None] - t.T[None, :, :]) / plan.rho  # (N, d, l)
    if noise is not None:
        u = u + np.asarray(noise, dtype=np.float64).reshape(u.shape)
    f = np.empty_like(u)
    pos = u >= 0
    f[pos] = 1.0 / (1.0 + np.exp(-u[pos]))
    eu = np.exp(u[~pos])
    f[~pos] = eu / (1.0 + eu)
    out = f.reshape(x.shape[0], plan.output_width)
    return (out[0] if single else out), f


def encode_soft_back(plan: ThresholdPlan, cache: np.ndarray, dbits: np.ndarray):
    """Backward of encode_soft onto the plan parameters.

    cache is the (N, d, l) soft-bit array from the paired forward; dbits is
    the upstream gradient in output layout. Returns (dbase, ddeltas) with
    the plan's own parameter shapes.
    """
    f = cache
    n_samples = f.shape[0]
    df = dbits.reshape(n_samples, plan.feature_count, plan.bits_per_feature)
    dthresh = -(df * f * (1.0 - f) / plan.rho).sum(axis=0).T  # (l, d)
    if plan.shared:
        dthresh = dthresh.sum(axis=1, keepdims=True)
    # threshold i depends on base and on every gap with index < i
    dbase = dthresh.sum(axis=0)
    tail = dthresh[::-1].cumsum(axis=0)[::-1]  # tail[i] = sum_{j >= i} dthresh[j]
    sig = 1.0 / (1.0 + np.exp(-plan.deltas))
    ddeltas = sig * tail[1:]
    return dbase, ddeltas


def _grid_to_plan(grid: np.ndarray, rho: float, learnable: bool, shared: bool) -> ThresholdPlan:
    """Store an (l, d) target grid as base + softplus gaps, flooring ties."""
    l, d = grid.shape
    base = grid[0]
    if l > 1:
        gaps = np.maximum(np.diff(grid, axis=0), _MIN_GAP)
        deltas = softplus_inv(gaps)
    else:
        deltas = np.zeros((0, d))
    return ThresholdPlan(
        bits_per_feature=l,
        feature_count=d if not shared else d,
        base=base,
        deltas=deltas,
        rho=rho,
        learnable=learnable,
        shared=shared,
    )


def fit_uniform(
    samples, bits_per_feature: int, rho: float = RHO_TABULAR, *, shared: bool = False
) -> ThresholdPlan:
    """Evenly spaced thresholds over each feature's observed range.

    Threshold k (1-based) sits at min + k/(l+1) * (max - min). A constant
    feature collapses its ladder to a single repeated threshold at the
    constant; encode_hard then emits all-1 bits exactly at that value.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2 or samples.shape[0] < 1:
        raise ValueError("need a (samples, features) matrix with at least one row")
    l = bits_per_feature
    if l < 1:
        raise ValueError("need at least one bit per feature")
    d = samples.shape[1]
    pooled = samples.reshape(-1, 1) if shared else samples
    lo = pooled.min(axis=0)
    hi = pooled.max(axis=0)
    k = np.arange(1, l + 1)[:, None]
    grid = lo[None, :] + k / (l + 1) * (hi - lo)[None, :]
    plan = _grid_to_plan(grid, rho, learnable=False, shared=shared)
    plan.feature_count = d
    return plan


def fit_distributive(
    samples,
    bits_per_feature: int,
    rho: float = RHO_TABULAR,
    *,
    shared: bool = False,
    learnable: bool = False,
) -> ThresholdPlan:
    """Thresholds at the empirical k/(l+1) quantiles of each feature.

    Quantiles interpolate linearly between order statistics. This is also
    the initializer for learnable plans.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2:
        raise ValueError("need a (samples, features) matrix")
    l = bits_per_feature
    if l < 1:
        raise ValueError("need at least one bit per feature")
    if samples.shape[0] < l:
        raise ValueError(
            f"need at least {l} samples to place {l} quantile thresholds, got {samples.shape[0]}"
        )
    d = samples.shape[1]
    pooled = samples.reshape(-1, 1) if shared else samples
    q = np.arange(1, l + 1) / (l + 1)
    grid = np.quantile(pooled, q, axis=0)
    plan = _grid_to_plan(grid, rho, learnable=learnable, shared=shared)
    plan.feature_count = d
    return plan
