"""Slow, independent reference paths used to cross-check the fast ones.

Everything in this module is deliberately naive: the transform is a dense
matrix built from popcount parity (never the butterfly used elsewhere),
nearest-table search is exhaustive, and derivatives come from central
differences. Tests lean on these; library code must not import this module.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence

import numpy as np

from .hadamard import LutTable

# exhaustive enumeration is 2^(2^n) tables; past n=4 that is 4 billion
ENUM_MAX_ARITY = 4


def dense_transform(n: int) -> np.ndarray:
    """Dense (2^n, 2^n) parity matrix: entry [a, i] = (-1)^popcount(a & i).

    Built directly from the definition so it shares nothing with the
    butterfly implementation.
    """
    if n < 0:
        raise ValueError("arity must be non-negative")
    size = 1 << n
    a = np.arange(size)
    parity = np.zeros((size, size), dtype=np.int64)
    for row in range(size):
        for col in range(size):
            parity[row, col] = bin(row & col).count("1")
    return np.where(parity % 2 == 0, 1, -1).astype(np.float64)


def enumerate_luts(n: int):
    """Yield every n-input lookup table once, ascending by truth-table integer.

    The integer weights address a with 2^a, i.e. bit a of the integer is the
    table's output at address a.
    """
    if not 1 <= n <= ENUM_MAX_ARITY:
        raise ValueError(f"exhaustive enumeration supports 1 <= n <= {ENUM_MAX_ARITY}, got {n}")
    size = 1 << n
    for value in range(1 << size):
        yield LutTable.from_int(n, value)


def brute_nearest_lut(theta: Sequence[float], p: float) -> tuple[list[LutTable], float]:
    """Exhaustively find the lookup tables nearest to a coefficient vector.

    Distance is the L_p norm (p may be inf) between the sigmoid-squashed
    synthesized corner values and the table's 0/1 outputs. Returns the full
    set of minimizers (ties included) and the minimum distance.
    """
    theta = np.asarray(theta, dtype=np.float64)
    size = theta.shape[0]
    n = size.bit_length() - 1
    if 1 << n != size:
        raise ValueError("coefficient vector length must be a power of two")
    corners = 1.0 / (1.0 + np.exp(-dense_transform(n) @ theta))

    tables = np.array([t.bits for t in enumerate_luts(n)], dtype=np.float64)
    diff = np.abs(corners[None, :] - tables)
    if np.isinf(p):
        dists = diff.max(axis=1)
    else:
        dists = (diff**p).sum(axis=1) ** (1.0 / p)
    dmin = dists.min()
    # tolerate float fuzz when collecting ties
    winners = np.nonzero(dists <= dmin + 1e-12)[0]
    return [LutTable.from_int(n, int(v)) for v in winners], float(dmin)


def finite_diff(
    fn: Callable[[np.ndarray], float],
    point: Sequence[float],
    step: float = 1e-5,
) -> np.ndarray:
    """Central-difference gradient of a scalar function at a point."""
    point = np.asarray(point, dtype=np.float64)
    grad = np.zeros_like(point)
    for k in range(point.size):
        hi = point.copy()
        lo = point.copy()
        hi[k] += step
        lo[k] -= step
        fhi = float(fn(hi))
        flo = float(fn(lo))
        if not (np.isfinite(fhi) and np.isfinite(flo)):
            raise FloatingPointError(f"non-finite function value near coordinate {k}")
        grad[k] = (fhi - flo) / (2.0 * step)
    return grad
