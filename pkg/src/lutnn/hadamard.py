"""Walsh-basis analysis and synthesis for Boolean lookup tables.

Conventions used across the whole package:

- An n-input table is addressed by an integer a in [0, 2^n); bit k of a
  (k = 0 is the least significant bit) carries input k+1.
- Inputs map to the +-1 domain via s = 1 - 2x, so bit 0 becomes +1.
- Outputs map via 2t - 1, so output bit 1 becomes +1.
- Coefficient index i is the subset mask of participating inputs: the basis
  function for index i is the product of s_k over the set bits k of i.

Analysis of a table t is theta = 2^-n * W * (2t - 1) where W[a][i] =
(-1)^popcount(a & i); synthesis recovers output bit a as [ (W theta)_a > 0 ],
with an exact zero decoding to 0. Both directions run through the in-place
butterfly, never a dense matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_ARITY = 8


@dataclass(frozen=True)
class LutTable:
    """A concrete n-input truth table: bits[a] is the output at address a."""

    n: int
    bits: tuple[int, ...]

    def __post_init__(self):
        if not 1 <= self.n <= MAX_ARITY:
            raise ValueError(f"arity must be in [1, {MAX_ARITY}], got {self.n}")
        if len(self.bits) != 1 << self.n:
            raise ValueError(f"expected {1 << self.n} output bits, got {len(self.bits)}")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("table outputs must be 0 or 1")

    @classmethod
    def from_int(cls, n: int, value: int) -> "LutTable":
        """Table whose output at address a is bit a of value."""
        if value < 0 or value >= 1 << (1 << n):
            raise ValueError(f"truth-table integer out of range for arity {n}")
        return cls(n, tuple((value >> a) & 1 for a in range(1 << n)))

    def to_int(self) -> int:
        return sum(b << a for a, b in enumerate(self.bits))


@dataclass(frozen=True)
class WalshCoeffs:
    """Coefficients over the parity basis; values[i] weights subset mask i."""

    n: int
    values: tuple[float, ...]

    def __post_init__(self):
        if not 1 <= self.n <= MAX_ARITY:
            raise ValueError(f"arity must be in [1, {MAX_ARITY}], got {self.n}")
        if len(self.values) != 1 << self.n:
            raise ValueError(f"expected {1 << self.n} coefficients, got {len(self.values)}")
        if not all(np.isfinite(v) for v in self.values):
            raise ValueError("coefficients must be finite")


def fwht(values) -> np.ndarray:
    """Unnormalized fast Walsh-Hadamard transform along the last axis.

    Input length (last axis) must be a power of two. Applying the transform
    twice multiplies by the length. Accepts leading batch axes.
    """
    out = np.array(values, dtype=np.float64, copy=True)
    m = out.shape[-1]
    if m == 0 or m & (m - 1):
        raise ValueError(f"transform length must be a power of two, got {m}")
    h = 1
    while h < m:
        shaped = out.reshape(out.shape[:-1] + (m // (2 * h), 2, h))
        a = shaped[..., 0, :].copy()
        b = shaped[..., 1, :]
        shaped[..., 0, :] = a + b
        shaped[..., 1, :] = a - b
        h *= 2
    return out


def lut_to_theta(table: LutTable) -> WalshCoeffs:
    """Analyze a table into its parity-basis coefficients (exact dyadics)."""
    signs = 2.0 * np.array(table.bits, dtype=np.float64) - 1.0
    theta = fwht(signs) / (1 << table.n)
    return WalshCoeffs(table.n, tuple(theta.tolist()))


def theta_to_lut(coeffs: WalshCoeffs) -> LutTable:
    """Synthesize corner values and threshold them at zero.

    A strictly positive synthesized corner decodes to 1; zero ties decode
    to 0. This is the nearest-table projection under any L_p distance on
    sigmoid-squashed corners.
    """
    corners = fwht(np.asarray(coeffs.values, dtype=np.float64))
    bits = tuple(int(c > 0.0) for c in corners)
    return LutTable(coeffs.n, bits)
