"""Relaxed Boolean neurons and their exact gradients.

Four parametrizations of an n-input Boolean function are supported:

- warp: parity-basis coefficients theta, squashed through a temperature
  sigmoid. The canonical trainable form in this package.
- llnn: a sigmoid weight per truth-table row, mixed by corner indicator
  polynomials.
- dlgn: a softmax over the 16 two-input gates, each relaxed by its
  multilinear surrogate (two-input only).
- dwn: a raw real per table entry, addressed by thresholding the inputs
  at zero; gradients use a documented finite-difference-style surrogate
  because the forward pass is piecewise constant.

Every neuron evaluates in one of four forward modes. Soft is the plain
relaxation. GumbelSoft perturbs it with a standard logistic draw so that a
hard threshold of the output is Bernoulli with the Soft probability. The STE
variants hard-threshold the inputs, emit exact 0/1 outputs, and register the
gradients of the corresponding soft mode at the same pre-activation. The
noiseless STE forward reads the emitted bit from the neuron's discretized
table, so it coincides with the compiled discrete circuit by construction;
under Gumbel noise the emitted bit is the thresholded noisy relaxation
(a Bernoulli sample with the Soft probability).

The *_layer functions are the batched kernels used by the network trainer;
they take (batch, count, n) input blocks and per-neuron parameter matrices.
The scalar functions wrap them for single-neuron use.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hadamard import MAX_ARITY, LutTable, WalshCoeffs, fwht, lut_to_theta

MODE_KINDS = ("soft", "gumbel-soft", "soft-ste", "gumbel-ste")

# keep mixture outputs strictly inside (0, 1) before logit-space noise
_PROB_EPS = 1e-12


@dataclass
class ForwardMode:
    """Evaluation mode plus the noise source used by the stochastic kinds."""

    kind: str = "soft"
    rng: np.random.Generator | None = None

    def __post_init__(self):
        if self.kind not in MODE_KINDS:
            raise ValueError(f"unknown forward mode {self.kind!r}, expected one of {MODE_KINDS}")

    @property
    def stochastic(self) -> bool:
        return self.kind in ("gumbel-soft", "gumbel-ste")

    @property
    def hard(self) -> bool:
        return self.kind in ("soft-ste", "gumbel-ste")

    def logistic(self, shape) -> np.ndarray:
        """Standard logistic draws via inverse CDF: ln(u / (1 - u))."""
        rng = self.rng if self.rng is not None else np.random.default_rng()
        u = np.clip(rng.random(shape), 1e-12, 1.0 - 1e-12)
        return np.log(u / (1.0 - u))


SOFT = ForwardMode("soft")


def logistic_noise(rng: np.random.Generator, shape) -> np.ndarray:
    u = np.clip(rng.random(shape), 1e-12, 1.0 - 1e-12)
    return np.log(u / (1.0 - u))


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    return _sigmoid(z)


def logit(p):
    return np.log(p) - np.log1p(-p)


# ---------------------------------------------------------------------------
# neuron containers


@dataclass
class WarpNeuron:
    """Parity-basis neuron: sigmoid((1/tau) * sum_i theta_i * prod s_k)."""

    coeffs: WalshCoeffs
    tau: float = 1.0

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("temperature must be positive")

    @property
    def n(self) -> int:
        return self.coeffs.n


@dataclass
class LlnnNeuron:
    """Indicator-mixture neuron: sum_i sigmoid(raw_i) * indicator_i(x)."""

    raw_weights: np.ndarray

    def __post_init__(self):
        self.raw_weights = np.asarray(self.raw_weights, dtype=np.float64)
        m = self.raw_weights.shape[-1]
        if self.raw_weights.ndim != 1 or m & (m - 1) or m < 2:
            raise ValueError("raw weights must be a 1-D vector with power-of-two length")

    @property
    def n(self) -> int:
        return self.raw_weights.shape[0].bit_length() - 1


@dataclass
class DlgnNeuron:
    """Softmax mixture over the 16 two-input gates (two-input only)."""

    raw_weights: np.ndarray

    def __post_init__(self):
        self.raw_weights = np.asarray(self.raw_weights, dtype=np.float64)
        if self.raw_weights.shape != (16,):
            raise ValueError("expected 16 raw gate weights (two-input gates only)")

    @property
    def n(self) -> int:
        return 2


@dataclass
class DwnNeuron:
    """Directly-addressed table of reals; inputs are thresholded at zero."""

    entries: np.ndarray

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=np.float64)
        m = self.entries.shape[-1]
        if self.entries.ndim != 1 or m & (m - 1) or m < 2:
            raise ValueError("entries must be a 1-D vector with power-of-two length")

    @property
    def n(self) -> int:
        return self.entries.shape[0].bit_length() - 1


# ---------------------------------------------------------------------------
# the 16 two-input gates
#
# Rows are sorted lexicographically by truth tuple over input pairs
# (00, 01, 10, 11) where the pair reads (first input, second input).
# Surrogate coefficients are the multilinear interpolants of the truth
# values, listed as weights of (1, a, b, a*b).

GATE_ROWS = [
    ("CONST0", (0, 0, 0, 0), (0.0, 0.0, 0.0, 0.0)),
    ("AND", (0, 0, 0, 1), (0.0, 0.0, 0.0, 1.0)),
    ("A_AND_NOT_B", (0, 0, 1, 0), (0.0, 1.0, 0.0, -1.0)),
    ("ID_A", (0, 0, 1, 1), (0.0, 1.0, 0.0, 0.0)),
    ("B_AND_NOT_A", (0, 1, 0, 0), (0.0, 0.0, 1.0, -1.0)),
    ("ID_B", (0, 1, 0, 1), (0.0, 0.0, 1.0, 0.0)),
    ("XOR", (0, 1, 1, 0), (0.0, 1.0, 1.0, -2.0)),
    ("OR", (0, 1, 1, 1), (0.0, 1.0, 1.0, -1.0)),
    ("NOR", (1, 0, 0, 0), (1.0, -1.0, -1.0, 1.0)),
    ("XNOR", (1, 0, 0, 1), (1.0, -1.0, -1.0, 2.0)),
    ("NOT_B", (1, 0, 1, 0), (1.0, 0.0, -1.0, 0.0)),
    ("B_IMPLIES_A", (1, 0, 1, 1), (1.0, 0.0, -1.0, 1.0)),
    ("NOT_A", (1, 1, 0, 0), (1.0, -1.0, 0.0, 0.0)),
    ("A_IMPLIES_B", (1, 1, 0, 1), (1.0, -1.0, 0.0, 1.0)),
    ("NAND", (1, 1, 1, 0), (1.0, 0.0, 0.0, -1.0)),
    ("CONST1", (1, 1, 1, 1), (1.0, 0.0, 0.0, 0.0)),
]

GATE_NAMES = tuple(row[0] for row in GATE_ROWS)

# truth values rearranged into this package's addressing (bit 0 of the
# address is input a): address a + 2b <- pair position 2a + b
GATE_TABLES = np.array(
    [[row[1][0], row[1][2], row[1][1], row[1][3]] for row in GATE_ROWS], dtype=np.float64
)

GATE_SURROGATES = np.array([row[2] for row in GATE_ROWS], dtype=np.float64)

# truth-table integer -> gate name, for two-input table labeling
GATE_NAME_BY_INT = {
    int(sum(int(b) << a for a, b in enumerate(GATE_TABLES[g]))): GATE_NAMES[g]
    for g in range(16)
}


# ---------------------------------------------------------------------------
# batched kernels: warp


def _monomials(s: np.ndarray) -> np.ndarray:
    """All subset products of the last axis, index = subset mask."""
    *lead, n = s.shape
    m = np.empty((*lead, 1 << n), dtype=s.dtype)
    m[..., 0] = 1.0
    size = 1
    for k in range(n):
        m[..., size : 2 * size] = m[..., :size] * s[..., k : k + 1]
        size *= 2
    return m


def _table_lookup(tables: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Index per-neuron bit tables (C, 2^n) by hard inputs x (B, C, n)."""
    n = x.shape[-1]
    addr = np.zeros(x.shape[:-1], dtype=np.int64)
    for k in range(n):
        addr |= (x[..., k] > 0.5).astype(np.int64) << k
    picked = np.take_along_axis(
        np.asarray(tables, dtype=np.float64)[None], addr[..., None], axis=2
    )
    return picked[..., 0]


def warp_layer(theta: np.ndarray, tau: float, x: np.ndarray, kind: str = "soft", noise=None):
    """Batched warp forward. theta (C, 2^n), x (B, C, n) -> y (B, C), cache."""
    if kind in ("soft-ste", "gumbel-ste"):
        x = (x > 0.5).astype(np.float64)
    s = 1.0 - 2.0 * x
    m = _monomials(s)
    u = np.einsum("bcm,cm->bc", m, theta) / tau
    if noise is not None:
        u = u + noise
    f = _sigmoid(u)
    if kind in ("soft-ste", "gumbel-ste"):
        # noisy: Bernoulli sample; noiseless: the discretized table's bit
        y = (u > 0.0).astype(np.float64) if noise is not None else _table_lookup(fwht(theta) > 0.0, x)
    else:
        y = f
    return y, (m, s, f, theta, tau)


def warp_layer_back(cache, dy: np.ndarray):
    """Backward of warp_layer. Returns (dtheta (C, 2^n), dx (B, C, n))."""
    m, s, f, theta, tau = cache
    n = s.shape[-1]
    dpre = dy * f * (1.0 - f) / tau
    dtheta = np.einsum("bc,bcm->cm", dpre, m)
    gm = dpre[..., None] * theta
    ds = np.empty_like(s)
    size = m.shape[-1]
    for k in reversed(range(n)):
        size //= 2
        high = gm[..., size : 2 * size]
        ds[..., k] = np.einsum("...m,...m->...", high, m[..., :size])
        gm[..., :size] += high * s[..., k : k + 1]
    return dtheta, -2.0 * ds


# ---------------------------------------------------------------------------
# batched kernels: llnn


def _indicators(x: np.ndarray) -> np.ndarray:
    """Corner indicator products: entry i is prod_k x_k^[bit k] (1-x_k)^[~bit k]."""
    *lead, n = x.shape
    w = np.empty((*lead, 1 << n), dtype=x.dtype)
    w[..., 0] = 1.0
    size = 1
    for k in range(n):
        xk = x[..., k : k + 1]
        w[..., size : 2 * size] = w[..., :size] * xk
        w[..., :size] *= 1.0 - xk
        size *= 2
    return w


def _mixture_noise(f: np.ndarray, kind: str, noise):
    """Logit-space noise for probability-mixture neurons (llnn, dlgn).

    Stochastic kinds move the mixture into logit space, add the logistic
    draw, and squash back, preserving P(hard sample = 1) = f. Returns the
    (possibly perturbed) probability, its derivative w.r.t. f, and the
    perturbed logit (None when no noise applies).
    """
    if noise is not None and kind in ("gumbel-soft", "gumbel-ste"):
        fc = np.clip(f, _PROB_EPS, 1.0 - _PROB_EPS)
        z = logit(fc) + noise
        g = _sigmoid(z)
        dg_df = g * (1.0 - g) / (fc * (1.0 - fc))
        return g, dg_df, z
    return f, np.ones_like(f), None


def llnn_layer(raw: np.ndarray, x: np.ndarray, kind: str = "soft", noise=None):
    """Batched llnn forward. raw (C, 2^n), x (B, C, n) -> y (B, C), cache."""
    if kind in ("soft-ste", "gumbel-ste"):
        x = (x > 0.5).astype(np.float64)
    w = _indicators(x)
    g = _sigmoid(raw)
    f = np.einsum("bcm,cm->bc", w, g)
    y, dg_df, z = _mixture_noise(f, kind, noise)
    if kind in ("soft-ste", "gumbel-ste"):
        y = (z > 0.0).astype(np.float64) if z is not None else _table_lookup(raw > 0.0, x)
    return y, (w, x, g, raw, dg_df)


def llnn_layer_back(cache, dy: np.ndarray):
    """Backward of llnn_layer. Returns (draw (C, 2^n), dx (B, C, n)).

    Consumes the cache (the indicator array is unwound in place).
    """
    w, x, g, raw, dg_df = cache
    n = x.shape[-1]
    df = dy * dg_df
    draw = np.einsum("bc,bcm->cm", df, w) * g * (1.0 - g)
    gw = df[..., None] * g
    dx = np.empty_like(x)
    size = w.shape[-1]
    for k in reversed(range(n)):
        size //= 2
        low = w[..., :size]
        high = w[..., size : 2 * size]
        w_prev = low + high  # x*(w) + (1-x)*(w) reconstructs the previous level
        gl = gw[..., :size]
        gh = gw[..., size : 2 * size]
        dx[..., k] = np.einsum("...m,...m->...", w_prev, gh - gl)
        xk = x[..., k : k + 1]
        gw[..., :size] = gl * (1.0 - xk) + gh * xk
        w[..., :size] = w_prev
    return draw, dx


# ---------------------------------------------------------------------------
# batched kernels: dlgn


def _softmax(raw: np.ndarray) -> np.ndarray:
    e = np.exp(raw - raw.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def dlgn_layer(raw: np.ndarray, x: np.ndarray, kind: str = "soft", noise=None):
    """Batched dlgn forward. raw (C, 16), x (B, C, 2) -> y (B, C), cache."""
    if x.shape[-1] != 2:
        raise ValueError("dlgn neurons take exactly two inputs")
    if kind in ("soft-ste", "gumbel-ste"):
        x = (x > 0.5).astype(np.float64)
    alpha = _softmax(raw)
    coef = alpha @ GATE_SURROGATES  # (C, 4) multilinear weights of (1, a, b, ab)
    a = x[..., 0]
    b = x[..., 1]
    f = coef[:, 0] + coef[:, 1] * a + coef[:, 2] * b + coef[:, 3] * (a * b)
    y, dg_df, z = _mixture_noise(f, kind, noise)
    if kind in ("soft-ste", "gumbel-ste"):
        if z is not None:
            y = (z > 0.0).astype(np.float64)
        else:
            y = _table_lookup(GATE_TABLES[np.argmax(raw, axis=-1)], x)
    return y, (a, b, alpha, coef, dg_df)


def dlgn_layer_back(cache, dy: np.ndarray):
    """Backward of dlgn_layer. Returns (draw (C, 16), dx (B, C, 2))."""
    a, b, alpha, coef, dg_df = cache
    df = dy * dg_df
    dx = np.stack(
        [df * (coef[:, 1] + coef[:, 3] * b), df * (coef[:, 2] + coef[:, 3] * a)], axis=-1
    )
    basis = np.stack([np.ones_like(a), a, b, a * b], axis=-1)  # (B, C, 4)
    dalpha = np.einsum("bc,bcp,gp->cg", df, basis, GATE_SURROGATES)
    inner = (dalpha * alpha).sum(axis=-1, keepdims=True)
    draw = alpha * (dalpha - inner)
    return draw, dx


# ---------------------------------------------------------------------------
# batched kernels: dwn


def dwn_layer(entries: np.ndarray, x: np.ndarray, kind: str = "soft", noise=None):
    """Batched dwn forward. entries (C, 2^n), x (B, C, n) -> y (B, C), cache.

    Addressing: input k strictly positive sets address bit k. Soft kinds
    emit the addressed entry itself; STE kinds emit its sign bit. The
    stochastic kinds behave like their deterministic counterparts because
    the output has no probabilistic reading.
    """
    n = x.shape[-1]
    bits = x > 0.0
    addr = np.zeros(x.shape[:-1], dtype=np.int64)
    for k in range(n):
        addr |= bits[..., k].astype(np.int64) << k
    picked = np.take_along_axis(entries[None, :, :], addr[..., None], axis=2)[..., 0]
    y = (picked > 0.0).astype(np.float64) if kind in ("soft-ste", "gumbel-ste") else picked
    return y, (addr, entries, n)


def dwn_layer_back(cache, dy: np.ndarray):
    """Surrogate backward of dwn_layer. Returns (dentries, dx).

    The forward pass is piecewise constant, so exact gradients vanish
    almost everywhere. This registers a documented surrogate instead:
    the entry gradient is the upstream value routed to the addressed slot,
    and the input gradient along axis k is half the difference between the
    entries at the addressed corner with bit k forced to 1 versus 0.
    """
    addr, entries, n = cache
    c_count, m = entries.shape
    cols = np.broadcast_to(np.arange(c_count)[None, :], addr.shape)
    flat = (cols * m + addr).ravel()
    dentries = np.bincount(flat, weights=dy.ravel(), minlength=c_count * m).reshape(c_count, m)
    dx = np.empty(addr.shape + (n,), dtype=np.float64)
    for k in range(n):
        hi = np.take_along_axis(entries[None, :, :], (addr | (1 << k))[..., None], axis=2)[..., 0]
        lo = np.take_along_axis(entries[None, :, :], (addr & ~(1 << k))[..., None], axis=2)[..., 0]
        dx[..., k] = dy * (hi - lo) / 2.0
    return dentries, dx


# ---------------------------------------------------------------------------
# scalar interface

_LAYERS = {
    "warp": (warp_layer, warp_layer_back),
    "llnn": (llnn_layer, llnn_layer_back),
    "dlgn": (dlgn_layer, dlgn_layer_back),
    "dwn": (dwn_layer, dwn_layer_back),
}


def _scalar_eval(kind, params, x, mode, tau=None, want_grad=False, upstream=1.0, noise=None):
    fwd, back = _LAYERS[kind]
    x = np.asarray(x, dtype=np.float64).reshape(1, 1, -1)
    params = np.asarray(params, dtype=np.float64).reshape(1, -1)
    if noise is None and mode.stochastic:
        noise = mode.logistic((1, 1))
    elif noise is not None:
        noise = np.asarray(noise, dtype=np.float64).reshape(1, 1)
    if kind == "warp":
        y, cache = fwd(params, tau, x, mode.kind, noise)
    else:
        y, cache = fwd(params, x, mode.kind, noise)
    if not want_grad:
        return float(y[0, 0])
    dy = np.array([[float(upstream)]])
    dparams, dx = back(cache, dy)
    return float(y[0, 0]), dparams[0], dx[0, 0]


def warp_forward(neuron: WarpNeuron, x, mode: ForwardMode = SOFT) -> float:
    """Evaluate one warp neuron at a point of [0, 1]^n."""
    return _scalar_eval("warp", neuron.coeffs.values, x, mode, tau=neuron.tau)


def warp_grad(neuron: WarpNeuron, x, upstream: float = 1.0, noise: float | None = None):
    """Exact gradients of the soft forward: (d/dtheta, d/dx) scaled by upstream.

    Pass the logistic draw that perturbed the forward as `noise` to get the
    gradient at that perturbed pre-activation; the STE kinds register these
    same values.
    """
    mode = SOFT if noise is None else ForwardMode("gumbel-soft")
    _, dtheta, dx = _scalar_eval(
        "warp", neuron.coeffs.values, x, mode, tau=neuron.tau, want_grad=True,
        upstream=upstream, noise=noise,
    )
    return dtheta, dx


def llnn_forward(neuron: LlnnNeuron, x, mode: ForwardMode = SOFT) -> float:
    return _scalar_eval("llnn", neuron.raw_weights, x, mode)


def llnn_grad(neuron: LlnnNeuron, x, upstream: float = 1.0):
    _, draw, dx = _scalar_eval(
        "llnn", neuron.raw_weights, x, SOFT, want_grad=True, upstream=upstream
    )
    return draw, dx


def dlgn_forward(neuron: DlgnNeuron, x, mode: ForwardMode = SOFT) -> float:
    return _scalar_eval("dlgn", neuron.raw_weights, x, mode)


def dlgn_grad(neuron: DlgnNeuron, x, upstream: float = 1.0):
    _, draw, dx = _scalar_eval(
        "dlgn", neuron.raw_weights, x, SOFT, want_grad=True, upstream=upstream
    )
    return draw, dx


def dwn_forward(neuron: DwnNeuron, x, mode: ForwardMode = SOFT) -> float:
    return _scalar_eval("dwn", neuron.entries, x, mode)


def dwn_grad(neuron: DwnNeuron, x, upstream: float = 1.0):
    """Surrogate gradients; see dwn_layer_back for the definition."""
    _, dentries, dx = _scalar_eval(
        "dwn", neuron.entries, x, SOFT, want_grad=True, upstream=upstream
    )
    return dentries, dx


# ---------------------------------------------------------------------------
# initialization


def residual_init(n: int, p: float, tau: float = 1.0, designated_input: int = 1) -> WalshCoeffs:
    """Coefficients that pass one input through with per-corner probability p.

    Only the singleton coefficient of the designated input (1-based) is
    nonzero: tau * logit(1 - p). For p above one half the decoded table is
    exactly the designated input's pass-through, and at every corner the
    soft output agrees with it with probability p.
    """
    if not 0.5 < p < 1.0:
        raise ValueError("pass-through probability must lie in (0.5, 1)")
    if not 1 <= designated_input <= n:
        raise ValueError(f"designated input must be in [1, {n}]")
    if not tau > 0:
        raise ValueError("temperature must be positive")
    values = np.zeros(1 << n)
    values[1 << (designated_input - 1)] = tau * logit(1.0 - p)
    return WalshCoeffs(n, tuple(values.tolist()))


def dlgn_residual_c(n: int, p: float) -> float:
    """Raw-weight offset giving a gate mixture per-corner agreement p.

    Placing this value on a pass-through gate's raw weight (zeros elsewhere)
    makes the softmax mixture agree with that gate at every corner with
    probability exactly p.
    """
    half = float(2 ** ((1 << n) - 1))
    arg = half / (1.0 - p) - 2.0 * half + 1.0
    if not arg > 0:
        raise ValueError("agreement probability too low for this arity")
    return float(np.log(arg))


# ---------------------------------------------------------------------------
# conversions


def corner_probs_to_theta(q) -> np.ndarray:
    """Map per-corner output probabilities to parity-basis coefficients.

    Exact corners (q binary) give back the table's own analysis.
    """
    q = np.asarray(q, dtype=np.float64)
    return fwht(2.0 * q - 1.0) / q.shape[-1]


def convert_llnn_to_warp(neuron: LlnnNeuron, tau: float = 1.0) -> WarpNeuron:
    """Reparametrize an indicator mixture by its corner probabilities."""
    theta = corner_probs_to_theta(_sigmoid(neuron.raw_weights))
    return WarpNeuron(WalshCoeffs(neuron.n, tuple(theta.tolist())), tau)


def convert_dlgn_to_warp(neuron: DlgnNeuron, tau: float = 1.0) -> WarpNeuron:
    """Reparametrize a gate mixture by its corner probabilities."""
    alpha = _softmax(neuron.raw_weights)
    q = alpha @ GATE_TABLES
    theta = corner_probs_to_theta(q)
    return WarpNeuron(WalshCoeffs(2, tuple(theta.tolist())), tau)


# ---------------------------------------------------------------------------
# discretization


def discretize(neuron) -> LutTable:
    """Freeze a relaxed neuron to the lookup table its forward pass rounds to.

    warp thresholds synthesized corners at zero, llnn and dwn threshold
    their per-entry weights, dlgn takes the arg-max gate (first index wins
    ties).
    """
    if isinstance(neuron, WarpNeuron):
        from .hadamard import theta_to_lut

        return theta_to_lut(neuron.coeffs)
    if isinstance(neuron, LlnnNeuron):
        return LutTable(neuron.n, tuple(int(v > 0) for v in neuron.raw_weights))
    if isinstance(neuron, DlgnNeuron):
        gate = int(np.argmax(neuron.raw_weights))
        return LutTable(2, tuple(int(v) for v in GATE_TABLES[gate]))
    if isinstance(neuron, DwnNeuron):
        return LutTable(neuron.n, tuple(int(v > 0) for v in neuron.entries))
    raise TypeError(f"not a neuron: {type(neuron).__name__}")


def discretize_layer(kind: str, params: np.ndarray) -> np.ndarray:
    """Vectorized discretize for a whole layer; returns (C, 2^n) uint8 bits."""
    if kind == "warp":
        return (fwht(params) > 0.0).astype(np.uint8)
    if kind in ("llnn", "dwn"):
        return (params > 0.0).astype(np.uint8)
    if kind == "dlgn":
        gates = np.argmax(params, axis=-1)
        return GATE_TABLES[gates].astype(np.uint8)
    raise ValueError(f"unknown neuron kind {kind!r}")
