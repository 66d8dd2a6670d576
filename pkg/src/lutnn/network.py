"""Layered logic networks: build, relaxed forward/backward, training loop.

A network is a thermometer encoder followed by layers of fixed-arity
neurons with connections drawn once from the seed, ending in a GroupSum
readout: the final layer is split into `classes` contiguous equal groups
and each class score is the group sum divided by the GroupSum temperature.

Training minimizes softmax cross-entropy with an Adam-style optimizer.
All stochasticity is reproducible: batch order comes from one seeded
stream, and relaxation noise is drawn counter-style from a Philox
generator keyed by (seed, step, layer), so a fixed seed yields an
identical metrics stream run to run. Layer index 0 is the encoder.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .datasets import Dataset, split
from .encoder import (
    RHO_TABULAR,
    ThresholdPlan,
    _encode_soft_cached,
    encode_hard,
    encode_soft_back,
    fit_distributive,
    fit_uniform,
)
from .hadamard import MAX_ARITY
from .netlist import NO_DIGEST, Netlist, compile_network, config_digest
from .neurons import (
    MODE_KINDS,
    dlgn_layer,
    dlgn_layer_back,
    dlgn_residual_c,
    dwn_layer,
    dwn_layer_back,
    llnn_layer,
    llnn_layer_back,
    logistic_noise,
    logit,
    warp_layer,
    warp_layer_back,
)

NEURON_KINDS = ("warp", "llnn", "dlgn", "dwn")

# gate indices of the two pass-through gates in the 16-gate table
_DLGN_PASS_A = 3
_DLGN_PASS_B = 5

_EVAL_BATCH = 2048


class TrainingDiverged(RuntimeError):
    """Raised when the training loss stops being finite."""

    def __init__(self, step: int, loss: float):
        self.step = step
        self.loss = loss
        super().__init__(f"training diverged at step {step}: loss = {loss}")


# ---------------------------------------------------------------------------
# configuration


@dataclass
class LayerSpec:
    count: int
    arity: int
    kind: str = "warp"
    tau: float | None = None  # None: 2^(arity-2)

    def resolved_tau(self) -> float:
        return float(2.0 ** (self.arity - 2)) if self.tau is None else float(self.tau)


@dataclass
class EncoderSpec:
    kind: str = "distributive"  # uniform | distributive | learnable
    bits_per_feature: int = 3
    rho: float | None = None  # None: tabular default
    shared: bool = False


@dataclass
class OptimizerSpec:
    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 128
    # thresholds live in data units, not logit units; they get a gentler step
    encoder_lr_scale: float = 1.0


@dataclass
class NetworkConfig:
    layers: list[LayerSpec]
    classes: int
    seed: int = 0
    mode: str = "soft"
    groupsum_tau: float = 10.0
    residual_p: float = 0.95
    depth_factor: int = 1
    encoder: EncoderSpec = field(default_factory=EncoderSpec)
    optimizer: OptimizerSpec = field(default_factory=OptimizerSpec)


@dataclass
class Layer:
    kind: str
    arity: int
    tau: float
    indices: np.ndarray  # (count, arity) into previous outputs
    params: np.ndarray  # (count, 2^arity) or (count, 16) for dlgn

    @property
    def count(self) -> int:
        return self.indices.shape[0]


@dataclass
class Network:
    plan: ThresholdPlan
    layers: list[Layer]
    classes: int
    group_size: int
    groupsum_tau: float
    mode: str
    seed: int
    digest: str = NO_DIGEST
    optimizer: OptimizerSpec = field(default_factory=OptimizerSpec)
    # per-feature power-of-two divisors; the plan lives in divided space so
    # threshold gradients and rho are unit-scale regardless of feature range
    feature_scale: np.ndarray | None = None

    @property
    def input_width(self) -> int:
        return self.plan.output_width

    @property
    def is_dwn(self) -> bool:
        return self.layers[0].kind == "dwn"


def parameter_count(net: Network) -> int:
    """Total neuron-table parameters (encoder parameters excluded)."""
    return sum(l.params.size for l in net.layers)


# ---------------------------------------------------------------------------
# construction


def _draw_indices(rng, count: int, arity: int, prev_width: int, layer_no: int) -> np.ndarray:
    if arity > prev_width:
        raise ValueError(
            f"layer {layer_no}: arity {arity} exceeds input width {prev_width}"
        )
    ix = rng.integers(0, prev_width, size=(count, arity), dtype=np.int64)
    while arity > 1:
        srt = np.sort(ix, axis=1)
        bad = (srt[:, 1:] == srt[:, :-1]).any(axis=1)
        if not bad.any():
            break
        ix[bad] = rng.integers(0, prev_width, size=(int(bad.sum()), arity), dtype=np.int64)
    return ix


def _init_params(rng, spec: LayerSpec, residual_p: float) -> np.ndarray:
    count, n = spec.count, spec.arity
    if spec.kind == "warp":
        params = np.zeros((count, 1 << n))
        designated = rng.integers(1, n + 1, size=count)
        params[np.arange(count), 1 << (designated - 1)] = spec.resolved_tau() * logit(
            1.0 - residual_p
        )
        return params
    if spec.kind == "dlgn":
        params = np.zeros((count, 16))
        designated = rng.integers(1, n + 1, size=count)
        gate = np.where(designated == 1, _DLGN_PASS_A, _DLGN_PASS_B)
        params[np.arange(count), gate] = dlgn_residual_c(n, residual_p)
        return params
    # llnn / dwn: standard normal raw weights
    return rng.normal(size=(count, 1 << n))


def _fit_feature_scale(features: np.ndarray, shared: bool) -> np.ndarray | None:
    """Per-feature power-of-two divisors bringing the 10-90 spread near 1.

    Powers of two divide and multiply exactly in binary floating point, so
    working in divided space and exporting thresholds multiplied back gives
    bit-identical hard encodings to never scaling at all. Shared plans get
    one global divisor so thresholds stay shared in data units too.
    """
    spread = np.quantile(features, 0.99, axis=0) - np.quantile(features, 0.01, axis=0)
    if shared:
        live = spread[spread > 0]
        pooled = float(np.median(live)) if live.size else 1.0
        spread = np.full(features.shape[1], pooled)
    exponents = np.zeros(features.shape[1])
    ok = spread > 0
    exponents[ok] = np.round(np.log2(spread[ok]))
    # near-homogeneous data gains nothing from scaling; leave it untouched
    if exponents.max() - exponents.min() < 4 and np.abs(exponents).max() < 4:
        return None
    return np.exp2(exponents)


def _prep_features(net: Network, x: np.ndarray) -> np.ndarray:
    return x if net.feature_scale is None else x / net.feature_scale


def build_network(
    config: NetworkConfig, features: np.ndarray | None = None, *, plan: ThresholdPlan | None = None
) -> Network:
    """Construct a network: fit the encoder, wire connections, init params.

    features are the training inputs the fixed/initial thresholds are fit
    to; pass a ready plan instead to skip fitting (the plan is then taken
    to be in raw feature units). The same config and features produce a
    bit-identical network.
    """
    specs: list[LayerSpec] = []
    if config.depth_factor < 1:
        raise ValueError("depth factor must be >= 1")
    for spec in config.layers:
        specs.extend([spec] * config.depth_factor)
    if not specs:
        raise ValueError("network needs at least one layer")
    if config.classes < 1:
        raise ValueError("class count must be positive")
    if config.mode not in MODE_KINDS:
        raise ValueError(f"unknown forward mode {config.mode!r}")
    kinds = {spec.kind for spec in specs}
    unknown = kinds - set(NEURON_KINDS)
    if unknown:
        raise ValueError(f"unknown neuron kind(s) {sorted(unknown)}")
    if "dwn" in kinds and kinds != {"dwn"}:
        raise ValueError("dwn layers cannot be mixed with probability-valued layers")
    for li, spec in enumerate(specs, start=1):
        if spec.count < 1:
            raise ValueError(f"layer {li}: neuron count must be positive")
        if spec.kind == "dlgn" and spec.arity != 2:
            raise ValueError(f"layer {li}: dlgn neurons take exactly two inputs")
        if not 1 <= spec.arity <= MAX_ARITY:
            raise ValueError(f"layer {li}: arity {spec.arity} outside [1, {MAX_ARITY}]")
    if specs[-1].count % config.classes != 0:
        raise ValueError(
            f"final layer width {specs[-1].count} not divisible by {config.classes} classes"
        )

    feature_scale = None
    if plan is None:
        if features is None:
            raise ValueError("need training features (or an explicit plan) to fit the encoder")
        enc = config.encoder
        rho = RHO_TABULAR if enc.rho is None else enc.rho
        feature_scale = _fit_feature_scale(features, enc.shared)
        if feature_scale is not None:
            features = features / feature_scale
        if enc.kind == "uniform":
            plan = fit_uniform(features, enc.bits_per_feature, rho, shared=enc.shared)
        elif enc.kind == "distributive":
            plan = fit_distributive(features, enc.bits_per_feature, rho, shared=enc.shared)
        elif enc.kind == "learnable":
            plan = fit_distributive(
                features, enc.bits_per_feature, rho, shared=enc.shared, learnable=True
            )
        else:
            raise ValueError(f"unknown encoder kind {enc.kind!r}")

    rng = np.random.default_rng(np.random.PCG64([config.seed, 2]))
    layers = []
    prev = plan.output_width
    for li, spec in enumerate(specs, start=1):
        indices = _draw_indices(rng, spec.count, spec.arity, prev, li)
        params = _init_params(rng, spec, config.residual_p)
        layers.append(Layer(spec.kind, spec.arity, spec.resolved_tau(), indices, params))
        prev = spec.count

    return Network(
        plan=plan,
        layers=layers,
        classes=config.classes,
        group_size=specs[-1].count // config.classes,
        groupsum_tau=float(config.groupsum_tau),
        mode=config.mode,
        seed=config.seed,
        digest=config_digest(repr(config)),
        optimizer=config.optimizer,
        feature_scale=feature_scale,
    )


# ---------------------------------------------------------------------------
# forward / backward


_FWD = {"warp": warp_layer, "llnn": llnn_layer, "dlgn": dlgn_layer, "dwn": dwn_layer}
_BWD = {
    "warp": warp_layer_back,
    "llnn": llnn_layer_back,
    "dlgn": dlgn_layer_back,
    "dwn": dwn_layer_back,
}


def _run_layers(net: Network, bits: np.ndarray, kind: str, noises=None):
    """Forward through the neuron layers. bits (B, W0) -> (acts, caches)."""
    acts = bits
    caches = []
    for li, layer in enumerate(net.layers):
        x = acts[:, layer.indices]  # (B, count, arity)
        if li == 0 and layer.kind == "dwn":
            # encoder emits probabilities; recenter so bit 1 is positive
            x = 2.0 * x - 1.0
        noise = None if noises is None else noises[li]
        if layer.kind == "warp":
            acts, cache = warp_layer(layer.params, layer.tau, x, kind, noise)
        else:
            acts, cache = _FWD[layer.kind](layer.params, x, kind, noise)
        caches.append(cache)
    return acts, caches


def _scatter_dx(dx: np.ndarray, indices: np.ndarray, prev_width: int) -> np.ndarray:
    """Accumulate per-connection input gradients back onto the previous layer."""
    batch = dx.shape[0]
    flat = (np.arange(batch)[:, None, None] * prev_width + indices[None, :, :]).ravel()
    out = np.bincount(flat, weights=dx.ravel(), minlength=batch * prev_width)
    return out.reshape(batch, prev_width)


def _run_layers_back(net: Network, caches, widths, dy_last):
    """Backward through the neuron layers; returns (dparams per layer, dbits)."""
    dparams: list[np.ndarray] = [None] * len(net.layers)  # type: ignore[list-item]
    dy = dy_last
    for li in reversed(range(len(net.layers))):
        layer = net.layers[li]
        dp, dx = _BWD[layer.kind](caches[li], dy)
        dparams[li] = dp
        if li == 0 and layer.kind == "dwn":
            dx = 2.0 * dx
        dy = _scatter_dx(dx, layer.indices, widths[li])
    return dparams, dy


def _group_sums(net: Network, acts: np.ndarray) -> np.ndarray:
    return acts.reshape(acts.shape[0], net.classes, net.group_size).sum(axis=2)


def forward_relaxed(net: Network, bits: np.ndarray, kind: str | None = None) -> np.ndarray:
    """Noiseless relaxed forward on encoded inputs -> (B, classes) scores.

    Scores are GroupSum outputs: group sums divided by the GroupSum
    temperature. kind defaults to the network's own mode.
    """
    bits = np.asarray(bits, dtype=np.float64)
    if bits.ndim != 2 or bits.shape[1] != net.input_width:
        raise ValueError(f"encoded batch must be (B, {net.input_width})")
    acts, _ = _run_layers(net, bits, kind or net.mode)
    return _group_sums(net, acts) / net.groupsum_tau


def _encode_eval(net: Network, x: np.ndarray, kind: str) -> np.ndarray:
    # Fixed thermometers binarize hard everywhere (training and inference
    # see identical bits); the soft relaxation exists for learnable plans,
    # whose thresholds need a gradient. STE kinds hard-encode regardless.
    x = _prep_features(net, x)
    if kind in ("soft-ste", "gumbel-ste") or not net.plan.learnable:
        return encode_hard(net.plan, x)
    bits, _ = _encode_soft_cached(net.plan, x)
    return bits


def predict_relaxed(net: Network, x: np.ndarray, kind: str | None = None) -> np.ndarray:
    """Noiseless own-mode predictions from raw features, in eval batches.

    Argmax ties resolve to the lowest class index, matching the discrete
    engine. STE kinds hard-encode the inputs and emit discretized table
    bits, so their predictions coincide with the compiled netlist.
    """
    kind = kind or net.mode
    x = np.asarray(x, dtype=np.float64)
    preds = np.empty(x.shape[0], dtype=np.int64)
    for lo in range(0, x.shape[0], _EVAL_BATCH):
        part = x[lo : lo + _EVAL_BATCH]
        acts, _ = _run_layers(net, _encode_eval(net, part, kind), kind)
        preds[lo : lo + _EVAL_BATCH] = np.argmax(_group_sums(net, acts), axis=1)
    return preds


def predict_discretized(net: Network, x: np.ndarray) -> np.ndarray:
    """Predictions of the per-neuron-discretized network on hard inputs."""
    return predict_relaxed(net, x, kind="soft-ste")


def accuracy_relaxed(net: Network, ds: Dataset, kind: str | None = None) -> float:
    return float(np.mean(predict_relaxed(net, ds.features, kind) == ds.labels))


def accuracy_discrete(net: Network, ds: Dataset, netlist: Netlist | None = None) -> float:
    from .netlist import predict as netlist_predict

    nl = compile_network(net) if netlist is None else netlist
    return float(np.mean(netlist_predict(nl, ds.features) == ds.labels))


def discretization_gap(net: Network, val: Dataset) -> float:
    """Relaxed validation accuracy minus discrete (netlist) accuracy."""
    return accuracy_relaxed(net, val) - accuracy_discrete(net, val)


# ---------------------------------------------------------------------------
# optimizer


class _Adam:
    """Adam with per-slot learning-rate scales, updating arrays in place."""

    def __init__(self, params: list[np.ndarray], scales: list[float], spec: OptimizerSpec):
        self.params = params
        self.scales = scales
        self.spec = spec
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads: list) -> None:
        self.t += 1
        s = self.spec
        bc1 = 1.0 - s.beta1**self.t
        bc2 = 1.0 - s.beta2**self.t
        for p, g, m, v, scale in zip(self.params, grads, self.m, self.v, self.scales):
            if g is None:
                continue
            m *= s.beta1
            m += (1.0 - s.beta1) * g
            v *= s.beta2
            v += (1.0 - s.beta2) * np.square(g)
            p -= (s.lr * scale) * (m / bc1) / (np.sqrt(v / bc2) + s.eps)


# ---------------------------------------------------------------------------
# training


@dataclass
class TrainMetrics:
    step: int
    loss: float
    acc_relaxed: float
    acc_discrete: float
    wallclock_ms: int

    @property
    def gap(self) -> float:
        return self.acc_relaxed - self.acc_discrete

    def as_dict(self) -> dict:
        return {
            "step": self.step,
            "loss": self.loss,
            "acc_relaxed": self.acc_relaxed,
            "acc_discrete": self.acc_discrete,
            "gap": self.gap,
            "wallclock_ms": self.wallclock_ms,
        }


def _noise_stream(seed: int, step: int, layer: int) -> np.random.Generator:
    # counter-style: an independent Philox keyed by (seed, step, layer)
    return np.random.Generator(np.random.Philox(key=[seed, (step << 8) | layer]))


def _train_noises(net: Network, batch: int, step: int):
    """Logistic draws for every noise-consuming layer, or None in plain modes."""
    if net.mode not in ("gumbel-soft", "gumbel-ste"):
        return None, None
    plan = net.plan
    enc_noise = None
    if plan.learnable:
        enc_noise = logistic_noise(
            _noise_stream(net.seed, step, 0), (batch, plan.feature_count, plan.bits_per_feature)
        )
    layer_noises = []
    for li, layer in enumerate(net.layers, start=1):
        if layer.kind == "dwn":
            layer_noises.append(None)
        else:
            layer_noises.append(
                logistic_noise(_noise_stream(net.seed, step, li), (batch, layer.count))
            )
    return enc_noise, layer_noises


def _encode_train(net: Network, xb: np.ndarray, enc_noise):
    """Encoder forward in the training mode; returns (bits, soft cache).

    Fixed plans feed hard bits (no gradient, no cache). Learnable plans go
    through the soft relaxation; the STE kinds emit hard bits but keep the
    soft cache so threshold gradients pass straight through.
    """
    xb = _prep_features(net, xb)
    if not net.plan.learnable:
        return encode_hard(net.plan, xb), None
    kind = net.mode
    if kind == "soft":
        return _encode_soft_cached(net.plan, xb)
    if kind == "gumbel-soft":
        return _encode_soft_cached(net.plan, xb, enc_noise)
    if kind == "gumbel-ste":
        f, cache = _encode_soft_cached(net.plan, xb, enc_noise)
        return (f > 0.5).astype(np.float64), cache
    # soft-ste: hard forward, straight-through soft gradients
    _, cache = _encode_soft_cached(net.plan, xb)
    return encode_hard(net.plan, xb), cache


def _ce_loss(scores: np.ndarray, labels: np.ndarray):
    z = scores - scores.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    batch = scores.shape[0]
    loss = float(-logp[np.arange(batch), labels].mean())
    dscores = np.exp(logp)
    dscores[np.arange(batch), labels] -= 1.0
    return loss, dscores / batch


def train(
    net: Network,
    dataset: Dataset,
    epochs: int,
    *,
    val_fraction: float = 0.2,
    eval_every: int | None = None,
    on_metrics=None,
    target_discrete_acc: float | None = None,
    max_steps: int | None = None,
) -> list[TrainMetrics]:
    """Train in place; returns the ordered TrainMetrics stream.

    The dataset is split train/validation here (deterministically from the
    network seed). Evaluation runs every eval_every steps (default: once
    per epoch), plus once before training and once at the end. Training
    stops early when target_discrete_acc is reached at an evaluation.
    Non-finite loss raises TrainingDiverged.
    """
    spec_opt = net.optimizer
    train_ds, val_ds = split(dataset, val_fraction, seed=net.seed)
    n_train = len(train_ds)
    batch_size = min(spec_opt.batch_size, n_train)

    params = [layer.params for layer in net.layers]
    scales = [1.0] * len(net.layers)
    learnable_plan = net.plan.learnable
    if learnable_plan:
        params += [net.plan.base, net.plan.deltas]
        scales += [spec_opt.encoder_lr_scale / net.plan.bits_per_feature] * 2
    opt = _Adam(params, scales, spec_opt)

    batch_rng = np.random.default_rng(np.random.PCG64([net.seed, 1]))
    widths = [net.input_width] + [l.count for l in net.layers[:-1]]
    started = time.perf_counter()
    metrics: list[TrainMetrics] = []
    loss_window: list[float] = []

    def record(step: int, loss: float) -> TrainMetrics:
        m = TrainMetrics(
            step=step,
            loss=loss,
            acc_relaxed=accuracy_relaxed(net, val_ds),
            acc_discrete=accuracy_discrete(net, val_ds),
            wallclock_ms=int((time.perf_counter() - started) * 1000),
        )
        metrics.append(m)
        if on_metrics is not None:
            on_metrics(m)
        return m

    # step-0 record: initial loss on the first batch, no update
    first = train_ds.features[:batch_size]
    first_labels = train_ds.labels[:batch_size]
    bits0 = _encode_eval(net, first, net.mode)
    acts0, _ = _run_layers(net, bits0, net.mode)
    loss0, _ = _ce_loss(_group_sums(net, acts0) / net.groupsum_tau, first_labels)
    m = record(0, loss0)
    if target_discrete_acc is not None and m.acc_discrete >= target_discrete_acc:
        return metrics

    step = 0
    stop = False
    for _epoch in range(epochs):
        perm = batch_rng.permutation(n_train)
        for lo in range(0, n_train, batch_size):
            take = perm[lo : lo + batch_size]
            xb = train_ds.features[take]
            yb = train_ds.labels[take]
            step += 1

            enc_noise, layer_noises = _train_noises(net, len(take), step)
            bits, enc_cache = _encode_train(net, xb, enc_noise)
            acts, caches = _run_layers(net, bits, net.mode, layer_noises)
            loss, dscores = _ce_loss(_group_sums(net, acts) / net.groupsum_tau, yb)
            if not np.isfinite(loss):
                raise TrainingDiverged(step, loss)
            loss_window.append(loss)

            dy_last = np.repeat(dscores, net.group_size, axis=1) / net.groupsum_tau
            dparams, dbits = _run_layers_back(net, caches, widths, dy_last)
            grads: list = list(dparams)
            if learnable_plan:
                dbase, ddeltas = encode_soft_back(net.plan, enc_cache, dbits)
                grads += [dbase, ddeltas]
            opt.step(grads)

            due = (eval_every is not None and step % eval_every == 0) or (
                max_steps is not None and step >= max_steps
            )
            if eval_every is None and lo + batch_size >= n_train:
                due = True  # per-epoch cadence
            if due:
                m = record(step, float(np.mean(loss_window)))
                loss_window.clear()
                if target_discrete_acc is not None and m.acc_discrete >= target_discrete_acc:
                    stop = True
            if max_steps is not None and step >= max_steps:
                stop = True
            if stop:
                break
        if stop:
            break

    if not metrics or metrics[-1].step != step:
        record(step, float(np.mean(loss_window)) if loss_window else metrics[-1].loss)
    return metrics
