"""Frozen discrete networks: LUT netlists, bit-parallel evaluation, text IO.

A netlist is the hardware-shaped artifact a trained network freezes into:
a realized threshold encoder, topologically ordered layers of LUT nodes
wired to the previous layer, and a GroupSum readout that counts set bits
per class group. Evaluation is exact Boolean algebra over 64-sample
machine words; no floats are involved past the input thresholds.

Text format (version 1), line oriented:

    lutnn-netlist v1
    seed <int>
    digest <12 hex chars or ->
    groups <classes> <group_size> <tau>
    widths <encoder_bits> <layer1> ... <layerL>
    encoder <bits_per_feature> <features>
    <bits_per_feature rows of <features> decimal thresholds>
    layer <k> <count> <arity>
    L<k> <arity> <idx...> <hex lut>     (count node lines)
    ...
    end

LUT hex is lowercase, least significant bit = address 0, fixed width
ceil(2^arity / 4) digits; a 2-input XOR node is `6` (bits 0110). Node
input indices point into the previous layer's output vector (the encoder
bit vector for layer 1).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

FORMAT_VERSION = 1
_MAGIC = "lutnn-netlist"
NO_DIGEST = "-"


class NetlistParseError(ValueError):
    """Malformed netlist text; carries the 1-based offending line number."""

    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        self.message = message
        super().__init__(f"line {line_no}: {message}")


@dataclass
class Netlist:
    """Immutable discrete network. Layers are (indices, luts) pairs.

    indices: (count, arity) int64 into the previous layer's outputs.
    luts: (count, 2**arity) uint8 truth tables, entry a = output at address a
    where address bit k comes from input k.
    """

    seed: int
    classes: int
    group_size: int
    groupsum_tau: float
    thresholds: np.ndarray  # (bits_per_feature, features) float64, rows sorted
    layers: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)
    digest: str = NO_DIGEST

    def __post_init__(self):
        self.thresholds = np.ascontiguousarray(self.thresholds, dtype=np.float64)
        if self.thresholds.ndim != 2:
            raise ValueError("thresholds must be (bits_per_feature, features)")
        if not self.layers:
            raise ValueError("netlist needs at least one layer")
        prev = self.input_width
        norm = []
        for li, (indices, luts) in enumerate(self.layers, start=1):
            indices = np.ascontiguousarray(indices, dtype=np.int64)
            luts = np.ascontiguousarray(luts, dtype=np.uint8)
            if indices.ndim != 2 or luts.ndim != 2:
                raise ValueError(f"layer {li}: indices and luts must be 2-D")
            count, arity = indices.shape
            if luts.shape != (count, 1 << arity):
                raise ValueError(
                    f"layer {li}: luts shape {luts.shape} does not match {count} nodes of arity {arity}"
                )
            if count == 0:
                raise ValueError(f"layer {li}: empty layer")
            if indices.min() < 0 or indices.max() >= prev:
                raise ValueError(
                    f"layer {li}: wire index out of range [0, {prev})"
                )
            if luts.min() < 0 or luts.max() > 1:
                raise ValueError(f"layer {li}: LUT entries must be 0/1")
            norm.append((indices, luts))
            prev = count
        self.layers = norm
        if prev != self.classes * self.group_size:
            raise ValueError(
                f"final width {prev} != classes*group_size = {self.classes * self.group_size}"
            )

    @property
    def input_width(self) -> int:
        return self.thresholds.shape[0] * self.thresholds.shape[1]

    @property
    def widths(self) -> list[int]:
        return [self.input_width] + [ix.shape[0] for ix, _ in self.layers]


def config_digest(text: str) -> str:
    """Stable 12-hex-character fingerprint for run provenance."""
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def compile_network(net) -> Netlist:
    """Freeze a trained network: realize thresholds, discretize every neuron.

    Connections are copied verbatim; the result is immutable and fully
    self-contained (raw features in, class out).
    """
    from .encoder import realize_thresholds
    from .neurons import discretize_layer

    layers = [
        (layer.indices.copy(), discretize_layer(layer.kind, layer.params))
        for layer in net.layers
    ]
    thresholds = realize_thresholds(net.plan)
    scale = getattr(net, "feature_scale", None)
    if scale is not None:
        # plan space is features divided by exact powers of two, so this
        # multiply restores data units without changing any hard bit
        thresholds = thresholds * scale
    return Netlist(
        seed=net.seed,
        classes=net.classes,
        group_size=net.group_size,
        groupsum_tau=net.groupsum_tau,
        thresholds=thresholds,
        layers=layers,
        digest=net.digest,
    )


def encode_inputs(netlist: Netlist, features: np.ndarray) -> np.ndarray:
    """Hard-threshold raw features into the netlist's input bit vector.

    Bit j*l + i is [ thresholds[i, j] <= x[j] ]; ties encode to 1.
    Returns (N, input_width) uint8.
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    t = netlist.thresholds
    if x.shape[1] != t.shape[1]:
        raise ValueError(f"expected {t.shape[1]} features, got {x.shape[1]}")
    bits = (t.T[None, :, :] <= x[:, :, None]).astype(np.uint8)
    return bits.reshape(x.shape[0], netlist.input_width)


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a (N, width) 0/1 array into (width, ceil(N/64)) uint64 words.

    Sample s occupies bit s%64 of word s//64; trailing lanes are zero.
    """
    bits = np.ascontiguousarray(np.asarray(bits) != 0, dtype=np.uint8)
    if bits.ndim != 2:
        raise ValueError("bits must be (samples, width)")
    n, width = bits.shape
    words = -(-n // 64)
    byte_rows = np.packbits(bits.T, axis=1, bitorder="little")  # (width, ceil(n/8))
    padded = np.zeros((width, words * 8), dtype=np.uint8)
    padded[:, : byte_rows.shape[1]] = byte_rows
    return padded.view("<u8")


def unpack_bits(words: np.ndarray, samples: int) -> np.ndarray:
    """Inverse of pack_bits: (width, words) uint64 -> (samples, width) uint8."""
    words = np.ascontiguousarray(words, dtype="<u8")
    bits = np.unpackbits(words.view(np.uint8), axis=1, bitorder="little")
    return bits[:, :samples].T.copy()


def _layer_bitpacked(indices: np.ndarray, luts: np.ndarray, wires: np.ndarray) -> np.ndarray:
    """One layer of word-parallel LUT evaluation.

    wires: (prev_width, words) uint64. Per node, OR over addresses whose LUT
    bit is set of the AND of input literals/complements chosen by the
    address bits.
    """
    count, arity = indices.shape
    ins = wires[indices]  # (count, arity, words)
    out = np.zeros((count, wires.shape[1]), dtype=np.uint64)
    full = np.uint64(0xFFFFFFFFFFFFFFFF)
    for a in range(1 << arity):
        active = luts[:, a].astype(bool)
        if not active.any():
            continue
        term = np.full((count, wires.shape[1]), full, dtype=np.uint64)
        for k in range(arity):
            w = ins[:, k, :]
            term &= w if (a >> k) & 1 else ~w
        out[active] |= term[active]
    return out


def eval_bitpacked(netlist: Netlist, packed: np.ndarray, samples: int) -> np.ndarray:
    """Run the netlist on a packed batch; returns (samples,) predicted classes.

    packed: (input_width, words) uint64 from pack_bits. Class scores are
    per-group popcounts; ties go to the lowest class index.
    """
    packed = np.asarray(packed, dtype=np.uint64)
    if packed.ndim != 2 or packed.shape[0] != netlist.input_width:
        raise ValueError(
            f"packed batch has width {packed.shape[0] if packed.ndim == 2 else '?'}, "
            f"netlist expects {netlist.input_width}"
        )
    if samples > packed.shape[1] * 64:
        raise ValueError("more samples than packed lanes")
    wires = packed
    for indices, luts in netlist.layers:
        wires = _layer_bitpacked(indices, luts, wires)
    final = unpack_bits(wires, samples)  # (samples, final_width)
    scores = final.reshape(samples, netlist.classes, netlist.group_size).sum(axis=2)
    return np.argmax(scores, axis=1).astype(np.int64)


def eval_reference(netlist: Netlist, bits: np.ndarray) -> np.ndarray:
    """Naive one-sample-at-a-time interpreter; oracle for eval_bitpacked."""
    bits = np.asarray(bits)
    if bits.ndim == 1:
        bits = bits[None, :]
    if bits.shape[1] != netlist.input_width:
        raise ValueError(f"expected {netlist.input_width} bits, got {bits.shape[1]}")
    preds = np.empty(bits.shape[0], dtype=np.int64)
    for s in range(bits.shape[0]):
        cur = [int(b) for b in bits[s]]
        for indices, luts in netlist.layers:
            nxt = []
            for node in range(indices.shape[0]):
                addr = 0
                for k, wire in enumerate(indices[node]):
                    addr |= cur[wire] << k
                nxt.append(int(luts[node, addr]))
            cur = nxt
        best_class, best_score = 0, -1
        for c in range(netlist.classes):
            score = sum(cur[c * netlist.group_size : (c + 1) * netlist.group_size])
            if score > best_score:
                best_class, best_score = c, score
        preds[s] = best_class
    return preds


def predict(netlist: Netlist, features: np.ndarray) -> np.ndarray:
    """Convenience: hard-encode raw features, pack, and evaluate."""
    bits = encode_inputs(netlist, features)
    return eval_bitpacked(netlist, pack_bits(bits), bits.shape[0])


def _lut_hex(row: np.ndarray) -> str:
    value = 0
    for a, bit in enumerate(row):
        value |= int(bit) << a
    digits = max(1, len(row) // 4)
    return f"{value:0{digits}x}"


def _hex_lut(text: str, arity: int, line_no: int) -> np.ndarray:
    size = 1 << arity
    digits = max(1, size // 4)
    if len(text) != digits:
        raise NetlistParseError(
            line_no, f"LUT hex must be {digits} digit(s) for arity {arity}, got {text!r}"
        )
    try:
        value = int(text, 16)
    except ValueError:
        raise NetlistParseError(line_no, f"invalid LUT hex {text!r}") from None
    if text != f"{value:0{digits}x}":
        raise NetlistParseError(line_no, f"LUT hex must be lowercase, got {text!r}")
    return np.array([(value >> a) & 1 for a in range(size)], dtype=np.uint8)


def export_netlist(netlist: Netlist, sink) -> None:
    """Write the versioned text form. sink: path or writable text file."""
    if hasattr(sink, "write"):
        sink.write(dumps(netlist))
    else:
        with open(sink, "w") as f:
            f.write(dumps(netlist))


def dumps(netlist: Netlist) -> str:
    t = netlist.thresholds
    lines = [
        f"{_MAGIC} v{FORMAT_VERSION}",
        f"seed {netlist.seed}",
        f"digest {netlist.digest}",
        f"groups {netlist.classes} {netlist.group_size} {netlist.groupsum_tau!r}",
        "widths " + " ".join(str(w) for w in netlist.widths),
        f"encoder {t.shape[0]} {t.shape[1]}",
    ]
    for row in t:
        lines.append(" ".join(repr(float(v)) for v in row))
    for li, (indices, luts) in enumerate(netlist.layers, start=1):
        count, arity = indices.shape
        lines.append(f"layer {li} {count} {arity}")
        for node in range(count):
            ix = " ".join(str(int(i)) for i in indices[node])
            lines.append(f"L{li} {arity} {ix} {_lut_hex(luts[node])}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def import_netlist(source) -> Netlist:
    """Parse the text form; raises NetlistParseError with line numbers."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source) as f:
            text = f.read()
    return loads(text)


class _Lines:
    def __init__(self, text: str):
        self.lines = text.split("\n")
        self.pos = 0

    def next(self, expect: str) -> tuple[int, list[str]]:
        while self.pos < len(self.lines):
            self.pos += 1
            raw = self.lines[self.pos - 1]
            if raw.strip():
                return self.pos, raw.split()
        raise NetlistParseError(len(self.lines), f"file ends before {expect}")


def _int_field(tokens: list[str], i: int, line_no: int, what: str) -> int:
    try:
        return int(tokens[i])
    except (ValueError, IndexError):
        raise NetlistParseError(line_no, f"expected integer {what}") from None


def loads(text: str) -> Netlist:
    src = _Lines(text)

    no, tok = src.next("header")
    if tok[0] != _MAGIC:
        raise NetlistParseError(no, f"not a netlist file (magic {tok[0]!r})")
    if len(tok) != 2 or tok[1] != f"v{FORMAT_VERSION}":
        raise NetlistParseError(
            no, f"unsupported version {tok[1] if len(tok) > 1 else '?'}, expected v{FORMAT_VERSION}"
        )

    no, tok = src.next("seed")
    if tok[0] != "seed" or len(tok) != 2:
        raise NetlistParseError(no, "expected `seed <int>`")
    seed = _int_field(tok, 1, no, "seed")

    no, tok = src.next("digest")
    if tok[0] != "digest" or len(tok) != 2:
        raise NetlistParseError(no, "expected `digest <hex|->`")
    digest = tok[1]

    no, tok = src.next("groups")
    if tok[0] != "groups" or len(tok) != 4:
        raise NetlistParseError(no, "expected `groups <classes> <group_size> <tau>`")
    classes = _int_field(tok, 1, no, "class count")
    group_size = _int_field(tok, 2, no, "group size")
    try:
        tau = float(tok[3])
    except ValueError:
        raise NetlistParseError(no, f"invalid GroupSum tau {tok[3]!r}") from None

    no, tok = src.next("widths")
    if tok[0] != "widths" or len(tok) < 3:
        raise NetlistParseError(no, "expected `widths <encoder> <layer...>`")
    widths = [_int_field(tok, i, no, "width") for i in range(1, len(tok))]

    no, tok = src.next("encoder")
    if tok[0] != "encoder" or len(tok) != 3:
        raise NetlistParseError(no, "expected `encoder <bits_per_feature> <features>`")
    l = _int_field(tok, 1, no, "bits per feature")
    d = _int_field(tok, 2, no, "feature count")
    if l * d != widths[0]:
        raise NetlistParseError(
            no, f"encoder {l}x{d} produces {l * d} bits but widths declares {widths[0]}"
        )
    rows = []
    for _ in range(l):
        no, tok = src.next("threshold row")
        if len(tok) != d:
            raise NetlistParseError(no, f"threshold row needs {d} values, got {len(tok)}")
        try:
            rows.append([float(v) for v in tok])
        except ValueError:
            bad = next(v for v in tok if not _is_float(v))
            raise NetlistParseError(no, f"invalid threshold {bad!r}") from None
    thresholds = np.array(rows, dtype=np.float64).reshape(l, d)

    layers = []
    for li in range(1, len(widths)):
        no, tok = src.next(f"layer {li} header")
        if tok[0] != "layer":
            raise NetlistParseError(no, f"expected `layer {li} ...`, got {tok[0]!r}")
        if len(tok) != 4:
            raise NetlistParseError(no, "expected `layer <k> <count> <arity>`")
        k = _int_field(tok, 1, no, "layer number")
        if k != li:
            raise NetlistParseError(no, f"layer {k} out of order, expected {li}")
        count = _int_field(tok, 2, no, "node count")
        arity = _int_field(tok, 3, no, "arity")
        if count != widths[li]:
            raise NetlistParseError(
                no, f"layer {li} declares {count} nodes but widths says {widths[li]}"
            )
        if not 1 <= arity <= 16:
            raise NetlistParseError(no, f"arity {arity} out of range [1, 16]")
        tag = f"L{li}"
        indices = np.empty((count, arity), dtype=np.int64)
        luts = np.empty((count, 1 << arity), dtype=np.uint8)
        prev_width = widths[li - 1]
        for node in range(count):
            no, tok = src.next(f"layer {li} node {node}")
            if tok[0] != tag:
                raise NetlistParseError(no, f"expected node tag {tag}, got {tok[0]!r}")
            if len(tok) != 3 + arity:
                raise NetlistParseError(
                    no, f"node line needs {3 + arity} fields for arity {arity}, got {len(tok)}"
                )
            n_here = _int_field(tok, 1, no, "node arity")
            if n_here != arity:
                raise NetlistParseError(
                    no, f"node arity {n_here} disagrees with layer arity {arity}"
                )
            for k2 in range(arity):
                w = _int_field(tok, 2 + k2, no, "wire index")
                if not 0 <= w < prev_width:
                    raise NetlistParseError(
                        no, f"dangling wire index {w}, previous layer has {prev_width} outputs"
                    )
                indices[node, k2] = w
            luts[node] = _hex_lut(tok[2 + arity], arity, no)
        layers.append((indices, luts))

    no, tok = src.next("end marker")
    if tok[0] != "end":
        raise NetlistParseError(no, f"expected `end`, got {tok[0]!r}")
    while src.pos < len(src.lines):
        src.pos += 1
        if src.lines[src.pos - 1].strip():
            raise NetlistParseError(src.pos, "trailing content after end marker")

    if classes * group_size != widths[-1]:
        raise NetlistParseError(
            no, f"groups {classes}x{group_size} do not cover final width {widths[-1]}"
        )
    return Netlist(
        seed=seed,
        classes=classes,
        group_size=group_size,
        groupsum_tau=tau,
        thresholds=thresholds,
        layers=layers,
        digest=digest,
    )


def _is_float(v: str) -> bool:
    try:
        float(v)
        return True
    except ValueError:
        return False
