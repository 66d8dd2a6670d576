"""Command-line entry points: train, eval, inspect.

`lutnn train` drives a full run from a JSON config plus override flags
(flags > config file > defaults) and writes three artifacts to --out:
metrics.jsonl (one meta line, then one JSON object per evaluation),
checkpoint.npz (parameters, connections, threshold plan), and
model.netlist (the compiled discrete network). `lutnn eval` scores a
netlist on a dataset split and prints a JSON report. `lutnn inspect`
prints a human-readable structural summary of a netlist.

Exit codes: 0 success, 2 configuration/data errors, 3 training divergence.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import datasets
from .encoder import RHO_IMAGE, RHO_TABULAR, ThresholdPlan
from .netlist import (
    Netlist,
    NetlistParseError,
    compile_network,
    encode_inputs,
    eval_bitpacked,
    export_netlist,
    import_netlist,
    pack_bits,
)
from .network import (
    EncoderSpec,
    LayerSpec,
    Network,
    NetworkConfig,
    OptimizerSpec,
    TrainingDiverged,
    build_network,
    parameter_count,
    train,
)
from .neurons import GATE_NAME_BY_INT

_DEFAULTS = {
    "dataset": {
        "kind": "synth",
        "data_dir": "data/mnist",
        "csv": None,
        "label_column": "label",
        "synth_seed": 0,
        "samples": 20000,
        "features": 6,
        "classes": 2,
    },
    "model": {
        "widths": [64, 32],
        "arity": 2,
        "kind": "warp",
        "tau": None,
        "classes": None,  # None: from the dataset
        "groupsum_tau": 10.0,
        "depth_factor": 1,
        "residual_p": 0.95,
    },
    "encoder": {"kind": "distributive", "bits_per_feature": 3, "rho": None, "shared": False},
    "optimizer": {
        "lr": 0.01,
        "beta1": 0.9,
        "beta2": 0.999,
        "eps": 1e-8,
        "batch_size": 128,
        "encoder_lr_scale": 1.0,
    },
    "train": {
        "epochs": 3,
        "seed": 0,
        "mode": "soft",
        "val_fraction": 0.2,
        "eval_every": None,
        "target_discrete_acc": None,
    },
}

_IMAGE_KINDS = ("mnist", "fashion")


class CliError(Exception):
    """User-facing configuration or data problem; maps to exit code 2."""


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = dict(base)
    for key, value in override.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise CliError(f"unknown config key {where!r}")
        if isinstance(base[key], dict) and isinstance(value, dict):
            out[key] = _merge(base[key], value, where)
        else:
            out[key] = value
    return out


def _load_config(path: str | None) -> dict:
    if path is None:
        return json.loads(json.dumps(_DEFAULTS))
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise CliError(f"{path}: {e.strerror or e}") from None
    try:
        user = json.loads(text)
    except json.JSONDecodeError as e:
        raise CliError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from None
    if not isinstance(user, dict):
        raise CliError(f"{path}: config must be a JSON object")
    return _merge(_DEFAULTS, user)


def _apply_flags(cfg: dict, args: argparse.Namespace) -> dict:
    flag_map = [
        ("seed", ("train", "seed")),
        ("mode", ("train", "mode")),
        ("epochs", ("train", "epochs")),
        ("arity", ("model", "arity")),
        ("depth_factor", ("model", "depth_factor")),
        ("dataset", ("dataset", "kind")),
        ("data_dir", ("dataset", "data_dir")),
        ("csv", ("dataset", "csv")),
        ("label_column", ("dataset", "label_column")),
        ("encoder", ("encoder", "kind")),
        ("bits_per_feature", ("encoder", "bits_per_feature")),
    ]
    for attr, (section, key) in flag_map:
        value = getattr(args, attr, None)
        if value is not None:
            cfg[section][key] = value
    return cfg


def _load_dataset(dcfg: dict, *, split: str = "train") -> datasets.Dataset:
    kind = dcfg["kind"]
    if kind in _IMAGE_KINDS:
        root = Path(dcfg["data_dir"])
        if kind == "fashion" and root == Path(_DEFAULTS["dataset"]["data_dir"]):
            root = Path("data/fashion")
        prefix = "t10k" if split == "test" else "train"
        images = root / f"{prefix}-images-idx3-ubyte.gz"
        labels = root / f"{prefix}-labels-idx1-ubyte.gz"
        for p in (images, labels):
            if not p.exists():
                raise CliError(f"{kind} archive not found: {p} (set dataset.data_dir)")
        try:
            return datasets.load_idx(images, labels, name=f"{kind}/{prefix}")
        except ValueError as e:
            raise CliError(str(e)) from None
    if split == "test":
        raise CliError(f"dataset kind {kind!r} has no separate test archive; use --split all")
    if kind == "csv":
        if not dcfg["csv"]:
            raise CliError("csv dataset needs --csv PATH (or dataset.csv in the config)")
        try:
            return datasets.load_csv(dcfg["csv"], dcfg["label_column"])
        except (OSError, ValueError) as e:
            raise CliError(str(e)) from None
    if kind == "synth":
        return datasets.synth_heterogeneous(
            dcfg["synth_seed"], dcfg["samples"], dcfg["features"], dcfg["classes"]
        )
    raise CliError(f"unknown dataset kind {kind!r}")


def _network_config(cfg: dict, data: datasets.Dataset) -> NetworkConfig:
    m = cfg["model"]
    e = cfg["encoder"]
    o = cfg["optimizer"]
    t = cfg["train"]
    classes = m["classes"] if m["classes"] is not None else data.classes
    rho = e["rho"]
    if rho is None:
        rho = RHO_IMAGE if cfg["dataset"]["kind"] in _IMAGE_KINDS else RHO_TABULAR
    shared = e["shared"] or cfg["dataset"]["kind"] in _IMAGE_KINDS and e["kind"] == "learnable"
    layers = [
        LayerSpec(int(w), int(m["arity"]), m["kind"], m["tau"]) for w in m["widths"]
    ]
    return NetworkConfig(
        layers=layers,
        classes=int(classes),
        seed=int(t["seed"]),
        mode=t["mode"],
        groupsum_tau=float(m["groupsum_tau"]),
        residual_p=float(m["residual_p"]),
        depth_factor=int(m["depth_factor"]),
        encoder=EncoderSpec(e["kind"], int(e["bits_per_feature"]), rho, shared),
        optimizer=OptimizerSpec(
            float(o["lr"]),
            float(o["beta1"]),
            float(o["beta2"]),
            float(o["eps"]),
            int(o["batch_size"]),
            float(o["encoder_lr_scale"]),
        ),
    )


# ---------------------------------------------------------------------------
# checkpoints


def save_checkpoint(net: Network, path) -> None:
    header = {
        "version": 1,
        "kinds": [l.kind for l in net.layers],
        "arities": [l.arity for l in net.layers],
        "taus": [l.tau for l in net.layers],
        "classes": net.classes,
        "group_size": net.group_size,
        "groupsum_tau": net.groupsum_tau,
        "mode": net.mode,
        "seed": net.seed,
        "digest": net.digest,
        "plan": {
            "bits_per_feature": net.plan.bits_per_feature,
            "feature_count": net.plan.feature_count,
            "rho": net.plan.rho,
            "learnable": net.plan.learnable,
            "shared": net.plan.shared,
        },
    }
    arrays = {"plan_base": net.plan.base, "plan_deltas": net.plan.deltas}
    if net.feature_scale is not None:
        arrays["feature_scale"] = net.feature_scale
    for i, layer in enumerate(net.layers):
        arrays[f"layer{i}_indices"] = layer.indices
        arrays[f"layer{i}_params"] = layer.params
    np.savez_compressed(path, header=json.dumps(header), **arrays)


def load_checkpoint(path) -> Network:
    from .network import Layer

    with np.load(path, allow_pickle=False) as z:
        header = json.loads(str(z["header"]))
        if header.get("version") != 1:
            raise CliError(f"{path}: unsupported checkpoint version {header.get('version')}")
        plan_meta = header["plan"]
        plan = ThresholdPlan(
            bits_per_feature=plan_meta["bits_per_feature"],
            feature_count=plan_meta["feature_count"],
            base=z["plan_base"].copy(),
            deltas=z["plan_deltas"].copy(),
            rho=plan_meta["rho"],
            learnable=plan_meta["learnable"],
            shared=plan_meta["shared"],
        )
        layers = [
            Layer(
                kind,
                arity,
                tau,
                z[f"layer{i}_indices"].copy(),
                z[f"layer{i}_params"].copy(),
            )
            for i, (kind, arity, tau) in enumerate(
                zip(header["kinds"], header["arities"], header["taus"])
            )
        ]
        feature_scale = z["feature_scale"].copy() if "feature_scale" in z.files else None
    return Network(
        plan=plan,
        layers=layers,
        classes=header["classes"],
        group_size=header["group_size"],
        groupsum_tau=header["groupsum_tau"],
        mode=header["mode"],
        seed=header["seed"],
        digest=header["digest"],
        feature_scale=feature_scale,
    )


# ---------------------------------------------------------------------------
# commands


def cmd_train(args) -> int:
    cfg = _apply_flags(_load_config(args.config), args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    data = _load_dataset(cfg["dataset"])
    net_cfg = _network_config(cfg, data)
    net = build_network(net_cfg, data.features)

    t = cfg["train"]
    meta = {
        "type": "meta",
        "dataset": data.name or cfg["dataset"]["kind"],
        "samples": len(data),
        "classes": net.classes,
        "widths": [l.count for l in net.layers],
        "arity": [l.arity for l in net.layers],
        "kind": [l.kind for l in net.layers],
        "mode": net.mode,
        "seed": net.seed,
        "encoder": cfg["encoder"]["kind"],
        "bits_per_feature": cfg["encoder"]["bits_per_feature"],
        "epochs": t["epochs"],
        "lr": cfg["optimizer"]["lr"],
        "batch_size": cfg["optimizer"]["batch_size"],
        "groupsum_tau": net.groupsum_tau,
        "parameters": parameter_count(net),
        "digest": net.digest,
    }
    metrics_path = out / "metrics.jsonl"
    with open(metrics_path, "w") as f:
        f.write(json.dumps(meta, sort_keys=True) + "\n")

        def emit(m):
            row = {
                "type": "eval",
                "step": m.step,
                "loss": m.loss,
                "acc_relaxed": m.acc_relaxed,
                "acc_discrete": m.acc_discrete,
                "gap": m.gap,
            }
            f.write(json.dumps(row, sort_keys=True) + "\n")
            f.flush()
            print(
                f"step {m.step} loss {m.loss:.4f} "
                f"acc_relaxed {m.acc_relaxed:.4f} acc_discrete {m.acc_discrete:.4f} "
                f"gap {m.gap:+.4f}"
            )

        try:
            train(
                net,
                data,
                int(t["epochs"]),
                val_fraction=float(t["val_fraction"]),
                eval_every=t["eval_every"],
                on_metrics=emit,
                target_discrete_acc=t["target_discrete_acc"],
            )
        except TrainingDiverged as e:
            print(f"error: {e}", file=sys.stderr)
            return 3

    save_checkpoint(net, out / "checkpoint.npz")
    export_netlist(compile_network(net), out / "model.netlist")
    print(f"wrote {metrics_path}, {out / 'checkpoint.npz'}, {out / 'model.netlist'}")
    return 0


def _eval_sharded(nl: Netlist, bits: np.ndarray, threads: int) -> np.ndarray:
    packed = pack_bits(bits)
    n = bits.shape[0]
    if threads <= 1 or n < 256:
        return eval_bitpacked(nl, packed, n)
    # shard on word boundaries; netlists are immutable so this is safe
    words = packed.shape[1]
    per = -(-words // threads)
    parts = []
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = []
        for w0 in range(0, words, per):
            w1 = min(w0 + per, words)
            count = min(n - w0 * 64, (w1 - w0) * 64)
            futures.append(pool.submit(eval_bitpacked, nl, packed[:, w0:w1], count))
        parts = [fut.result() for fut in futures]
    return np.concatenate(parts)


def cmd_eval(args) -> int:
    try:
        nl = import_netlist(args.netlist)
    except OSError as e:
        raise CliError(f"{args.netlist}: {e.strerror or e}") from None
    except NetlistParseError as e:
        raise CliError(f"{args.netlist}: {e}") from None

    cfg = _apply_flags(_load_config(args.config), args)
    data = _load_dataset(cfg["dataset"], split="test" if args.split == "test" else "train")
    if args.split in ("train", "val"):
        tr, va = datasets.split(data, 0.2, seed=nl.seed)
        data = tr if args.split == "train" else va
    if len(data) == 0:
        raise CliError("dataset is empty")
    if data.features.shape[1] != nl.thresholds.shape[1]:
        raise CliError(
            f"width mismatch: netlist encodes {nl.thresholds.shape[1]} features, "
            f"dataset has {data.features.shape[1]}"
        )

    started = time.perf_counter()
    bits = encode_inputs(nl, data.features)
    preds = _eval_sharded(nl, bits, max(1, args.threads))
    elapsed = time.perf_counter() - started

    confusion = np.zeros((nl.classes, nl.classes), dtype=np.int64)
    np.add.at(confusion, (data.labels, preds), 1)
    report = {
        "netlist": str(args.netlist),
        "dataset": data.name or cfg["dataset"]["kind"],
        "split": args.split,
        "samples": int(len(data)),
        "classes": int(nl.classes),
        "accuracy": float(np.mean(preds == data.labels)),
        "samples_per_second": float(len(data) / elapsed) if elapsed > 0 else float("inf"),
        "confusion": confusion.tolist(),
    }
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def _lut_entropy(luts: np.ndarray) -> np.ndarray:
    ones = luts.mean(axis=1)
    ent = np.zeros_like(ones)
    mid = (ones > 0) & (ones < 1)
    p = ones[mid]
    ent[mid] = -(p * np.log2(p) + (1 - p) * np.log2(1 - p))
    return ent


def cmd_inspect(args) -> int:
    try:
        nl = import_netlist(args.netlist)
    except OSError as e:
        raise CliError(f"{args.netlist}: {e.strerror or e}") from None
    except NetlistParseError as e:
        raise CliError(f"{args.netlist}: {e}") from None

    lines = [
        f"netlist {args.netlist}",
        f"  seed {nl.seed}  digest {nl.digest}",
        f"  encoder {nl.thresholds.shape[0]} bits x {nl.thresholds.shape[1]} features "
        f"-> {nl.input_width} input bits",
        f"  groups: {nl.classes} classes x {nl.group_size} nodes, tau {nl.groupsum_tau:g}",
        f"  widths: {' -> '.join(str(w) for w in nl.widths)}",
        f"  lut entries: {sum(l.size for _, l in nl.layers)}",
    ]
    for li, (indices, luts) in enumerate(nl.layers, start=1):
        count, arity = indices.shape
        ent = _lut_entropy(luts)
        lines.append(
            f"  layer {li}: {count} nodes, arity {arity}, "
            f"lut entropy mean {ent.mean():.3f} min {ent.min():.3f} max {ent.max():.3f}"
        )
        if arity == 2:
            ints = (luts * (1 << np.arange(4))).sum(axis=1)
            hist: dict[str, int] = {}
            for v in ints:
                name = GATE_NAME_BY_INT[int(v)]
                hist[name] = hist.get(name, 0) + 1
            for name, cnt in sorted(hist.items(), key=lambda kv: -kv[1]):
                lines.append(f"    {name:<14} {cnt:6d}  ({cnt / count:.1%})")
    print("\n".join(lines))
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _add_dataset_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--dataset", choices=["mnist", "fashion", "csv", "synth"])
    p.add_argument("--data-dir", dest="data_dir", help="directory holding idx archives")
    p.add_argument("--csv", help="CSV file for --dataset csv")
    p.add_argument("--label-column", dest="label_column")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lutnn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a network and export its netlist")
    _add_dataset_flags(p_train)
    p_train.add_argument("--out", required=True, help="output directory")
    p_train.add_argument("--seed", type=int)
    p_train.add_argument("--mode", choices=["soft", "gumbel-soft", "soft-ste", "gumbel-ste"])
    p_train.add_argument("--arity", type=int)
    p_train.add_argument("--depth-factor", dest="depth_factor", type=int)
    p_train.add_argument("--threads", type=int, default=1, help="evaluation thread cap")
    p_train.add_argument("--encoder", choices=["uniform", "distributive", "learnable"])
    p_train.add_argument("--bits-per-feature", dest="bits_per_feature", type=int)
    p_train.add_argument("--epochs", type=int)
    p_train.set_defaults(fn=cmd_train)

    p_eval = sub.add_parser("eval", help="score a netlist; JSON report on stdout")
    p_eval.add_argument("netlist")
    _add_dataset_flags(p_eval)
    p_eval.add_argument("--split", choices=["train", "val", "test", "all"], default="val")
    p_eval.add_argument("--threads", type=int, default=1)
    p_eval.set_defaults(fn=cmd_eval)

    p_inspect = sub.add_parser("inspect", help="summarize a netlist's structure")
    p_inspect.add_argument("netlist")
    p_inspect.set_defaults(fn=cmd_inspect)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
