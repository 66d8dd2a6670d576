"""Dataset ingestion: IDX image archives, CSV tables, and a synthetic task.

All loaders produce the same container: a float feature matrix, integer
class labels, and the class count. Image pixels are scaled to [0, 1];
tabular features keep their native units (the thermometer encoder handles
scale).
"""

from __future__ import annotations

import csv
import gzip
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801


@dataclass
class Dataset:
    features: np.ndarray  # (N, d) float64
    labels: np.ndarray  # (N,) int64 in [0, classes)
    classes: int
    name: str = ""

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if self.labels.shape != (self.features.shape[0],):
            raise ValueError("one label per sample required")

    def __len__(self) -> int:
        return self.features.shape[0]


def _read_binary(path) -> bytes:
    path = Path(path)
    if path.suffix == ".gz":
        with gzip.open(path, "rb") as f:
            return f.read()
    return path.read_bytes()


def load_idx(images_path, labels_path, classes: int = 10, name: str = "") -> Dataset:
    """Load an image/label archive pair in the big-endian IDX format.

    Accepts plain or .gz files. Image payloads are unsigned bytes scaled to
    [0, 1] and flattened row-major; labels must lie in [0, classes).
    """
    img = _read_binary(images_path)
    if len(img) < 16:
        raise ValueError(f"{images_path}: image header truncated ({len(img)} bytes)")
    magic, count, rows, cols = struct.unpack(">iiii", img[:16])
    if magic != IMAGE_MAGIC:
        raise ValueError(
            f"{images_path}: bad image magic 0x{magic:08x}, expected 0x{IMAGE_MAGIC:08x}"
        )
    expected = 16 + count * rows * cols
    if len(img) != expected:
        raise ValueError(
            f"{images_path}: truncated image payload, expected {expected} bytes, got {len(img)}"
        )
    pixels = np.frombuffer(img, dtype=np.uint8, offset=16).reshape(count, rows * cols)

    lab = _read_binary(labels_path)
    if len(lab) < 8:
        raise ValueError(f"{labels_path}: label header truncated ({len(lab)} bytes)")
    lmagic, lcount = struct.unpack(">ii", lab[:8])
    if lmagic != LABEL_MAGIC:
        raise ValueError(
            f"{labels_path}: bad label magic 0x{lmagic:08x}, expected 0x{LABEL_MAGIC:08x}"
        )
    if len(lab) != 8 + lcount:
        raise ValueError(
            f"{labels_path}: truncated label payload, expected {8 + lcount} bytes, got {len(lab)}"
        )
    if lcount != count:
        raise ValueError(f"image/label count mismatch: {count} images vs {lcount} labels")
    labels = np.frombuffer(lab, dtype=np.uint8, offset=8).astype(np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= classes):
        raise ValueError(
            f"{labels_path}: labels outside [0, {classes}): saw {labels.max()}"
        )
    return Dataset(pixels.astype(np.float64) / 255.0, labels, classes, name=name)


def load_csv(path, label_column: str) -> Dataset:
    """Load a numeric CSV with a header row; one column holds integer labels."""
    path = Path(path)
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, expected a header row") from None
        if label_column not in header:
            raise ValueError(f"{path}: no column named {label_column!r} in header {header}")
        label_idx = header.index(label_column)
        feats = []
        labels = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                values = [float(v) for v in row]
            except ValueError:
                bad = next(v for v in row if not _is_float(v))
                raise ValueError(f"{path}:{lineno}: non-numeric value {bad!r}") from None
            lab = values.pop(label_idx)
            if lab != int(lab) or lab < 0:
                raise ValueError(f"{path}:{lineno}: label must be a non-negative integer, got {lab}")
            labels.append(int(lab))
            feats.append(values)
    if not feats:
        raise ValueError(f"{path}: no data rows")
    labels = np.array(labels, dtype=np.int64)
    return Dataset(np.array(feats), labels, int(labels.max()) + 1, name=path.stem)


def _is_float(v: str) -> bool:
    try:
        float(v)
        return True
    except ValueError:
        return False


def save_csv(dataset: Dataset, path, label_column: str = "label"):
    """Write a dataset as numeric CSV; inverse of load_csv up to float repr."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        d = dataset.features.shape[1]
        writer.writerow([f"f{j}" for j in range(d)] + [label_column])
        for row, lab in zip(dataset.features, dataset.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(lab)])


def synth_heterogeneous(
    seed: int, samples: int = 20000, features: int = 6, classes: int = 2
) -> Dataset:
    """Synthetic tabular task with wildly mismatched feature scales.

    Each feature is a monotone transform of a uniform latent; the cycle of
    transforms mixes a unit uniform, a heavy-tailed cubic at scale 100, an
    exponential blow-up, and a micro-scale column, so column variances span
    many orders of magnitude. Labels come from a thresholded linear rule:
    a weighted vote over one hidden cut per feature, plus a weak continuous
    term that breaks ties between vote levels. The cuts sit at generic
    quantiles of their features, so an encoder that can place thresholds
    freely resolves the rule better than any fixed quantile grid.
    Class edges are score quantiles (near balance) and 5% of labels flip.
    """
    if features < 2:
        raise ValueError("need at least two features")
    if classes < 2:
        raise ValueError("need at least two classes")
    if samples < 10 * classes:
        raise ValueError("too few samples to balance the planted classes")
    rng = np.random.default_rng(np.random.PCG64(seed))
    latents = rng.random((samples, features))
    x = np.empty_like(latents)
    for j in range(features):
        v = latents[:, j]
        kind = j % 4
        if kind == 0:
            x[:, j] = v
        elif kind == 1:
            x[:, j] = 100.0 * (2.0 * v - 1.0) ** 3
        elif kind == 2:
            x[:, j] = np.exp(8.0 * v)
        else:
            x[:, j] = v / 1000.0
    weights = rng.choice([-2.0, -1.0, 1.0, 2.0], size=features)
    cuts = rng.uniform(0.12, 0.88, size=features)
    score = (latents > cuts).astype(np.float64) @ weights
    score += 0.5 * (2.0 * latents[:, 0] - 1.0)
    edges = np.quantile(score, np.arange(1, classes) / classes)
    labels = np.digitize(score, edges)
    flip = rng.random(samples) < 0.05
    shift = rng.integers(1, classes, size=samples)
    labels = np.where(flip, (labels + shift) % classes, labels)
    return Dataset(x, labels.astype(np.int64), classes, name=f"synth-{seed}")


def split(dataset: Dataset, val_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Deterministic shuffled split into (train, validation).

    The two parts are disjoint and exhaust the dataset; the permutation
    depends only on the seed and the dataset size.
    """
    if not 0.0 < val_fraction < 1.0:
        raise ValueError("validation fraction must be in (0, 1)")
    n = len(dataset)
    rng = np.random.default_rng(np.random.PCG64([seed, 0x5917]))
    perm = rng.permutation(n)
    n_val = max(1, int(round(n * val_fraction)))
    val_ix = perm[:n_val]
    train_ix = perm[n_val:]
    mk = lambda ix, tag: Dataset(
        dataset.features[ix], dataset.labels[ix], dataset.classes, name=f"{dataset.name}{tag}"
    )
    return mk(train_ix, "/train"), mk(val_ix, "/val")
