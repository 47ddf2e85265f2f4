"""Dataset ingestion, synthetic data, one-hot targets and seeded batching.

The on-disk format is the CIFAR-10 binary layout: records of 3073 bytes,
one label byte (0..9) followed by 3072 pixel bytes stored as three
1024-byte channel planes (R, G, B), each a row-major 32x32 grid. Loading
scales pixels by 1/255 into [0, 1].
"""

from __future__ import annotations

import glob
import os
from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from .errors import ConfigError, PcnError

RECORD_BYTES = 3073
PIXELS = 3072


class DataError(PcnError):
    """Base class for dataset problems (CLI maps these to exit code 2)."""


class FileFormatError(DataError):
    """File length is not a whole number of records."""


class CorruptRecordError(DataError):
    """A record's label byte is outside 0..9."""


@dataclass
class Dataset:
    """N x d_0 inputs in [0, 1] plus integer class labels."""

    inputs: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.inputs.ndim != 2 or self.inputs.shape[0] != self.labels.shape[0]:
            raise ConfigError("inputs rows and labels length must agree")

    def __len__(self):
        return self.inputs.shape[0]

    @property
    def input_dim(self) -> int:
        return self.inputs.shape[1]


def load_cifar10(paths: Sequence[str]) -> Dataset:
    """Parse CIFAR-10 binary files, concatenating rows in path order."""
    inputs: List[np.ndarray] = []
    labels: List[np.ndarray] = []
    for path in paths:
        raw = np.fromfile(path, dtype=np.uint8)
        if raw.size == 0 or raw.size % RECORD_BYTES != 0:
            expected = (raw.size // RECORD_BYTES + 1) * RECORD_BYTES
            raise FileFormatError(
                f"{path}: length {raw.size} is not a multiple of {RECORD_BYTES} "
                f"bytes (nearest whole record count needs {expected})")
        records = raw.reshape(-1, RECORD_BYTES)
        labs = records[:, 0]
        bad = np.nonzero(labs > 9)[0]
        if bad.size:
            raise CorruptRecordError(
                f"{path}: record {int(bad[0])} has label byte {int(labs[bad[0]])} > 9")
        inputs.append(records[:, 1:].astype(np.float64) / 255.0)
        labels.append(labs.astype(np.int64))
    return Dataset(np.vstack(inputs), np.concatenate(labels))


def save_cifar10(dataset: Dataset, path: str) -> None:
    """Write a dataset with d_0 = 3072 in the binary layout.

    Pixels are rounded to the nearest 1/255 step, so a load after save
    reproduces inputs within half a quantization step.
    """
    if dataset.input_dim != PIXELS:
        raise ConfigError(f"binary layout requires d_0 = {PIXELS}, "
                          f"got {dataset.input_dim}")
    if np.any(dataset.labels < 0) or np.any(dataset.labels > 9):
        raise ConfigError("binary layout requires labels in 0..9")
    n = len(dataset)
    out = np.empty((n, RECORD_BYTES), dtype=np.uint8)
    out[:, 0] = dataset.labels.astype(np.uint8)
    pixels = np.clip(np.rint(dataset.inputs * 255.0), 0, 255)
    out[:, 1:] = pixels.astype(np.uint8)
    out.tofile(path)


def synth_blobs(num_classes: int, samples_per_class: int, d_0: int,
                separation: float, seed: int) -> Dataset:
    """Gaussian class blobs rescaled into [0, 1].

    Class means sit at pairwise distance >= separation with unit
    within-class deviation before the affine rescale; a single global
    affine map then squeezes all values into [0, 1], preserving the
    separation-to-spread ratio. Rows come out class-shuffled,
    deterministically in `seed`.
    """
    if num_classes < 1 or samples_per_class < 1 or d_0 < 1:
        raise ConfigError("num_classes, samples_per_class and d_0 must be >= 1")
    if separation <= 0:
        raise ConfigError("separation must be > 0")
    rng = np.random.default_rng(seed)
    means = np.zeros((num_classes, d_0))
    if num_classes <= d_0:
        # Orthogonal corners: pairwise distance separation * sqrt(2).
        for c in range(num_classes):
            means[c, c] = separation
    else:
        # Lattice along the diagonal: adjacent distance = separation.
        u = np.ones(d_0) / np.sqrt(d_0)
        for c in range(num_classes):
            means[c] = c * separation * u
    xs, ys = [], []
    for c in range(num_classes):
        xs.append(means[c] + rng.standard_normal((samples_per_class, d_0)))
        ys.append(np.full(samples_per_class, c, dtype=np.int64))
    inputs = np.vstack(xs)
    labels = np.concatenate(ys)
    lo, hi = inputs.min(), inputs.max()
    inputs = (inputs - lo) / (hi - lo)
    perm = rng.permutation(len(labels))
    return Dataset(inputs[perm], labels[perm])


def one_hot(labels: Sequence[int], num_classes: int) -> np.ndarray:
    """B x C one-hot matrix; exactly one 1.0 per row."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        bad = labels[(labels < 0) | (labels >= num_classes)][0]
        raise ConfigError(f"label {int(bad)} outside [0, {num_classes})")
    out = np.zeros((labels.shape[0], num_classes))
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


@dataclass
class BatchPlan:
    """Seeded sample order for one pass over a dataset."""

    batch_size: int
    permutation: np.ndarray
    drop_last: bool = True

    @classmethod
    def shuffled(cls, n: int, batch_size: int, seed: int,
                 drop_last: bool = True) -> "BatchPlan":
        if batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        perm = np.random.default_rng(seed).permutation(n)
        return cls(batch_size, perm, drop_last)

    @classmethod
    def ordered(cls, n: int, batch_size: int, drop_last: bool = False) -> "BatchPlan":
        return cls(batch_size, np.arange(n), drop_last)

    @property
    def num_batches(self) -> int:
        n = len(self.permutation)
        if self.drop_last:
            return n // self.batch_size
        return (n + self.batch_size - 1) // self.batch_size


def batches(dataset: Dataset, plan: BatchPlan,
            ) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """Yield (inputs, labels) batches following the plan's permutation.

    With drop_last, exactly floor(N / B) full batches; otherwise a final
    partial batch covers the remainder.
    """
    n = len(dataset)
    if plan.batch_size > n and plan.drop_last:
        raise ConfigError(f"batch_size {plan.batch_size} exceeds dataset size {n}")
    if len(plan.permutation) != n:
        raise ConfigError("plan permutation length does not match dataset")
    for start in range(0, plan.num_batches * plan.batch_size, plan.batch_size):
        idx = plan.permutation[start:start + plan.batch_size]
        yield dataset.inputs[idx], dataset.labels[idx]


def train_files(data_dir: str) -> List[str]:
    """All data_batch_<n>.bin files under `data_dir`, in numeric order.

    CIFAR-10 ships five; synthetic datasets may have any count.
    """
    found = glob.glob(os.path.join(data_dir, "data_batch_*.bin"))

    def index(path):
        stem = os.path.basename(path)[len("data_batch_"):-len(".bin")]
        return (int(stem), path) if stem.isdigit() else (1 << 30, path)

    return sorted(found, key=index)


def test_files(data_dir: str) -> List[str]:
    return [os.path.join(data_dir, "test_batch.bin")]
