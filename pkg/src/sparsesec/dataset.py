"""Labelled feature tables: CSV/IDX ingestion, min-max scaling, folds and toy data."""

from __future__ import annotations

import csv
import gzip
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Malformed or inconsistent input data."""


@dataclass
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    feature_names: list[str] | None = None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels).astype(np.int64)
        if self.features.ndim != 2:
            raise DataError(f"features must be 2-D, got shape {self.features.shape}")
        if self.labels.shape != (self.features.shape[0],):
            raise DataError(
                f"{self.labels.shape[0]} labels for {self.features.shape[0]} rows")
        bad = np.flatnonzero((self.labels != 0) & (self.labels != 1))
        if bad.size:
            raise DataError(f"invalid label {self.labels[bad[0]]} at row {bad[0]}")
        if self.feature_names is not None and len(self.feature_names) != self.n_features:
            raise DataError("feature_names length does not match feature count")

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def __len__(self):
        return self.n_samples

    def subset(self, index) -> "Dataset":
        return Dataset(self.features[index], self.labels[index], self.feature_names)

    def by_class(self, label: int) -> np.ndarray:
        return self.features[self.labels == label]


@dataclass
class FoldAssignment:
    fold_index: np.ndarray
    k: int = field(default=0)

    def __post_init__(self):
        self.fold_index = np.asarray(self.fold_index, dtype=np.int64)
        if not self.k:
            self.k = int(self.fold_index.max()) + 1

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_index == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_index != fold)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.fold_index, minlength=self.k)


def load_csv(path) -> Dataset:
    """Read a CSV whose first column is ``label`` and the rest are numeric features.

    Errors carry the 1-based line number and the offending column name.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"missing file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if not header or header[0].strip() != "label":
            raise DataError(f"{path}: first header column must be 'label'")
        names = [h.strip() for h in header[1:]]
        width = len(header)
        labels, rows = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise DataError(
                    f"{path}:{lineno}: ragged row ({len(row) - 1} features, "
                    f"header declares {width - 1})")
            try:
                label = float(row[0])
            except ValueError:
                raise DataError(
                    f"{path}:{lineno}: non-numeric cell in column 'label'") from None
            if label not in (0.0, 1.0):
                raise DataError(f"{path}:{lineno}: invalid label {row[0]!r}")
            values = []
            for col, cell in enumerate(row[1:]):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"{path}:{lineno}: non-numeric cell {cell!r} in column "
                        f"{names[col]!r}") from None
            labels.append(int(label))
            rows.append(values)
    features = np.array(rows, dtype=np.float64).reshape(len(rows), width - 1)
    return Dataset(features, np.array(labels, dtype=np.int64), names)


def save_csv(dataset: Dataset, path) -> None:
    names = dataset.feature_names or [f"f{i}" for i in range(dataset.n_features)]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["label", *names])
        for y, row in zip(dataset.labels, dataset.features):
            # repr() is the shortest string that reparses to the same double
            writer.writerow([int(y), *(repr(float(v)) for v in row)])


def normalize_minmax(dataset: Dataset) -> Dataset:
    """Rescale each column to [0, 1]; constant columns become 0."""
    x = dataset.features
    lo = x.min(axis=0)
    span = x.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)
    scaled = np.where(span > 0, (x - lo) / safe, 0.0)
    return Dataset(np.clip(scaled, 0.0, 1.0), dataset.labels.copy(), dataset.feature_names)


def kfold_split(n: int, k: int, seed: int = 0) -> FoldAssignment:
    if k < 2 or k > n:
        raise ValueError(f"need 2 <= k <= n, got k={k}, n={n}")
    order = np.random.default_rng(seed).permutation(n)
    fold_index = np.empty(n, dtype=np.int64)
    fold_index[order] = np.arange(n) % k
    return FoldAssignment(fold_index, k)


def gen_synthetic(n_per_class: int = 10, seed: int = 0) -> Dataset:
    """Two Gaussian blobs where only the first feature separates the classes.

    Variances are 0.25 (std 0.5). Class 0 centres feature 1 on 2, class 1 on 4;
    feature 2 is centred on 3 for everyone, so the Bayes boundary is feature1 = 3.
    """
    if n_per_class < 1:
        raise ValueError("n_per_class must be >= 1")
    rng = np.random.default_rng(seed)
    std = 0.5
    first = np.concatenate([rng.normal(2.0, std, n_per_class),
                            rng.normal(4.0, std, n_per_class)])
    second = rng.normal(3.0, std, 2 * n_per_class)
    labels = np.repeat([0, 1], n_per_class)
    return Dataset(np.column_stack([first, second]), labels, ["x1", "x2"])


def gen_sparse_synthetic(n_per_class: int = 500, n_features: int = 200,
                         n_informative: int = 20, seed: int = 0,
                         noise_std: float = 0.2, max_shift: float = 0.3) -> Dataset:
    """High-dimensional toy problem where only the first ``n_informative`` columns matter.

    Informative column j is Gaussian around 0.5 +/- shift_j / 2 (sign per column,
    shifts spaced linearly from ``max_shift`` down to ``max_shift / 4``); the
    remaining columns are uniform noise. Values are clipped to [0, 1].
    """
    if n_per_class < 1 or not 1 <= n_informative <= n_features:
        raise ValueError("need n_per_class >= 1 and 1 <= n_informative <= n_features")
    rng = np.random.default_rng(seed)
    n = 2 * n_per_class
    labels = np.repeat([0, 1], n_per_class)
    x = rng.random((n, n_features))
    shift = np.linspace(max_shift, max_shift / 4, n_informative)
    shift *= rng.choice([-1.0, 1.0], n_informative)
    x[:, :n_informative] = (0.5 + np.outer(labels - 0.5, shift)
                            + noise_std * rng.normal(size=(n, n_informative)))
    names = ([f"inf{i}" for i in range(n_informative)]
             + [f"noise{i}" for i in range(n_features - n_informative)])
    return Dataset(np.clip(x, 0.0, 1.0), labels, names)


def read_idx(path) -> np.ndarray:
    """Parse an IDX file (optionally gzipped) into an ndarray."""
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 4 or raw[0] != 0 or raw[1] != 0:
        raise DataError(f"{path}: bad IDX magic number")
    dtypes = {0x08: ">u1", 0x09: ">i1", 0x0B: ">i2", 0x0C: ">i4", 0x0D: ">f4", 0x0E: ">f8"}
    code, ndim = raw[2], raw[3]
    if code not in dtypes:
        raise DataError(f"{path}: unknown IDX type code 0x{code:02x}")
    shape = struct.unpack(f">{ndim}I", raw[4:4 + 4 * ndim])
    dtype = np.dtype(dtypes[code])
    expected = int(np.prod(shape)) * dtype.itemsize
    body = raw[4 + 4 * ndim:]
    if len(body) != expected:
        raise DataError(f"{path}: expected {expected} data bytes, found {len(body)}")
    return np.frombuffer(body, dtype=dtype).reshape(shape)


def write_idx(array: np.ndarray, path) -> None:
    array = np.asarray(array)
    codes = {np.dtype("u1"): 0x08, np.dtype("i1"): 0x09, np.dtype("i2"): 0x0B,
             np.dtype("i4"): 0x0C, np.dtype("f4"): 0x0D, np.dtype("f8"): 0x0E}
    code = codes[array.dtype.newbyteorder("=")]
    head = bytes([0, 0, code, array.ndim]) + struct.pack(f">{array.ndim}I", *array.shape)
    payload = head + array.astype(array.dtype.newbyteorder(">")).tobytes()
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "wb") as fh:
        fh.write(payload)


def mnist_binary(images_path, labels_path, positive: int = 7, negative: int = 9) -> Dataset:
    """Two-digit MNIST subset; ``positive`` becomes class 1, pixels scaled by 1/255."""
    images = read_idx(images_path)
    digits = read_idx(labels_path)
    if images.shape[0] != digits.shape[0]:
        raise DataError("image and label files disagree on sample count")
    keep = (digits == positive) | (digits == negative)
    x = images[keep].reshape(int(keep.sum()), -1).astype(np.float64) / 255.0
    y = (digits[keep] == positive).astype(np.int64)
    side = int(round(np.sqrt(x.shape[1])))
    if side * side == x.shape[1]:
        names = [f"px_{r}_{c}" for r in range(side) for c in range(side)]
    else:
        names = [f"px_{i}" for i in range(x.shape[1])]
    return Dataset(x, y, names)
