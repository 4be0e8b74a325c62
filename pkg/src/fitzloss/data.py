"""Multi-label dataset ingestion, preprocessing, and a synthetic generator.

Datasets are immutable after construction (the backing arrays are marked
read-only) and carry named train/dev/test index sets.  Label rows always
satisfy the probability-vector invariants after preprocessing.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParseError, SchemaError
from .simplex import check_prob_vector, softargmax

__all__ = [
    "SPLIT_NAMES",
    "RawDataset",
    "Dataset",
    "load_multilabel",
    "preprocess",
    "synth_generate",
    "load_manifest",
    "build_dataset",
]

SPLIT_NAMES = ("train", "dev", "test")

# Refuse to densify anything bigger than this by default (bytes).
DEFAULT_DENSE_CAP = 2 << 30


@dataclass
class RawDataset:
    """Parsed but not yet preprocessed data.

    ``label_indicators`` holds nonnegative label weights (binary for the
    svmlight format); rows may be all-zero until :func:`preprocess` drops
    them.
    """

    name: str
    features: np.ndarray
    label_indicators: np.ndarray
    splits: dict = field(default_factory=dict)


@dataclass
class Dataset:
    """Preprocessed features, simplex labels, and disjoint named splits."""

    name: str
    features: np.ndarray
    labels: np.ndarray
    splits: dict

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=float)
        if self.features.ndim != 2 or self.labels.ndim != 2:
            raise SchemaError("features and labels must be matrices")
        if self.features.shape[0] != self.labels.shape[0]:
            raise SchemaError("features and labels disagree on sample count")
        n = self.features.shape[0]
        seen = np.zeros(n, dtype=bool)
        for split in SPLIT_NAMES:
            if split not in self.splits:
                raise SchemaError(f"missing split {split!r}")
            idx = np.asarray(self.splits[split], dtype=int)
            if idx.size and (idx.min() < 0 or idx.max() >= n):
                raise SchemaError(f"split {split!r} indexes out of range")
            if np.any(seen[idx]):
                raise SchemaError(f"split {split!r} overlaps another split")
            seen[idx] = True
            self.splits[split] = idx
        for i, row in enumerate(self.labels):
            try:
                check_prob_vector(row)
            except DomainError as exc:
                raise SchemaError(f"label row {i} invalid: {exc}") from exc
        self.features.flags.writeable = False
        self.labels.flags.writeable = False
        for idx in self.splits.values():
            idx.flags.writeable = False

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def d(self):
        return self.features.shape[1]

    @property
    def k(self):
        return self.labels.shape[1]

    def split(self, name):
        """(features, labels) restricted to one named split."""
        if name not in self.splits:
            raise SchemaError(f"unknown split {name!r}")
        idx = self.splits[name]
        return self.features[idx], self.labels[idx]


def _parse_svmlight_line(text, line_no, k, d):
    labels = np.zeros(k)
    x = np.zeros(d)
    stripped = text.strip()
    tokens = stripped.split()
    start = 0
    # a leading token without ':' is the comma-separated label list; a line
    # may legitimately start straight at the features (empty label set)
    if tokens and ":" not in tokens[0]:
        start = 1
        if tokens[0]:
            for piece in tokens[0].split(","):
                if not piece:
                    continue
                try:
                    idx = int(piece)
                except ValueError as exc:
                    raise ParseError(f"bad label {piece!r}", line_no) from exc
                if not 0 <= idx < k:
                    raise SchemaError(
                        f"line {line_no}: label {idx} outside [0, {k})"
                    )
                labels[idx] = 1.0
    seen = set()
    for token in tokens[start:]:
        head, sep, tail = token.partition(":")
        if not sep:
            raise ParseError(f"expected idx:val, got {token!r}", line_no)
        try:
            idx = int(head)
            value = float(tail)
        except ValueError as exc:
            raise ParseError(f"bad feature {token!r}", line_no) from exc
        if not 1 <= idx <= d:
            raise SchemaError(
                f"line {line_no}: feature index {idx} outside [1, {d}]"
            )
        if idx in seen:
            raise ParseError(f"duplicate feature index {idx}", line_no)
        seen.add(idx)
        x[idx - 1] = value
    return labels, x


def _open_text(path):
    try:
        return open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _load_svmlight(path, k, d, max_dense_bytes):
    rows = []
    with _open_text(path) as handle:
        for line_no, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            rows.append(_parse_svmlight_line(stripped, line_no, k, d))
            if (len(rows) + 1) * d * 8 > max_dense_bytes:
                raise SchemaError(
                    f"{path}: dense size would exceed the "
                    f"{max_dense_bytes}-byte cap"
                )
    if not rows:
        raise SchemaError(f"{path}: no samples")
    labels = np.array([r[0] for r in rows])
    features = np.array([r[1] for r in rows])
    return features, labels


def _load_csv(path, k, d, max_dense_bytes):
    """Header must name k label columns y0..y{k-1} then d feature columns
    x0..x{d-1}, in that order."""
    expected = [f"y{i}" for i in range(k)] + [f"x{j}" for j in range(d)]
    rows = []
    with _open_text(path) as handle:
        header = None
        for line_no, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            cells = [c.strip() for c in stripped.split(",")]
            if header is None:
                header = cells
                if header != expected:
                    raise SchemaError(
                        f"{path}: header must be {','.join(expected)}"
                    )
                continue
            if len(cells) != k + d:
                raise ParseError(
                    f"expected {k + d} columns, got {len(cells)}", line_no
                )
            try:
                values = [float(c) for c in cells]
            except ValueError as exc:
                raise ParseError(str(exc), line_no) from exc
            if any(v < 0 for v in values[:k]):
                raise ParseError("negative label weight", line_no)
            rows.append(values)
            if (len(rows) + 1) * (k + d) * 8 > max_dense_bytes:
                raise SchemaError(f"{path}: exceeds the dense-size cap")
    if header is None or not rows:
        raise SchemaError(f"{path}: no samples")
    arr = np.asarray(rows, dtype=float)
    return arr[:, k:], arr[:, :k]


def load_multilabel(path, fmt, k, d, name=None, max_dense_bytes=DEFAULT_DENSE_CAP):
    """Read one multi-label file into dense matrices.

    ``svmlight_multilabel`` lines look like ``l1,l2,... idx:val idx:val ...``
    with comma-separated 0-based class ids and 1-based feature indices;
    blank lines and '#' comments are skipped.  ``csv`` wants a header row
    ``y0..y{k-1},x0..x{d-1}``.  Returns a RawDataset without splits.
    """
    if k < 1 or d < 1:
        raise SchemaError("k and d must be positive")
    if fmt == "svmlight_multilabel":
        features, labels = _load_svmlight(path, k, d, max_dense_bytes)
    elif fmt == "csv":
        features, labels = _load_csv(path, k, d, max_dense_bytes)
    else:
        raise SchemaError(f"unknown format {fmt!r}")
    return RawDataset(
        name=name or os.path.basename(str(path)),
        features=features,
        label_indicators=labels,
    )


def preprocess(raw):
    """Canonicalize a raw dataset.

    Drops samples with no label from every split, standardizes each feature
    to zero mean and unit variance using train-split statistics only (a
    zero-variance feature is centered, not scaled), and divides each label
    row by its sum.  Applying it to its own output is a no-op up to
    roundoff.
    """
    features = np.asarray(raw.features, dtype=float)
    indicators = np.asarray(raw.label_indicators, dtype=float)
    if features.shape[0] != indicators.shape[0]:
        raise SchemaError("features and labels disagree on sample count")
    sums = indicators.sum(axis=1)
    keep = sums > 0.0
    new_index = np.full(features.shape[0], -1, dtype=int)
    new_index[keep] = np.arange(int(keep.sum()))
    splits = {}
    for split in SPLIT_NAMES:
        idx = np.asarray(raw.splits.get(split, []), dtype=int)
        remapped = new_index[idx]
        splits[split] = remapped[remapped >= 0]
    if splits["train"].size == 0:
        raise SchemaError("train split is empty after dropping label-free rows")
    features = features[keep]
    labels = indicators[keep] / sums[keep][:, None]
    train_rows = features[splits["train"]]
    mean = train_rows.mean(axis=0)
    std = train_rows.std(axis=0)
    scale = np.where(std > 0.0, std, 1.0)
    features = (features - mean) / scale
    return Dataset(
        name=raw.name, features=features, labels=labels, splits=splits
    )


def synth_generate(seed, n, d, k, noise):
    """Deterministic synthetic label-proportion dataset.

    Draws a ground-truth weight matrix and standard-normal features, then
    sets y_i = softargmax(W0 x_i + noise * eps_i); labels are therefore
    strictly interior.  Split is a contiguous 60/20/20 partition.
    """
    if n < 10 or d < 1 or k < 2:
        raise DomainError("need n >= 10, d >= 1, k >= 2")
    if not noise >= 0.0:
        raise DomainError("noise must be nonnegative")
    rng = np.random.default_rng(seed)
    w0 = rng.standard_normal((k, d))
    features = rng.standard_normal((n, d))
    eps = rng.standard_normal((n, k))
    labels = softargmax(features @ w0.T + noise * eps, axis=1)
    n_train = int(0.6 * n)
    n_dev = int(0.8 * n)
    splits = {
        "train": np.arange(0, n_train),
        "dev": np.arange(n_train, n_dev),
        "test": np.arange(n_dev, n),
    }
    name = f"synth-seed{seed}-n{n}-d{d}-k{k}"
    return Dataset(name=name, features=features, labels=labels, splits=splits)


def load_manifest(path):
    """Parse a dataset manifest (JSON) into validated entry dicts.

    Schema: ``{"datasets": [entry, ...]}`` where each entry has a unique
    ``name`` and either ``format: synth`` with seed/n/d/k/noise or a file
    format (``svmlight_multilabel`` or ``csv``) with k, d and ``paths``
    mapping split names to files (``dev`` optional, carved from train when
    absent; a single ``path`` gets a seeded 60/20/20 split).
    """
    with _open_text(path) as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("datasets"), list):
        raise SchemaError(f"{path}: expected an object with a datasets list")
    names = set()
    for entry in doc["datasets"]:
        if not isinstance(entry, dict) or "name" not in entry:
            raise SchemaError(f"{path}: every dataset entry needs a name")
        if entry["name"] in names:
            raise SchemaError(f"{path}: duplicate dataset {entry['name']!r}")
        names.add(entry["name"])
        if "format" not in entry:
            raise SchemaError(f"{path}: dataset {entry['name']!r} has no format")
    return doc["datasets"]


def _carve_dev(train_idx, rng):
    """Deterministic 75/25 train/dev split of a train-only dataset."""
    perm = rng.permutation(train_idx.size)
    cut = int(round(0.75 * train_idx.size))
    return train_idx[perm[:cut]], train_idx[perm[cut:]]


def build_dataset(entry, base_dir="."):
    """Materialize one manifest entry as a preprocessed Dataset."""
    fmt = entry["format"]
    name = entry["name"]
    if fmt == "synth":
        dataset = synth_generate(
            seed=int(entry.get("seed", 0)),
            n=int(entry["n"]),
            d=int(entry["d"]),
            k=int(entry["k"]),
            noise=float(entry.get("noise", 0.0)),
        )
        dataset.name = name
        return dataset
    k = int(entry["k"])
    d = int(entry["d"])
    rng = np.random.default_rng(int(entry.get("split_seed", 0)))
    cap = int(entry.get("max_dense_bytes", DEFAULT_DENSE_CAP))
    if "path" in entry:
        raw = load_multilabel(
            os.path.join(base_dir, entry["path"]), fmt, k, d, name=name,
            max_dense_bytes=cap,
        )
        n = raw.features.shape[0]
        perm = rng.permutation(n)
        n_train = int(0.6 * n)
        n_dev = int(0.8 * n)
        raw.splits = {
            "train": perm[:n_train],
            "dev": perm[n_train:n_dev],
            "test": perm[n_dev:],
        }
        return preprocess(raw)
    paths = entry.get("paths")
    if not isinstance(paths, dict) or "train" not in paths or "test" not in paths:
        raise SchemaError(
            f"dataset {name!r} needs paths.train and paths.test (or a single path)"
        )
    parts = []
    offsets = {}
    total = 0
    for split in SPLIT_NAMES:
        if split not in paths:
            continue
        raw = load_multilabel(
            os.path.join(base_dir, paths[split]), fmt, k, d, name=name,
            max_dense_bytes=cap,
        )
        offsets[split] = np.arange(total, total + raw.features.shape[0])
        parts.append(raw)
        total += raw.features.shape[0]
    features = np.vstack([p.features for p in parts])
    labels = np.vstack([p.label_indicators for p in parts])
    if "dev" not in offsets:
        offsets["train"], offsets["dev"] = _carve_dev(offsets["train"], rng)
    raw = RawDataset(
        name=name, features=features, label_indicators=labels, splits=offsets
    )
    return preprocess(raw)
