"""Dataset construction: the sine benchmark, delimited and sparse-text
loaders, standardization, one-hot encoding, and seeded splits."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ParameterError, ParseError, ShapeError
from .features import seeded_stream

SINE_HALF_WIDTH = 12 * np.pi  # inputs drawn uniformly from [-12*pi, 12*pi]
SINE_DEFAULT_POINTS = 5000


@dataclass
class Dataset:
    """Dense inputs with regression or one-hot classification targets."""

    X: np.ndarray
    Y: np.ndarray
    classification: bool = False
    split: str = ""
    label_values: tuple | None = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.Y = np.asarray(self.Y, dtype=np.float64)
        if self.X.ndim != 2:
            raise ShapeError("X must be 2-D (rows are samples)")
        if self.Y.ndim == 1:
            self.Y = self.Y[:, None]
        if self.Y.shape[0] != self.X.shape[0]:
            raise ShapeError(f"{self.X.shape[0]} inputs vs {self.Y.shape[0]} targets")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.Y))):
            raise ValueError("dataset contains non-finite entries")
        if self.classification:
            if not np.allclose(self.Y.sum(axis=1), 1.0):
                raise ValueError("classification targets must be one-hot rows")

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def c(self) -> int:
        return self.Y.shape[1]

    @property
    def radius_estimate(self) -> float:
        """Largest input row norm; the default gate-offset sampling radius."""
        if self.m == 0:
            return 0.0
        return float(np.max(np.linalg.norm(self.X, axis=1)))


def gen_sine(m: int = SINE_DEFAULT_POINTS, seed: int = 0, split: str = "train") -> Dataset:
    """Uniform inputs on [-12*pi, 12*pi] with y = sin(x).

    Train and test splits draw from independent streams of the same seed,
    so generating one never perturbs the other.
    """
    if m < 1:
        raise ParameterError("m must be >= 1")
    rng = seeded_stream(seed, f"sine.{split}")
    x = rng.uniform(-SINE_HALF_WIDTH, SINE_HALF_WIDTH, size=(m, 1))
    return Dataset(X=x, Y=np.sin(x), split=split)


def one_hot(labels, label_values) -> np.ndarray:
    """Encode labels as one-hot rows following the order of ``label_values``."""
    index = {v: i for i, v in enumerate(label_values)}
    out = np.zeros((len(labels), len(label_values)))
    for row, lab in enumerate(labels):
        out[row, index[lab]] = 1.0
    return out


def load_libsvm(path, n_features: int | None = None,
                label_values=None, split: str = "") -> Dataset:
    """Parse sparse ``label index:value`` text with 1-based indices.

    Missing indices densify to zero.  Labels map to one-hot columns in
    sorted order of the distinct values; pass ``label_values`` (and
    ``n_features``) from the training split when loading a matching test
    split so both share an encoding.
    """
    labels = []
    rows = []
    max_index = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split()
            try:
                labels.append(float(fields[0]))
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: bad label {fields[0]!r}") from exc
            entries = {}
            for item in fields[1:]:
                try:
                    idx_text, val_text = item.split(":", 1)
                    idx = int(idx_text)
                    val = float(val_text)
                except ValueError as exc:
                    raise ParseError(f"{path}:{lineno}: bad entry {item!r}") from exc
                if idx < 1:
                    raise ParseError(f"{path}:{lineno}: indices are 1-based, got {idx}")
                entries[idx] = val
                max_index = max(max_index, idx)
            rows.append(entries)
    if not rows:
        raise ParseError(f"{path}: no data lines")
    d = n_features if n_features is not None else max_index
    if max_index > d:
        raise ParseError(f"{path}: feature index {max_index} exceeds n_features={d}")
    X = np.zeros((len(rows), d))
    for i, entries in enumerate(rows):
        for idx, val in entries.items():
            X[i, idx - 1] = val
    if label_values is None:
        label_values = tuple(sorted(set(labels)))
    Y = one_hot(labels, label_values)
    return Dataset(X=X, Y=Y, classification=True, split=split,
                   label_values=tuple(label_values))


def load_csv(path, target_column, classification: bool = False,
             split: str = "", label_values=None) -> Dataset:
    """Load a delimited numeric table with a header row.

    ``target_column`` picks the target by header name (or integer index);
    every other column becomes a feature.
    """
    with open(path) as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    if len(lines) < 2:
        raise ParseError(f"{path}: need a header row and at least one data row")
    header = [h.strip() for h in lines[0].split(",")]
    if isinstance(target_column, int):
        target_idx = target_column
        if not 0 <= target_idx < len(header):
            raise ParseError(f"{path}: target column index {target_idx} out of range")
    else:
        try:
            target_idx = header.index(target_column)
        except ValueError as exc:
            raise ParseError(f"{path}: no column named {target_column!r}") from exc
    features = []
    targets = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != len(header):
            raise ParseError(f"{path}:{lineno}: expected {len(header)} cells, got {len(cells)}")
        try:
            values = [float(c) for c in cells]
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: non-numeric cell") from exc
        targets.append(values[target_idx])
        features.append([v for i, v in enumerate(values) if i != target_idx])
    X = np.asarray(features)
    if classification:
        if label_values is None:
            label_values = tuple(sorted(set(targets)))
        Y = one_hot(targets, label_values)
        return Dataset(X=X, Y=Y, classification=True, split=split,
                       label_values=tuple(label_values))
    return Dataset(X=X, Y=np.asarray(targets), split=split)


def save_csv(dataset: Dataset, path) -> None:
    """Write ``x1..xd`` feature columns plus a ``y`` target column.

    Classification targets are written as their label value (argmax over
    the one-hot row), so a round trip through :func:`load_csv` recovers
    the dataset.
    """
    header = [f"x{j + 1}" for j in range(dataset.d)] + ["y"]
    if dataset.classification:
        values = [dataset.label_values[k] for k in np.argmax(dataset.Y, axis=1)]
    else:
        values = dataset.Y[:, 0]
    lines = [",".join(header)]
    for i in range(dataset.m):
        cells = [repr(float(v)) for v in dataset.X[i]] + [repr(float(values[i]))]
        lines.append(",".join(cells))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


@dataclass
class NormStats:
    mean: np.ndarray
    scale: np.ndarray


def normalize(dataset: Dataset, method: str = "standardize") -> tuple[Dataset, NormStats]:
    """Standardize features per column; zero-variance columns keep scale 1.

    Returns the transformed dataset plus the statistics, which
    :func:`apply_normalization` replays onto a held-out split.
    """
    if method == "none":
        stats = NormStats(mean=np.zeros(dataset.d), scale=np.ones(dataset.d))
        return dataset, stats
    if method != "standardize":
        raise ParameterError(f"unknown normalization method {method!r}")
    mean = dataset.X.mean(axis=0)
    scale = dataset.X.std(axis=0)
    scale = np.where(scale == 0, 1.0, scale)
    stats = NormStats(mean=mean, scale=scale)
    return apply_normalization(dataset, stats), stats


def apply_normalization(dataset: Dataset, stats: NormStats) -> Dataset:
    return replace(dataset, X=(dataset.X - stats.mean) / stats.scale)


def split_dataset(dataset: Dataset, train_fraction: float, seed: int = 0
                  ) -> tuple[Dataset, Dataset]:
    """Seeded shuffle followed by a head/tail split; rows are preserved."""
    if not 0 < train_fraction < 1:
        raise ParameterError("train_fraction must be in (0, 1)")
    rng = seeded_stream(seed, "split")
    order = rng.permutation(dataset.m)
    cut = int(round(dataset.m * train_fraction))
    cut = min(max(cut, 1), dataset.m - 1)
    head, tail = order[:cut], order[cut:]
    train = replace(dataset, X=dataset.X[head], Y=dataset.Y[head], split="train")
    test = replace(dataset, X=dataset.X[tail], Y=dataset.Y[tail], split="test")
    return train, test
