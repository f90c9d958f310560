"""Expression-table loading, filtering, balancing and train/test splitting.

The canonical on-disk format is CSV with header ``sample_id,label,<feature_1>,
...,<feature_p>``, UTF-8, "." decimal separator. ``load_expression_table`` also
accepts arbitrary column orders as long as an id column and a label column are
present; everything else is treated as a numeric feature. Cells that are empty
or non-numeric are kept as NaN markers so that ``filter_features`` can drop the
offending columns later.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .seeds import make_rng


class DataError(ValueError):
    """Raised for malformed tables and violated data preconditions."""


_MISSING_TOKENS = {"", "na", "n/a", "nan", "null", "none"}


def _parse_cell(token: str) -> float:
    token = token.strip()
    if token.lower() in _MISSING_TOKENS:
        return math.nan
    try:
        return float(token)
    except ValueError:
        return math.nan


@dataclass(frozen=True)
class ExpressionMatrix:
    """Dense samples-by-features table with names and per-sample labels.

    Immutable after construction; the value buffer is marked read-only so
    instances can be shared freely across threads and worker processes.
    """

    values: np.ndarray
    feature_names: tuple[str, ...]
    sample_ids: tuple[str, ...]
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise DataError(f"expected a 2-D value array, got ndim={values.ndim}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "sample_ids", tuple(self.sample_ids))
        object.__setattr__(self, "labels", tuple(self.labels))
        n, p = values.shape
        if len(self.sample_ids) != n or len(self.labels) != n:
            raise DataError(
                f"row mismatch: {n} value rows, {len(self.sample_ids)} sample ids, "
                f"{len(self.labels)} labels"
            )
        if len(self.feature_names) != p:
            raise DataError(
                f"column mismatch: {p} value columns, {len(self.feature_names)} feature names"
            )
        dup = _first_duplicate(self.feature_names)
        if dup is not None:
            raise DataError(f"duplicate feature name {dup!r}")
        dup = _first_duplicate(self.sample_ids)
        if dup is not None:
            raise DataError(f"duplicate sample id {dup!r}")
        values.flags.writeable = False

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    def classes(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.labels)))

    def class_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for lab in self.labels:
            counts[lab] = counts.get(lab, 0) + 1
        return counts

    def class_indices(self, label: str) -> np.ndarray:
        idx = np.array([i for i, lab in enumerate(self.labels) if lab == label], dtype=int)
        if idx.size == 0:
            raise DataError(f"class {label!r} not present")
        return idx

    def select_samples(self, indices: Sequence[int] | np.ndarray) -> "ExpressionMatrix":
        idx = np.asarray(indices, dtype=int)
        return ExpressionMatrix(
            values=self.values[idx],
            feature_names=self.feature_names,
            sample_ids=tuple(self.sample_ids[i] for i in idx),
            labels=tuple(self.labels[i] for i in idx),
        )

    def select_features(self, indices: Sequence[int] | np.ndarray) -> "ExpressionMatrix":
        idx = np.asarray(indices, dtype=int)
        return ExpressionMatrix(
            values=self.values[:, idx],
            feature_names=tuple(self.feature_names[j] for j in idx),
            sample_ids=self.sample_ids,
            labels=self.labels,
        )

    def label_vector(self, classes: tuple[str, str]) -> np.ndarray:
        """Map labels to y in {-1, +1}; classes[1] is the positive class."""
        neg, pos = classes
        y = np.empty(self.n_samples)
        for i, lab in enumerate(self.labels):
            if lab == pos:
                y[i] = 1.0
            elif lab == neg:
                y[i] = -1.0
            else:
                raise DataError(f"label {lab!r} outside classes {classes}")
        return y

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.values).all())


def _first_duplicate(items: Iterable[str]) -> str | None:
    seen: set[str] = set()
    for item in items:
        if item in seen:
            return item
        seen.add(item)
    return None


def concat_samples(first: ExpressionMatrix, second: ExpressionMatrix) -> ExpressionMatrix:
    """Stack two matrices with identical feature columns (train + synthetic)."""
    if first.feature_names != second.feature_names:
        raise DataError("cannot concatenate matrices with different feature columns")
    return ExpressionMatrix(
        values=np.vstack([first.values, second.values]),
        feature_names=first.feature_names,
        sample_ids=first.sample_ids + second.sample_ids,
        labels=first.labels + second.labels,
    )


def _delimiter_for(path: Path, fmt: str | None) -> str:
    if fmt is None:
        fmt = "tsv" if path.suffix.lower() in {".tsv", ".tab"} else "csv"
    if fmt not in {"csv", "tsv"}:
        raise DataError(f"unsupported format {fmt!r} (expected 'csv' or 'tsv')")
    return "\t" if fmt == "tsv" else ","


def load_expression_table(
    path: str | Path,
    fmt: str | None = None,
    label_column: str = "label",
    id_column: str = "sample_id",
) -> ExpressionMatrix:
    """Read a delimited expression table into an ExpressionMatrix.

    The first row must be a header. The ``label_column`` is required; the
    ``id_column`` is used when present, otherwise sequential sample ids are
    generated. Empty or non-numeric cells become NaN markers. Structural
    problems (duplicate feature names, ragged rows) raise DataError naming
    the offending line.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    delim = _delimiter_for(path, fmt)

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delim)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if any(h == "" for h in header):
            raise DataError(f"{path}, line 1: blank column name in header")
        if label_column not in header:
            raise DataError(f"{path}, line 1: missing label column {label_column!r}")
        label_pos = header.index(label_column)
        id_pos = header.index(id_column) if id_column in header else None
        feature_pos = [
            k for k in range(len(header)) if k != label_pos and k != id_pos
        ]
        feature_names = [header[k] for k in feature_pos]
        dup = _first_duplicate(feature_names)
        if dup is not None:
            raise DataError(f"{path}, line 1: duplicate feature name {dup!r}")

        rows: list[list[float]] = []
        labels: list[str] = []
        sample_ids: list[str] = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataError(
                    f"{path}, line {lineno}: expected {len(header)} fields, got {len(row)}"
                )
            labels.append(row[label_pos].strip())
            if id_pos is not None:
                sample_ids.append(row[id_pos].strip())
            else:
                sample_ids.append(f"s{lineno - 1:06d}")
            rows.append([_parse_cell(row[k]) for k in feature_pos])

    if not rows:
        raise DataError(f"{path}: no data rows")
    return ExpressionMatrix(
        values=np.array(rows, dtype=float),
        feature_names=tuple(feature_names),
        sample_ids=tuple(sample_ids),
        labels=tuple(labels),
    )


def write_expression_table(m: ExpressionMatrix, path: str | Path, fmt: str | None = None) -> None:
    """Write the canonical ``sample_id,label,<features>`` table."""
    path = Path(path)
    delim = _delimiter_for(path, fmt)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter=delim, lineterminator="\n")
        writer.writerow(["sample_id", "label", *m.feature_names])
        for i in range(m.n_samples):
            cells = ["" if math.isnan(v) else repr(float(v)) for v in m.values[i]]
            writer.writerow([m.sample_ids[i], m.labels[i], *cells])


def filter_features(m: ExpressionMatrix, required_prefix: str) -> ExpressionMatrix:
    """Keep columns whose name starts with the prefix and that are fully finite.

    Idempotent; column order is preserved. Raises DataError when nothing
    survives.
    """
    finite_cols = np.isfinite(m.values).all(axis=0)
    keep = [
        j
        for j, name in enumerate(m.feature_names)
        if name.startswith(required_prefix) and finite_cols[j]
    ]
    if not keep:
        raise DataError(
            f"no features left after filtering (prefix {required_prefix!r}, "
            f"{m.n_features} candidates)"
        )
    return m.select_features(keep)


def balance_classes(m: ExpressionMatrix, n_per_class: int, seed: int) -> ExpressionMatrix:
    """Uniform subsample without replacement to exactly n_per_class per class.

    Deterministic given the seed; the relative sample order of the input is
    preserved in the output.
    """
    counts = m.class_counts()
    for label in sorted(counts):
        if counts[label] < n_per_class:
            raise DataError(
                f"class {label!r} has {counts[label]} samples, need {n_per_class}"
            )
    rng = make_rng(seed)
    chosen: list[np.ndarray] = []
    for label in sorted(counts):
        idx = m.class_indices(label)
        chosen.append(rng.choice(idx, size=n_per_class, replace=False))
    order = np.sort(np.concatenate(chosen))
    return m.select_samples(order)


def make_scenario(m: ExpressionMatrix, class_a: str, class_b: str) -> ExpressionMatrix:
    """Restrict to the two scenario classes."""
    if class_a == class_b:
        raise DataError(f"degenerate scenario: {class_a!r} vs itself")
    present = set(m.labels)
    for label in (class_a, class_b):
        if label not in present:
            raise DataError(f"unknown class label {label!r}")
    idx = [i for i, lab in enumerate(m.labels) if lab in (class_a, class_b)]
    return m.select_samples(idx)


@dataclass(frozen=True)
class ScenarioSplit:
    """Stratified train/test partition of one binary scenario."""

    train: ExpressionMatrix
    test: ExpressionMatrix
    class_a: str
    class_b: str
    n_train_per_class: int

    @property
    def classes(self) -> tuple[str, str]:
        return (self.class_a, self.class_b)


def split_train_test(
    m: ExpressionMatrix,
    n_train_per_class: int,
    seed: int,
    classes: tuple[str, str] | None = None,
) -> ScenarioSplit:
    """Stratified random split: exactly n_train_per_class per class in train.

    The complement forms the test set, so both sides partition the pool.
    ``classes`` fixes the (class_a, class_b) order used for positive-class
    bookkeeping downstream; defaults to sorted label order.
    """
    labels = m.classes()
    if len(labels) != 2:
        raise DataError(f"expected a binary scenario, got classes {labels}")
    if classes is None:
        classes = (labels[0], labels[1])
    elif set(classes) != set(labels):
        raise DataError(f"classes {classes} do not match matrix labels {labels}")
    counts = m.class_counts()
    for label in classes:
        if counts[label] <= n_train_per_class:
            raise DataError(
                f"class {label!r} has {counts[label]} samples; "
                f"need more than {n_train_per_class} to keep the test set non-empty"
            )
    rng = make_rng(seed)
    train_parts = []
    for label in sorted(classes):
        idx = m.class_indices(label)
        train_parts.append(rng.choice(idx, size=n_train_per_class, replace=False))
    train_idx = np.sort(np.concatenate(train_parts))
    mask = np.zeros(m.n_samples, dtype=bool)
    mask[train_idx] = True
    test_idx = np.flatnonzero(~mask)
    return ScenarioSplit(
        train=m.select_samples(train_idx),
        test=m.select_samples(test_idx),
        class_a=classes[0],
        class_b=classes[1],
        n_train_per_class=n_train_per_class,
    )
