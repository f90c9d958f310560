"""Gaussian-noise augmentation that preserves class-conditional statistics.

Synthetic samples are real rows resampled with replacement within their
class, perturbed per feature by independent zero-mean Gaussian noise whose
standard deviation is a fixed fraction of that feature's within-class
standard deviation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataio import DataError, ExpressionMatrix
from .seeds import make_rng


@dataclass(frozen=True)
class AugmentationParams:
    n_synthetic_per_class: int = 200
    noise_fraction: float = 0.10

    def __post_init__(self) -> None:
        if self.n_synthetic_per_class < 0:
            raise ValueError("n_synthetic_per_class must be >= 0")
        if not (0.0 < self.noise_fraction <= 1.0):
            raise ValueError("noise_fraction must be in (0, 1]")


def class_feature_std(train: ExpressionMatrix, class_label: str) -> np.ndarray:
    """Per-feature sample standard deviation (n-1 denominator) within a class.

    A single-sample class yields the zero vector; a constant feature yields 0
    for that feature.
    """
    idx = train.class_indices(class_label)
    block = train.values[idx]
    if block.shape[0] < 2:
        return np.zeros(train.n_features)
    return np.std(block, axis=0, ddof=1)


def generate_synthetic(
    train: ExpressionMatrix, params: AugmentationParams, seed: int
) -> ExpressionMatrix:
    """Draw noisy resampled rows per class; deterministic given the seed.

    Classes are processed in sorted label order; each synthetic row keeps
    the label of its base row and gets a fresh ``syn-`` sample id.
    """
    classes = train.classes()
    if not classes:
        raise DataError("training set is empty")
    rng = make_rng(seed)
    n_syn = params.n_synthetic_per_class
    blocks: list[np.ndarray] = []
    labels: list[str] = []
    sample_ids: list[str] = []
    for label in classes:
        idx = train.class_indices(label)
        sigma = class_feature_std(train, label)
        base_rows = rng.integers(0, idx.size, size=n_syn)
        noise = rng.standard_normal((n_syn, train.n_features))
        block = train.values[idx[base_rows]] + params.noise_fraction * sigma[None, :] * noise
        blocks.append(block)
        labels.extend([label] * n_syn)
        sample_ids.extend(f"syn-{label}-{k:05d}" for k in range(n_syn))
    values = (
        np.vstack(blocks) if blocks and n_syn > 0 else np.empty((0, train.n_features))
    )
    return ExpressionMatrix(
        values=values,
        feature_names=train.feature_names,
        sample_ids=tuple(sample_ids),
        labels=tuple(labels),
    )
