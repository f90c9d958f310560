import numpy as np
import pytest

from l1ksvm.dataio import ExpressionMatrix


def make_matrix(values, labels, feature_names=None, sample_ids=None) -> ExpressionMatrix:
    values = np.asarray(values, dtype=float)
    n, p = values.shape
    return ExpressionMatrix(
        values=values,
        feature_names=feature_names or [f"g{j}" for j in range(p)],
        sample_ids=sample_ids or [f"s{i}" for i in range(n)],
        labels=list(labels),
    )


def separable_matrix(n_per_class=15, p=4, gap=1.6, seed=0) -> ExpressionMatrix:
    """Two Gaussian blobs 'a' (mean -gap/2) and 'b' (mean +gap/2)."""
    rng = np.random.default_rng(seed)
    lo = rng.normal(-gap / 2, 1.0, (n_per_class, p))
    hi = rng.normal(gap / 2, 1.0, (n_per_class, p))
    return make_matrix(np.vstack([lo, hi]), ["a"] * n_per_class + ["b"] * n_per_class)


@pytest.fixture
def toy_binary() -> ExpressionMatrix:
    return separable_matrix()
