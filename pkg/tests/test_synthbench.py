import numpy as np
import pytest
from scipy import stats

from l1ksvm.synthbench import BenchmarkSpec, benchmark_truth, generate_benchmark

SMALL = BenchmarkSpec(
    n_classes=3, n_per_class=200, n_features=120, n_informative=12,
    effect_size=2.0, noise_std=1.0, seed=42,
)


def test_shapes_and_labels():
    m = generate_benchmark(SMALL)
    assert m.values.shape == (600, 120)
    assert m.class_counts() == {"A": 200, "B": 200, "C": 200}
    assert len(set(m.sample_ids)) == 600


def test_default_spec_matches_pool_dimensions():
    spec = BenchmarkSpec()
    assert spec.n_classes == 4
    assert spec.n_per_class == 500
    assert spec.n_features == 1184
    assert spec.n_informative == 30


def test_deterministic_given_seed():
    a = generate_benchmark(SMALL)
    b = generate_benchmark(SMALL)
    assert np.array_equal(a.values, b.values)
    assert a.sample_ids == b.sample_ids
    c = generate_benchmark(BenchmarkSpec(**{**SMALL.__dict__, "seed": 43}))
    assert not np.array_equal(a.values, c.values)


def test_no_signal_when_effect_zero():
    spec = BenchmarkSpec(**{**SMALL.__dict__, "effect_size": 0.0})
    truth = benchmark_truth(spec)
    assert np.all(truth.class_means == 0.0)
    m = generate_benchmark(spec)
    # classes share one distribution: global class means stay within noise
    for label in m.classes():
        block = m.values[m.class_indices(label)]
        assert np.abs(block.mean(axis=0)).max() < 5.0 / np.sqrt(spec.n_per_class)


def test_class_means_converge_to_assignment():
    spec = BenchmarkSpec(**{**SMALL.__dict__, "n_per_class": 800})
    truth = benchmark_truth(spec)
    m = generate_benchmark(spec)
    bound = 5.0 * spec.noise_std / np.sqrt(spec.n_per_class)
    for c, label in enumerate(truth.class_labels):
        block = m.values[m.class_indices(label)]
        observed = block[:, truth.informative_indices].mean(axis=0)
        assigned = truth.class_means[c, truth.informative_indices]
        assert np.abs(observed - assigned).max() < bound


def test_uninformative_t_test_calibration():
    spec = BenchmarkSpec(
        n_classes=2, n_per_class=500, n_features=600, n_informative=20,
        effect_size=1.5, noise_std=1.0, seed=7,
    )
    truth = benchmark_truth(spec)
    m = generate_benchmark(spec)
    null_cols = np.setdiff1d(np.arange(spec.n_features), truth.informative_indices)
    assert null_cols.size >= 500
    a = m.values[m.class_indices("A")][:, null_cols]
    b = m.values[m.class_indices("B")][:, null_cols]
    _, pvals = stats.ttest_ind(a, b, axis=0)
    rate = float((pvals < 0.05).mean())
    assert abs(rate - 0.05) <= 0.03


def test_sign_patterns_separate_class_pairs():
    truth = benchmark_truth(BenchmarkSpec(seed=3))
    means = truth.class_means[:, truth.informative_indices]
    n_inf = truth.informative_indices.size
    for i in range(means.shape[0]):
        for j in range(i + 1, means.shape[0]):
            differing = np.sum(np.sign(means[i]) != np.sign(means[j]))
            assert differing >= n_inf // 4  # ~n_inf/2 expected


def test_spec_validation():
    with pytest.raises(ValueError):
        BenchmarkSpec(n_informative=10, n_features=5)
    with pytest.raises(ValueError):
        BenchmarkSpec(noise_std=0.0)
    with pytest.raises(ValueError):
        BenchmarkSpec(effect_size=-1.0)
