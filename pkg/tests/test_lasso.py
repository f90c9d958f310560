import json

import numpy as np
import pytest

from l1ksvm.dataio import DataError
from l1ksvm.lasso import (
    LassoParams,
    check_optimality,
    fit_lasso,
    lasso_from_json,
    lasso_to_json,
    nonzero_features,
    objective_value,
    predict_lasso,
    smooth_gradient,
)

from conftest import make_matrix, separable_matrix
from oracles import central_diff_gradient, golden_section_minimize


def _random_instance(rng, n=24, p=8, gap=1.0):
    half = n // 2
    X = np.vstack([rng.normal(-gap / 2, 1, (half, p)), rng.normal(gap / 2, 1, (n - half, p))])
    return make_matrix(X, ["a"] * half + ["b"] * (n - half))


class TestFitBasics:
    def test_penalty_dominates_as_c_vanishes(self, toy_binary):
        model = fit_lasso(toy_binary, LassoParams(inverse_reg_c=1e-9))
        assert np.all(model.weights == 0.0)
        assert abs(model.intercept) < 1e-9
        assert model.converged

    def test_single_class_rejected(self):
        m = make_matrix(np.random.default_rng(0).normal(size=(6, 3)), ["a"] * 6)
        with pytest.raises(DataError, match="two classes"):
            fit_lasso(m, LassoParams())

    def test_non_finite_rejected(self):
        vals = np.ones((4, 2))
        vals[1, 1] = np.nan
        m = make_matrix(vals, ["a", "a", "b", "b"])
        with pytest.raises(DataError, match="non-finite"):
            fit_lasso(m, LassoParams())

    def test_zero_variance_feature_gets_zero_weight(self):
        rng = np.random.default_rng(4)
        vals = np.column_stack([np.full(30, 3.0), rng.normal(size=30) + np.repeat([0, 2], 15)])
        m = make_matrix(vals, ["a"] * 15 + ["b"] * 15)
        model = fit_lasso(m, LassoParams(inverse_reg_c=1.0))
        assert model.weights[0] == 0.0
        assert model.std[0] == 1.0

    def test_returned_model_passes_certificate(self, toy_binary):
        model = fit_lasso(toy_binary, LassoParams(inverse_reg_c=0.5))
        y = toy_binary.label_vector(model.classes)
        cert = check_optimality(model, toy_binary.values, y, 1e-4)
        assert cert.ok

    def test_objective_monotone_descent(self, toy_binary):
        model = fit_lasso(toy_binary, LassoParams(inverse_reg_c=2.0))
        hist = model.objective_history
        assert hist.size >= 2
        diffs = np.diff(hist)
        assert np.all(diffs <= 1e-10 * (1.0 + np.abs(hist[:-1])))


class TestOneDimensionalOracle:
    def test_matches_golden_section(self):
        # two points x = -1, +1 with labels -, +: standardized features equal the
        # raw ones, so the fitted weight must minimize |w| + 20 log(1 + e^-w)
        m = make_matrix([[-1.0], [1.0]], ["neg", "pos"])
        model = fit_lasso(m, LassoParams(inverse_reg_c=10.0, tolerance=1e-12,
                                         max_iters=100000))
        objective = lambda w: abs(w) + 10.0 * 2.0 * np.log1p(np.exp(-w))
        w_star = golden_section_minimize(objective, 0.0, 30.0, tol=1e-10)
        assert abs(model.weights[0] - w_star) < 1e-6
        assert abs(model.intercept) < 1e-9
        # training points classified correctly
        assert predict_lasso(model, m) == ["neg", "pos"]


class TestGradientOracle:
    def test_matches_central_differences(self):
        rng = np.random.default_rng(12)
        m = _random_instance(rng, n=20, p=6)
        model = fit_lasso(m, LassoParams(inverse_reg_c=0.7))
        y = m.label_vector(model.classes)
        point_w = model.weights + rng.normal(scale=0.05, size=model.weights.size)
        point_b = model.intercept + 0.03

        g_w, g_b = smooth_gradient(model, m.values, y, point_w, point_b)

        def smooth_only(vec):
            w, b = vec[:-1], vec[-1]
            return objective_value(model, m.values, y, w, b) - np.abs(w).sum()

        numeric = central_diff_gradient(smooth_only, np.append(point_w, point_b))
        analytic = np.append(g_w, g_b)
        rel = np.abs(numeric - analytic) / (1.0 + np.abs(analytic))
        assert rel.max() < 1e-6


class TestCertificate:
    def test_random_instances_certified(self):
        rng = np.random.default_rng(99)
        for k in range(10):
            m = _random_instance(rng, n=18 + k, p=5)
            model = fit_lasso(m, LassoParams(inverse_reg_c=0.3 + 0.2 * k))
            y = m.label_vector(model.classes)
            cert = check_optimality(model, m.values, y, 1e-4)
            assert cert.ok, f"instance {k}: violation {cert.max_violation}"

    def test_perturbation_breaks_stationarity(self, toy_binary):
        model = fit_lasso(toy_binary, LassoParams(inverse_reg_c=1.0))
        nz = nonzero_features(model)
        assert nz.size > 0
        bad = model.weights.copy()
        bad[nz[0]] += 0.1
        perturbed = lasso_from_json({**lasso_to_json(model), "weights": bad.tolist()})
        y = toy_binary.label_vector(model.classes)
        cert = check_optimality(perturbed, toy_binary.values, y, 1e-4)
        assert not cert.ok
        assert cert.max_violation > 1e-4


class TestPredict:
    def test_constant_positive_classifier(self, toy_binary):
        model = fit_lasso(toy_binary, LassoParams(inverse_reg_c=1e-9))
        doc = lasso_to_json(model)
        doc["intercept"] = 0.7
        constant = lasso_from_json(doc)
        assert set(predict_lasso(constant, toy_binary)) == {"b"}

    def test_row_permutation_equivariance(self, toy_binary):
        model = fit_lasso(toy_binary, LassoParams(inverse_reg_c=0.5))
        perm = np.random.default_rng(1).permutation(toy_binary.n_samples)
        shuffled = toy_binary.select_samples(perm)
        base = predict_lasso(model, toy_binary)
        assert predict_lasso(model, shuffled) == [base[i] for i in perm]

    def test_feature_mismatch(self, toy_binary):
        model = fit_lasso(toy_binary, LassoParams())
        with pytest.raises(DataError, match="mismatch"):
            predict_lasso(model, toy_binary.select_features([0, 1]))


class TestNonzeroFeatures:
    def test_all_zero_model(self, toy_binary):
        model = fit_lasso(toy_binary, LassoParams(inverse_reg_c=1e-9))
        assert nonzero_features(model).size == 0

    def test_matches_definition(self, toy_binary):
        model = fit_lasso(toy_binary, LassoParams(inverse_reg_c=1.0))
        doc = lasso_to_json(model)
        doc["weights"] = [0.0, -0.3, 0.0, 1.2]
        crafted = lasso_from_json(doc)
        assert nonzero_features(crafted).tolist() == [1, 3]

    def test_sparsity_monotone_in_c(self):
        m = separable_matrix(n_per_class=25, p=10, gap=1.0, seed=5)
        sizes = []
        for c in (3.0, 1.0, 0.3, 0.1, 0.03):
            model = fit_lasso(m, LassoParams(inverse_reg_c=c))
            sizes.append(nonzero_features(model).size)
        assert all(a >= b for a, b in zip(sizes, sizes[1:]))


class TestInvariances:
    def test_standardization_absorbs_feature_scale(self):
        train = separable_matrix(n_per_class=20, p=5, seed=31)
        probe = separable_matrix(n_per_class=10, p=5, seed=32)
        scaled_train = make_matrix(train.values * [1.0, 50.0, 1.0, 0.02, 1.0],
                                   train.labels)
        scaled_probe = make_matrix(probe.values * [1.0, 50.0, 1.0, 0.02, 1.0],
                                   probe.labels)
        params = LassoParams(inverse_reg_c=0.8)
        base = fit_lasso(train, params)
        scaled = fit_lasso(scaled_train, params)
        assert predict_lasso(base, probe) == predict_lasso(scaled, scaled_probe)

    def test_label_flip_antisymmetry(self, toy_binary):
        params = LassoParams(inverse_reg_c=0.8, tolerance=1e-9)
        fwd = fit_lasso(toy_binary, params, classes=("a", "b"))
        rev = fit_lasso(toy_binary, params, classes=("b", "a"))
        np.testing.assert_allclose(fwd.weights, -rev.weights, atol=2e-4)
        assert abs(fwd.intercept + rev.intercept) < 2e-4


def test_json_roundtrip(toy_binary):
    model = fit_lasso(toy_binary, LassoParams(inverse_reg_c=0.5))
    doc = json.loads(json.dumps(lasso_to_json(model)))
    back = lasso_from_json(doc)
    np.testing.assert_array_equal(back.weights, model.weights)
    assert back.classes == model.classes
    assert predict_lasso(back, toy_binary) == predict_lasso(model, toy_binary)


def test_params_validation():
    with pytest.raises(ValueError):
        LassoParams(inverse_reg_c=0.0)
    with pytest.raises(ValueError):
        LassoParams(tolerance=-1.0)
