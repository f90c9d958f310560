"""Polynomial-kernel soft-margin SVM trained by sequential minimal optimization.

The dual problem

    min  0.5 a^T Q a - e^T a,   Q_ij = y_i y_j K(x_i, x_j)
    s.t. 0 <= a_i <= box_c,  sum_i a_i y_i = 0

is solved by repeatedly picking the maximal violating pair (first-order rule)
and moving it analytically along the equality constraint, clipped to the box.
The decision function is f(x) = sum_i a_i y_i K(x_i, x) + b over the stored
support vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .dataio import DataError, ExpressionMatrix

_BOUND_SNAP = 1e-12
_SV_EPS = 1e-10


@dataclass(frozen=True)
class KernelParams:
    degree: int = 3
    gamma: float | None = None  # None: 1 / (n_features * mean standardized variance)
    coef0: float = 1.0

    def __post_init__(self) -> None:
        if self.degree < 1:
            raise ValueError("degree must be >= 1")
        if self.gamma is not None and self.gamma <= 0:
            raise ValueError("gamma must be > 0 when given")


@dataclass(frozen=True)
class KsvmModel:
    support_vectors: np.ndarray  # standardized rows, restricted to feature_subset
    dual_coefs: np.ndarray
    sv_labels: np.ndarray
    bias: float
    kernel: KernelParams
    box_c: float
    mean: np.ndarray
    std: np.ndarray
    feature_subset: np.ndarray
    n_features_original: int
    classes: tuple[str, str]
    converged: bool


def kernel_eval(x: np.ndarray, z: np.ndarray, k: KernelParams) -> float:
    """(gamma * <x, z> + coef0) ** degree for two equal-length vectors."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.shape != z.shape or x.ndim != 1:
        raise DataError(f"kernel inputs must be equal-length vectors, got {x.shape} and {z.shape}")
    if k.gamma is None:
        raise ValueError("kernel gamma is unresolved; supply an explicit value")
    return float((k.gamma * float(x @ z) + k.coef0) ** k.degree)


def gram_matrix(X: np.ndarray, k: KernelParams) -> np.ndarray:
    """Pairwise kernel matrix of the rows of X; symmetric by construction."""
    X = np.asarray(X, dtype=float)
    if k.gamma is None:
        raise ValueError("kernel gamma is unresolved; supply an explicit value")
    return (k.gamma * (X @ X.T) + k.coef0) ** k.degree


def _cross_kernel(sv: np.ndarray, X: np.ndarray, k: KernelParams) -> np.ndarray:
    return (k.gamma * (X @ sv.T) + k.coef0) ** k.degree


def _resolve_gamma(k: KernelParams, A: np.ndarray) -> KernelParams:
    if k.gamma is not None:
        return k
    p = A.shape[1]
    mean_var = float(A.var(axis=0).mean()) if p else 1.0
    gamma = 1.0 / (p * mean_var) if p and mean_var > 0 else 1.0 / max(p, 1)
    return replace(k, gamma=gamma)


def _masks(alpha: np.ndarray, y: np.ndarray, box_c: float):
    at_upper = alpha >= box_c - _BOUND_SNAP
    at_lower = alpha <= _BOUND_SNAP
    pos = y > 0
    up_mask = (pos & ~at_upper) | (~pos & ~at_lower)
    low_mask = (~pos & ~at_upper) | (pos & ~at_lower)
    return up_mask, low_mask


def _smo(Q: np.ndarray, K: np.ndarray, y: np.ndarray, box_c: float, tol: float,
         max_iter: int) -> tuple[np.ndarray, np.ndarray, bool]:
    """Maximal-violating-pair SMO; returns (alpha, grad, converged)."""
    n = y.size
    alpha = np.zeros(n)
    grad = -np.ones(n)  # Q @ alpha - e at alpha = 0
    converged = False
    for _ in range(max_iter):
        up_mask, low_mask = _masks(alpha, y, box_c)
        yg = -y * grad
        if not up_mask.any() or not low_mask.any():
            converged = True
            break
        i = int(np.argmax(np.where(up_mask, yg, -np.inf)))
        j = int(np.argmin(np.where(low_mask, yg, np.inf)))
        if yg[i] - yg[j] <= tol:
            converged = True
            break
        kq = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if kq <= 0.0:
            kq = 1e-12
        # move along d = y_i e_i - y_j e_j, which keeps sum(alpha * y) fixed
        t = -(y[i] * grad[i] - y[j] * grad[j]) / kq
        lo_i, hi_i = ((-alpha[i], box_c - alpha[i]) if y[i] > 0
                      else (alpha[i] - box_c, alpha[i]))
        lo_j, hi_j = ((alpha[j] - box_c, alpha[j]) if y[j] > 0
                      else (-alpha[j], box_c - alpha[j]))
        t = min(max(t, max(lo_i, lo_j)), min(hi_i, hi_j))
        if t == 0.0:
            break  # numerically stuck; leave converged=False
        old_i, old_j = alpha[i], alpha[j]
        alpha[i] = old_i + y[i] * t
        alpha[j] = old_j - y[j] * t
        for idx in (i, j):
            if alpha[idx] < _BOUND_SNAP:
                alpha[idx] = 0.0
            elif alpha[idx] > box_c - _BOUND_SNAP:
                alpha[idx] = box_c
        grad += Q[:, i] * (alpha[i] - old_i) + Q[:, j] * (alpha[j] - old_j)
    return alpha, grad, converged


def fit_ksvm(
    X: ExpressionMatrix,
    kernel: KernelParams,
    box_c: float = 1.0,
    tol: float = 1e-3,
    max_passes: int = 100,
    classes: tuple[str, str] | None = None,
    feature_subset: np.ndarray | None = None,
    n_features_original: int | None = None,
) -> KsvmModel:
    """Train on a binary matrix whose columns are already the selected features.

    ``feature_subset`` records where those columns live in the original
    feature space so that prediction can accept full-width inputs; it
    defaults to the identity. Features are z-scored on this training input.
    Non-convergence within the pass budget is flagged, not raised.
    """
    if box_c <= 0:
        raise ValueError("box_c must be > 0")
    present = X.classes()
    if len(present) != 2:
        raise DataError(f"need exactly two classes to fit, got {present}")
    if classes is None:
        classes = (present[0], present[1])
    y = X.label_vector(classes)

    if feature_subset is None:
        feature_subset = np.arange(X.n_features)
    else:
        feature_subset = np.asarray(feature_subset, dtype=int)
        if feature_subset.size != X.n_features:
            raise DataError("feature_subset length must match the training columns")
    if n_features_original is None:
        n_features_original = X.n_features

    mean = X.values.mean(axis=0)
    std = X.values.std(axis=0)
    std = np.where(std == 0.0, 1.0, std)
    A = (X.values - mean[None, :]) / std[None, :]

    kernel = _resolve_gamma(kernel, A)
    K = gram_matrix(A, kernel)
    Q = (y[:, None] * y[None, :]) * K
    n = y.size
    max_iter = max(max_passes * n, 1000)
    alpha, grad, converged = _smo(Q, K, y, box_c, tol, max_iter)

    # bias from free support vectors; otherwise the midpoint of the
    # feasible interval [max yg over up-candidates, min yg over low-candidates]
    yg = -y * grad
    free = (alpha > _SV_EPS) & (alpha < box_c - _SV_EPS)
    if free.any():
        bias = float(yg[free].mean())
    else:
        up_mask, low_mask = _masks(alpha, y, box_c)
        lo = float(yg[up_mask].max()) if up_mask.any() else None
        hi = float(yg[low_mask].min()) if low_mask.any() else None
        if lo is not None and hi is not None:
            bias = 0.5 * (lo + hi)
        else:
            bias = lo if lo is not None else (hi if hi is not None else 0.0)

    sv = alpha > _SV_EPS
    return KsvmModel(
        support_vectors=A[sv],
        dual_coefs=alpha[sv],
        sv_labels=y[sv],
        bias=bias,
        kernel=kernel,
        box_c=box_c,
        mean=mean,
        std=std,
        feature_subset=feature_subset,
        n_features_original=n_features_original,
        classes=classes,
        converged=converged,
    )


def _decision_batch(model: KsvmModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.n_features_original:
        raise DataError(
            f"expected rows of length {model.n_features_original}, got shape {X.shape}"
        )
    sub = X[:, model.feature_subset]
    A = (sub - model.mean[None, :]) / model.std[None, :]
    if model.support_vectors.shape[0] == 0:
        return np.full(X.shape[0], model.bias)
    Kx = _cross_kernel(model.support_vectors, A, model.kernel)
    return Kx @ (model.dual_coefs * model.sv_labels) + model.bias


def decision_function(model: KsvmModel, x: np.ndarray) -> float:
    """f(x) for one full-width input row; the subset and scaling are applied here."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DataError("decision_function expects a single vector")
    return float(_decision_batch(model, x[None, :])[0])


def predict_ksvm(model: KsvmModel, X: ExpressionMatrix) -> list[str]:
    """Labels from the sign of f; a score of exactly 0 goes to the positive class."""
    scores = _decision_batch(model, X.values)
    neg, pos = model.classes
    return [pos if s >= 0.0 else neg for s in scores]


def dual_objective(model_alpha: np.ndarray, Q: np.ndarray) -> float:
    """0.5 a^T Q a - e^T a, the quantity SMO minimizes (oracle hook)."""
    a = np.asarray(model_alpha, dtype=float)
    return 0.5 * float(a @ Q @ a) - float(a.sum())


def ksvm_to_json(model: KsvmModel, feature_names: list[str] | None = None) -> dict:
    doc = {
        "format": "l1ksvm.ksvm_model",
        "version": 1,
        "support_vectors": model.support_vectors.tolist(),
        "dual_coefs": model.dual_coefs.tolist(),
        "sv_labels": model.sv_labels.tolist(),
        "bias": model.bias,
        "kernel": {
            "degree": model.kernel.degree,
            "gamma": model.kernel.gamma,
            "coef0": model.kernel.coef0,
        },
        "box_c": model.box_c,
        "mean": model.mean.tolist(),
        "std": model.std.tolist(),
        "feature_subset": model.feature_subset.tolist(),
        "n_features_original": model.n_features_original,
        "classes": list(model.classes),
        "converged": model.converged,
    }
    if feature_names is not None:
        doc["feature_names"] = list(feature_names)
    return doc


def ksvm_from_json(doc: dict) -> KsvmModel:
    if doc.get("format") != "l1ksvm.ksvm_model" or doc.get("version") != 1:
        raise ValueError("not a version-1 ksvm model document")
    return KsvmModel(
        support_vectors=np.asarray(doc["support_vectors"], dtype=float).reshape(
            len(doc["dual_coefs"]), -1
        )
        if doc["dual_coefs"]
        else np.empty((0, len(doc["mean"]))),
        dual_coefs=np.asarray(doc["dual_coefs"], dtype=float),
        sv_labels=np.asarray(doc["sv_labels"], dtype=float),
        bias=float(doc["bias"]),
        kernel=KernelParams(**doc["kernel"]),
        box_c=float(doc["box_c"]),
        mean=np.asarray(doc["mean"], dtype=float),
        std=np.asarray(doc["std"], dtype=float),
        feature_subset=np.asarray(doc["feature_subset"], dtype=int),
        n_features_original=int(doc["n_features_original"]),
        classes=(doc["classes"][0], doc["classes"][1]),
        converged=bool(doc["converged"]),
    )
