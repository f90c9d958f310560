"""L1-regularized logistic regression with exact-zero sparsity.

Objective, over z-scored features x with unpenalized intercept b:

    J(w, b) = ||w||_1 + c * sum_i log(1 + exp(-y_i (w . x_i + b)))

where c is the inverse regularization strength (small c = strong sparsity).
Solved by proximal gradient (FISTA with a monotone safeguard and backtracking)
on an actively managed working set of columns; coordinates are zeroed exactly
by the soft-threshold step. First-order optimality is certified against the
subgradient conditions by ``check_optimality``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .dataio import DataError, ExpressionMatrix

CERT_TOL = 1e-4
_MAX_OUTER = 100


@dataclass(frozen=True)
class LassoParams:
    inverse_reg_c: float = 0.01
    max_iters: int = 3000
    tolerance: float = 1e-6
    fit_intercept: bool = True

    def __post_init__(self) -> None:
        if self.inverse_reg_c <= 0:
            raise ValueError("inverse_reg_c must be > 0")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass(frozen=True)
class LassoModel:
    weights: np.ndarray
    intercept: float
    params: LassoParams
    mean: np.ndarray
    std: np.ndarray
    classes: tuple[str, str]
    converged: bool
    n_iters: int
    objective_history: np.ndarray = field(repr=False, default=None)

    def standardize(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean[None, :]) / self.std[None, :]

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        return self.standardize(X) @ self.weights + self.intercept


@dataclass(frozen=True)
class OptimalityCertificate:
    ok: bool
    max_violation: float


def _sigmoid(u: np.ndarray) -> np.ndarray:
    out = np.empty_like(u)
    pos = u >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-u[pos]))
    eu = np.exp(u[~pos])
    out[~pos] = eu / (1.0 + eu)
    return out


def _soft_threshold(v: np.ndarray, t: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def _smooth_value(margins: np.ndarray, c: float) -> float:
    return c * float(np.logaddexp(0.0, -margins).sum())


def _smooth_grad(A: np.ndarray, y: np.ndarray, w: np.ndarray, b: float, c: float):
    """Gradient of the smooth part at (w, b) plus the value, one pass."""
    z = A @ w + b
    margins = y * z
    s = _sigmoid(-margins)
    r = c * (-y * s)
    return A.T @ r, float(r.sum()), _smooth_value(margins, c)


def _sq_spectral_norm(A: np.ndarray, with_intercept: bool) -> float:
    """lambda_max of B^T B for B = [A, 1] via power iteration."""
    n = A.shape[0]
    p = A.shape[1] + (1 if with_intercept else 0)
    if p == 0:
        return 1.0
    v = np.ones(p) / np.sqrt(p)
    lam = 1.0
    for _ in range(40):
        if with_intercept:
            u = A @ v[:-1] + v[-1]
            v_new = np.concatenate([A.T @ u, [u.sum()]])
        else:
            u = A @ v
            v_new = A.T @ u
        lam_new = float(np.linalg.norm(v_new))
        if lam_new == 0.0:
            return float(n)
        v = v_new / lam_new
        if abs(lam_new - lam) <= 1e-10 * lam_new:
            lam = lam_new
            break
        lam = lam_new
    return lam


def _restricted_violation(g: np.ndarray, g_b: float, w: np.ndarray, intercept: bool) -> float:
    zero = w == 0.0
    viol = 0.0
    if zero.any():
        viol = max(viol, float(np.max(np.abs(g[zero])) - 1.0))
    if (~zero).any():
        viol = max(viol, float(np.max(np.abs(g[~zero] + np.sign(w[~zero])))))
    if intercept:
        viol = max(viol, abs(g_b))
    return max(viol, 0.0)


def _fista(
    A: np.ndarray,
    y: np.ndarray,
    c: float,
    w0: np.ndarray,
    b0: float,
    fit_intercept: bool,
    tolerance: float,
    max_iters: int,
    inner_cert_tol: float,
    history: list[float],
):
    """Monotone FISTA on one column subset; returns (w, b, iters_used)."""
    w = w0.copy()
    b = b0
    _, _, f_cur = _smooth_grad(A, y, w, b, c)
    obj = f_cur + float(np.abs(w).sum())
    history.append(obj)

    step = 1.0 / max(0.25 * c * _sq_spectral_norm(A, fit_intercept) * 1.01, 1e-12)
    vw, vb = w.copy(), b
    t_mom = 1.0
    iters = 0
    since_check = 0
    while iters < max_iters:
        iters += 1
        gw, gb, f_v = _smooth_grad(A, y, vw, vb, c)
        while True:
            cand_w = _soft_threshold(vw - step * gw, step)
            cand_b = vb - step * gb if fit_intercept else b0
            dw = cand_w - vw
            db = cand_b - vb
            zc = A @ cand_w + cand_b
            f_cand = _smooth_value(y * zc, c)
            quad = f_v + float(gw @ dw) + gb * db + (float(dw @ dw) + db * db) / (2.0 * step)
            if f_cand <= quad + 1e-12 * (1.0 + abs(f_v)):
                break
            step *= 0.5
        obj_cand = f_cand + float(np.abs(cand_w).sum())
        if obj_cand <= obj + 1e-12 * (1.0 + abs(obj)):
            delta = max(
                float(np.max(np.abs(cand_w - w))) if w.size else 0.0, abs(cand_b - b)
            )
            w_prev = w
            w, b, obj = cand_w, cand_b, obj_cand
            history.append(obj)
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_mom * t_mom))
            vw = w + ((t_mom - 1.0) / t_next) * (w - w_prev)
            vb = b
            t_mom = t_next
            since_check += 1
            if delta < tolerance or since_check >= 10:
                since_check = 0
                g, g_b, _ = _smooth_grad(A, y, w, b, c)
                if _restricted_violation(g, g_b, w, fit_intercept) <= inner_cert_tol:
                    break
                if delta < tolerance:
                    break
        else:
            # extrapolation overshot: restart momentum from the iterate
            vw, vb = w.copy(), b
            t_mom = 1.0
    return w, b, iters


def fit_lasso(
    X: ExpressionMatrix, params: LassoParams, classes: tuple[str, str] | None = None
) -> LassoModel:
    """Fit the sparse logistic model on a binary ExpressionMatrix.

    Labels are mapped to y = -1 (classes[0]) and y = +1 (classes[1]);
    ``classes`` defaults to sorted label order. Features are z-scored with
    training statistics inside the fit; zero-variance columns get substitute
    std 1 and end at weight exactly 0. Non-convergence within the iteration
    budget is flagged on the model, not raised.
    """
    if not X.is_finite():
        raise DataError("training matrix contains non-finite values")
    present = X.classes()
    if len(present) != 2:
        raise DataError(f"need exactly two classes to fit, got {present}")
    if classes is None:
        classes = (present[0], present[1])
    y = X.label_vector(classes)

    mean = X.values.mean(axis=0)
    std = X.values.std(axis=0)
    std = np.where(std == 0.0, 1.0, std)
    A_full = (X.values - mean[None, :]) / std[None, :]

    c = params.inverse_reg_c
    p = X.n_features
    w = np.zeros(p)
    b = 0.0
    history: list[float] = []
    total_iters = 0
    converged = False
    prev_violation = np.inf
    prev_work: np.ndarray | None = None
    for _ in range(_MAX_OUTER):
        g_full, g_b, _ = _smooth_grad(A_full, y, w, b, c)
        violation = _restricted_violation(g_full, g_b, w, params.fit_intercept)
        if violation <= CERT_TOL:
            converged = True
            break
        if total_iters >= params.max_iters:
            break
        nonzero = np.flatnonzero(w != 0.0)
        entering = np.flatnonzero(np.abs(g_full) > 1.0 + 0.5 * CERT_TOL)
        work = np.union1d(nonzero, entering)
        inner_cert_tol = min(0.5 * CERT_TOL, max(100.0 * params.tolerance, 1e-12))
        if (
            prev_work is not None
            and work.size == prev_work.size
            and np.array_equal(work, prev_work)
            and violation >= prev_violation * (1.0 - 1e-3)
        ):
            break  # stalled on the weight-change rule without certificate progress
        prev_violation = violation
        prev_work = work
        w_sub, b, used = _fista(
            A_full[:, work] if work.size else np.empty((X.n_samples, 0)),
            y,
            c,
            w[work],
            b,
            params.fit_intercept,
            params.tolerance,
            params.max_iters - total_iters,
            inner_cert_tol,
            history,
        )
        total_iters += used
        w = np.zeros(p)
        w[work] = w_sub

    return LassoModel(
        weights=w,
        intercept=b,
        params=params,
        mean=mean,
        std=std,
        classes=classes,
        converged=converged,
        n_iters=total_iters,
        objective_history=np.array(history),
    )


def predict_lasso(model: LassoModel, X: ExpressionMatrix) -> list[str]:
    """Label predictions; a score of exactly 0 resolves to the positive class."""
    if X.n_features != model.weights.size:
        raise DataError(
            f"feature count mismatch: model has {model.weights.size}, data has {X.n_features}"
        )
    scores = model.decision_scores(X.values)
    neg, pos = model.classes
    return [pos if s >= 0.0 else neg for s in scores]


def nonzero_features(model: LassoModel) -> np.ndarray:
    """Indices with weight exactly nonzero (the solver produces exact zeros)."""
    return np.flatnonzero(model.weights != 0.0)


def check_optimality(
    model: LassoModel, X: np.ndarray | ExpressionMatrix, y: np.ndarray, tol: float
) -> OptimalityCertificate:
    """First-order subgradient certificate at (w, b) on raw-feature data.

    With g the gradient of the smooth part over the model's standardized
    features: |g_j| <= 1 + tol where w_j = 0, |g_j + sign(w_j)| <= tol where
    w_j != 0, and |g_b| <= tol for a fitted intercept.
    """
    raw = X.values if isinstance(X, ExpressionMatrix) else np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    A = model.standardize(raw)
    g, g_b, _ = _smooth_grad(A, y, model.weights, model.intercept, model.params.inverse_reg_c)
    violation = _restricted_violation(g, g_b, model.weights, model.params.fit_intercept)
    return OptimalityCertificate(ok=violation <= tol, max_violation=violation)


def smooth_gradient(
    model: LassoModel, X: np.ndarray, y: np.ndarray, weights: np.ndarray, intercept: float
) -> tuple[np.ndarray, float]:
    """Gradient of the smooth loss term at an arbitrary point (oracle hook)."""
    A = model.standardize(np.asarray(X, dtype=float))
    g, g_b, _ = _smooth_grad(A, np.asarray(y, dtype=float), weights, intercept,
                             model.params.inverse_reg_c)
    return g, g_b


def objective_value(
    model: LassoModel, X: np.ndarray, y: np.ndarray, weights: np.ndarray, intercept: float
) -> float:
    """Full objective J at an arbitrary point in the model's standardized space."""
    A = model.standardize(np.asarray(X, dtype=float))
    margins = np.asarray(y, dtype=float) * (A @ weights + intercept)
    return float(np.abs(weights).sum()) + _smooth_value(margins, model.params.inverse_reg_c)


def lasso_to_json(model: LassoModel) -> dict:
    return {
        "format": "l1ksvm.lasso_model",
        "version": 1,
        "weights": model.weights.tolist(),
        "intercept": model.intercept,
        "mean": model.mean.tolist(),
        "std": model.std.tolist(),
        "classes": list(model.classes),
        "converged": model.converged,
        "n_iters": model.n_iters,
        "params": {
            "inverse_reg_c": model.params.inverse_reg_c,
            "max_iters": model.params.max_iters,
            "tolerance": model.params.tolerance,
            "fit_intercept": model.params.fit_intercept,
        },
    }


def lasso_from_json(doc: dict) -> LassoModel:
    if doc.get("format") != "l1ksvm.lasso_model" or doc.get("version") != 1:
        raise ValueError("not a version-1 lasso model document")
    params = LassoParams(**doc["params"])
    return LassoModel(
        weights=np.asarray(doc["weights"], dtype=float),
        intercept=float(doc["intercept"]),
        params=params,
        mean=np.asarray(doc["mean"], dtype=float),
        std=np.asarray(doc["std"], dtype=float),
        classes=(doc["classes"][0], doc["classes"][1]),
        converged=bool(doc["converged"]),
        n_iters=int(doc["n_iters"]),
        objective_history=np.empty(0),
    )


def sparser_params(params: LassoParams, inverse_reg_c: float) -> LassoParams:
    """Copy of params with a different regularization strength."""
    return replace(params, inverse_reg_c=inverse_reg_c)
