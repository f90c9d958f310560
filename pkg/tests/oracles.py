"""Independent reference computations used to validate the solvers.

These deliberately use different algorithm families than the code under
test: scalar golden-section search, central finite differences, dense
accelerated projected gradient on the SVM dual.
"""

import numpy as np

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def golden_section_minimize(f, lo: float, hi: float, tol: float = 1e-9) -> float:
    """Minimizer of a unimodal scalar function on [lo, hi]."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def central_diff_gradient(f, x: np.ndarray, step: float = 1e-5) -> np.ndarray:
    """Central finite-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for k in range(x.size):
        up = x.copy()
        dn = x.copy()
        up[k] += step
        dn[k] -= step
        grad[k] = (f(up) - f(dn)) / (2.0 * step)
    return grad


def _project_box_hyperplane(v: np.ndarray, y: np.ndarray, box_c: float) -> np.ndarray:
    """Euclidean projection onto {0 <= a <= C, y.a = 0} by bisection on the
    hyperplane multiplier; y entries are +-1 so the residual is monotone."""

    def residual(lam: float) -> float:
        return float(y @ np.clip(v - lam * y, 0.0, box_c))

    lo, hi = -1.0, 1.0
    while residual(lo) < 0.0:
        lo *= 2.0
        if lo < -1e12:
            break
    while residual(hi) > 0.0:
        hi *= 2.0
        if hi > 1e12:
            break
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if residual(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return np.clip(v - 0.5 * (lo + hi) * y, 0.0, box_c)


def svm_dual_reference(
    K: np.ndarray, y: np.ndarray, box_c: float, max_iters: int = 30000
) -> tuple[np.ndarray, float]:
    """Accelerated projected gradient on min 0.5 a'Qa - e'a over the dual
    feasible set; returns (alpha, objective)."""
    y = np.asarray(y, dtype=float)
    Q = (y[:, None] * y[None, :]) * K
    n = y.size
    lip = float(np.linalg.eigvalsh(Q).max())
    step = 1.0 / max(lip, 1e-12)

    def objective(a: np.ndarray) -> float:
        return 0.5 * float(a @ Q @ a) - float(a.sum())

    alpha = np.zeros(n)
    momentum = alpha.copy()
    t_mom = 1.0
    best = objective(alpha)
    stalled = 0
    for _ in range(max_iters):
        grad = Q @ momentum - 1.0
        cand = _project_box_hyperplane(momentum - step * grad, y, box_c)
        obj = objective(cand)
        if obj <= best:
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_mom * t_mom))
            momentum = cand + ((t_mom - 1.0) / t_next) * (cand - alpha)
            prev_best = best
            alpha, best, t_mom = cand, obj, t_next
            stalled = stalled + 1 if prev_best - best < 1e-13 * (1.0 + abs(best)) else 0
            if stalled >= 3:
                break
        else:
            momentum = alpha.copy()
            t_mom = 1.0
    return alpha, best
