"""Runtime-scaling regression: six candidate models and three exponent estimators."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MODEL_NAMES = ("Power", "Quadratic", "Linearithmic", "Linear", "Logarithmic", "Constant")
# fewer parameters / later in the table wins an R^2 tie
_SIMPLICITY = {name: i for i, name in enumerate(MODEL_NAMES)}

NLS_REL_STEP = 1e-9
NLS_MAX_ITER = 200


@dataclass
class ModelFit:
    name: str
    coeffs: dict
    rmse: float
    r2: float
    error: str | None = None

    def predict(self, n):
        n = np.asarray(n, dtype=float)
        a = self.coeffs.get("a", math.nan)
        if self.name == "Power":
            return a * n ** self.coeffs["b"]
        return a * _BASIS[self.name](n)


@dataclass
class FitReport:
    models: list[ModelFit]
    best_model: str
    series: list[tuple[float, float]] = field(default_factory=list)

    def model(self, name: str) -> ModelFit:
        return next(m for m in self.models if m.name == name)


@dataclass
class ExponentReport:
    polyfit_loglog: float
    nonlinear_ls: float | None
    local_exponent: float
    nls_converged: bool = True
    nls_iterations: int = 0
    nls_error: str | None = None


_BASIS = {
    "Quadratic": lambda n: n ** 2,
    "Linearithmic": lambda n: n * np.log(n),
    "Linear": lambda n: n,
    "Logarithmic": lambda n: np.log(n),
    "Constant": lambda n: np.ones_like(n),
}


def _series(series) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(series, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("series must be a sequence of (size, value) pairs")
    return arr[:, 0], arr[:, 1]


def _scores(y, pred, constant=False):
    resid = y - pred
    rmse = float(np.sqrt(np.mean(resid ** 2)))
    if constant:
        return rmse, 0.0
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        return rmse, 0.0 if ss_res == 0.0 else -math.inf
    return rmse, 1.0 - ss_res / ss_tot


def _loglog(n, y) -> tuple[float, float]:
    slope, intercept = np.polyfit(np.log(n), np.log(y), 1)
    return float(math.exp(intercept)), float(slope)


def fit_models(series) -> FitReport:
    """Least-squares fits of a*n^b, a*n^2, a*n*log n, a*n, a*log n and a.

    The power law is fitted as a line in log-log space; the one-parameter models
    by closed-form least squares. RMSE and R^2 are always reported in the
    original scale.
    """
    n, y = _series(series)
    if len(np.unique(n)) < 4:
        raise ValueError("need at least 4 distinct sizes")
    fits = []
    for name in MODEL_NAMES:
        if name == "Power":
            if (n <= 0).any() or (y <= 0).any():
                fits.append(ModelFit(name, {}, math.nan, -math.inf, "non-positive sizes or values"))
                continue
            a, b = _loglog(n, y)
            pred = a * n ** b
            fits.append(ModelFit(name, {"a": a, "b": b}, *_scores(y, pred)))
            continue
        if name == "Logarithmic" and (n <= 0).any():
            fits.append(ModelFit(name, {}, math.nan, -math.inf, "non-positive sizes"))
            continue
        f = _BASIS[name](n)
        a = float(np.dot(f, y) / np.dot(f, f))
        fits.append(ModelFit(name, {"a": a}, *_scores(y, a * f, constant=name == "Constant")))
    best = max(fits, key=lambda m: (m.r2, -m.rmse if math.isfinite(m.rmse) else -math.inf,
                                    _SIMPLICITY[m.name]))
    return FitReport(fits, best.name, [(float(a), float(b)) for a, b in zip(n, y)])


def nonlinear_power_fit(n, y, a0: float, b0: float) -> tuple[float, float, bool, int]:
    """Levenberg-Marquardt fit of y = a*n^b in the original scale.

    Parametrized as (log a, b) for conditioning. Stops when the relative step
    falls below ``NLS_REL_STEP`` or after ``NLS_MAX_ITER`` iterations.
    Returns (a, b, converged, iterations).
    """
    n = np.asarray(n, dtype=float)
    y = np.asarray(y, dtype=float)
    ln = np.log(n)
    theta = np.array([math.log(a0), b0])

    def resid(th):
        return np.exp(th[0] + th[1] * ln) - y

    r = resid(theta)
    cost = float(r @ r)
    mu = 1e-3
    for it in range(1, NLS_MAX_ITER + 1):
        model = r + y
        J = np.column_stack([model, model * ln])
        JTJ = J.T @ J
        g = J.T @ r
        for _ in range(60):
            step = np.linalg.solve(JTJ + mu * np.diag(np.diag(JTJ)), -g)
            cand = theta + step
            rc = resid(cand)
            cc = float(rc @ rc)
            if np.isfinite(cc) and cc <= cost:
                break
            mu *= 4.0
        else:
            # no damping level reduces the cost: we sit at the minimum up to rounding
            return float(math.exp(theta[0])), float(theta[1]), True, it
        theta, r, cost = cand, rc, cc
        mu = max(mu / 3.0, 1e-12)
        if np.linalg.norm(step) < NLS_REL_STEP * np.linalg.norm(theta):
            return float(math.exp(theta[0])), float(theta[1]), True, it
    return float(math.exp(theta[0])), float(theta[1]), False, NLS_MAX_ITER


def local_exponents(n, y) -> np.ndarray:
    """Finite-difference slopes of log y against log n between consecutive sizes."""
    ln, ly = np.log(n), np.log(y)
    return np.diff(ly) / np.diff(ln)


def estimate_exponents(series) -> ExponentReport:
    n, y = _series(series)
    if len(n) < 2:
        raise ValueError("need at least 2 points")
    if (np.diff(n) <= 0).any():
        raise ValueError("sizes must be strictly increasing")
    if (n <= 0).any() or (y <= 0).any():
        raise ValueError("sizes and runtimes must be positive")
    a1, b1 = _loglog(n, y)
    local = float(np.median(local_exponents(n, y)))
    if len(n) < 3:
        return ExponentReport(b1, None, local, False, 0,
                              "two parameters need more than two points for a least-squares fit")
    a2, b2, ok, iters = nonlinear_power_fit(n, y, a1, b1)
    return ExponentReport(b1, b2, local, ok, iters, None if ok else "did not converge")


def report_to_dict(fit: FitReport, exps: ExponentReport | None = None, **extra) -> dict:
    doc = dict(extra)
    doc["series"] = [list(p) for p in fit.series]
    doc["models"] = [{"name": m.name, "coeffs": m.coeffs, "rmse": _num(m.rmse), "r2": _num(m.r2),
                      **({"error": m.error} if m.error else {})} for m in fit.models]
    doc["best"] = fit.best_model
    if exps is not None:
        doc["exponents"] = {"polyfit": exps.polyfit_loglog, "nls": exps.nonlinear_ls,
                            "local": exps.local_exponent}
    return doc


def _num(x):
    return None if not math.isfinite(x) else x
