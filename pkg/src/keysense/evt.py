"""Distribution fitting and regression for metric populations.

Heavy-tailed metric populations are summarized by two-parameter fits:
the Frechet extreme-value law ``F(x) = exp(-(x/beta)^-alpha)`` for
quantities driven by record values, and the Pareto Type II (Lomax) law
with survival ``(1 + x/beta)^-alpha`` for citation-like counts.  Both are
fitted by profile maximum likelihood: one parameter has a closed form
given the other, and the remaining one-dimensional score equation is
bracketed and solved on a log scale so positivity is automatic.  The
Kolmogorov-Smirnov statistic is reported descriptively against the
fitted CDF.

Scatter relations are fitted by least squares on each model's natural
scale: linear, quadratic, exponential growth (log-linear), and power law
(log-log).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import optimize, stats

from .errors import ConvergenceError

#: Convergence tolerance on the profile score (gradient) at the returned root.
SCORE_TOL = 1e-10


@dataclass(frozen=True)
class FitResult:
    """A fitted two-parameter distribution with its goodness-of-fit summary.

    Convention: ``alpha`` is the shape and ``beta`` the scale, with the
    Frechet CDF ``exp(-(x/beta)^-alpha)`` and Lomax survival
    ``(1 + x/beta)^-alpha``.
    """

    family: str
    alpha: float
    beta: float
    log_likelihood: float
    ks_stat: float
    n: int

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "alpha": self.alpha,
            "beta": self.beta,
            "loglik": self.log_likelihood,
            "ks": self.ks_stat,
            "n": self.n,
            "convention": "alpha=shape, beta=scale",
        }


@dataclass(frozen=True)
class RegressionResult:
    """Least-squares fit of one scatter model.

    ``coefficients`` are on the reporting scale of each model:
    linear ``[slope, intercept]``; quadratic ``[a2, a1, a0]``;
    exponential ``y = c0 * exp(c1 * x)`` as ``[c0, c1]``;
    log-log power ``ln y = c0 * ln x + c1`` as ``[c0, c1]``.
    ``r2`` and ``p_value`` refer to the model's native (possibly
    transformed) scale.
    """

    model: str
    coefficients: tuple[float, ...]
    r2: float
    p_value: float

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "coefficients": list(self.coefficients),
            "r2": self.r2,
            "p_value": self.p_value,
        }


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov
# ---------------------------------------------------------------------------


def ks_statistic(sample: Sequence[float], cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """Sup-distance between the empirical CDF and ``cdf`` over the sample."""
    x = np.sort(np.asarray(sample, dtype=np.float64))
    n = len(x)
    if n == 0:
        raise ValueError("empty sample")
    fitted = np.asarray(cdf(x), dtype=np.float64)
    grid = np.arange(1, n + 1) / n
    return float(np.max(np.maximum(np.abs(grid - fitted), np.abs(grid - 1.0 / n - fitted))))


# ---------------------------------------------------------------------------
# Frechet
# ---------------------------------------------------------------------------


def frechet_cdf(x: np.ndarray, alpha: float, beta: float) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    positive = x > 0
    out[positive] = np.exp(-((x[positive] / beta) ** (-alpha)))
    return out


def frechet_pdf(x: np.ndarray, alpha: float, beta: float) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    positive = x > 0
    z = x[positive] / beta
    out[positive] = (alpha / beta) * z ** (-alpha - 1.0) * np.exp(-(z ** (-alpha)))
    return out


def sample_frechet(
    alpha: float, beta: float, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Inverse-transform sampling: ``beta * (-ln U)^(-1/alpha)``."""
    u = rng.uniform(size=size)
    return beta * (-np.log(u)) ** (-1.0 / alpha)


def _frechet_score(alpha: float, log_x: np.ndarray) -> float:
    """Profile log-likelihood derivative in the shape parameter."""
    n = len(log_x)
    w = -alpha * log_x
    w -= w.max()
    weights = np.exp(w)
    weighted_mean = float(weights @ log_x / weights.sum())
    return n / alpha + n * weighted_mean - float(log_x.sum())


def fit_frechet(sample: Sequence[float]) -> FitResult:
    """Profile-likelihood MLE of the Frechet shape and scale.

    The scale has a closed form given the shape, so only the shape score
    is solved, bracketed on a log grid.  Raises :class:`ConvergenceError`
    when no bracket exists (e.g. near-constant samples push the shape to
    infinity).
    """
    x = np.asarray(sample, dtype=np.float64)
    if len(x) < 10:
        raise ValueError("need at least 10 values")
    if np.any(x <= 0):
        raise ValueError("all values must be positive")
    log_x = np.log(x)
    n = len(x)

    lo = 1e-8
    hi = 1.0
    score_hi = _frechet_score(hi, log_x)
    for _ in range(200):
        if score_hi < 0:
            break
        lo = hi
        hi *= 2.0
        score_hi = _frechet_score(hi, log_x)
    else:
        raise ConvergenceError(
            "frechet shape bracket not found",
            {"alpha_hi": hi, "score_hi": score_hi},
        )
    alpha = float(optimize.brentq(_frechet_score, lo, hi, args=(log_x,), xtol=1e-12, rtol=1e-15))
    residual = abs(_frechet_score(alpha, log_x))
    if not math.isfinite(residual) or residual > SCORE_TOL * max(1.0, abs(log_x.sum())):
        raise ConvergenceError(
            "frechet score did not vanish", {"alpha": alpha, "score": residual}
        )

    # closed-form scale given the shape, in log space
    w = -alpha * log_x
    shift = w.max()
    log_s = shift + math.log(np.exp(w - shift).sum())
    log_beta = (math.log(n) - log_s) / alpha
    beta = math.exp(log_beta)

    loglik = n * math.log(alpha) + n * alpha * log_beta - (alpha + 1.0) * float(log_x.sum()) - n
    ks = ks_statistic(x, lambda v: frechet_cdf(v, alpha, beta))
    return FitResult("frechet", alpha, beta, loglik, ks, n)


def frechet_log_likelihood(sample: Sequence[float], alpha: float, beta: float) -> float:
    x = np.asarray(sample, dtype=np.float64)
    z = x / beta
    return float(
        len(x) * math.log(alpha / beta)
        - (alpha + 1.0) * np.log(z).sum()
        - (z ** (-alpha)).sum()
    )


# ---------------------------------------------------------------------------
# Pareto Type II (Lomax)
# ---------------------------------------------------------------------------


def lomax_cdf(x: np.ndarray, alpha: float, beta: float) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return np.where(x < 0, 0.0, 1.0 - (1.0 + x / beta) ** (-alpha))


def lomax_pdf(x: np.ndarray, alpha: float, beta: float) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return np.where(x < 0, 0.0, (alpha / beta) * (1.0 + x / beta) ** (-alpha - 1.0))


def sample_lomax(
    alpha: float, beta: float, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Inverse-transform sampling: ``beta * ((1 - U)^(-1/alpha) - 1)``."""
    u = rng.uniform(size=size)
    return beta * ((1.0 - u) ** (-1.0 / alpha) - 1.0)


def _lomax_score(beta: float, x: np.ndarray) -> float:
    """Profile score in the scale parameter; root iff sample CV exceeds one."""
    n = len(x)
    t = float(np.log1p(x / beta).sum())
    u = float((x / (beta + x)).sum())
    return u * (n + t) - n * t


def fit_pareto2(sample: Sequence[float]) -> FitResult:
    """Profile-likelihood MLE of the Lomax shape and scale.

    The shape has a closed form given the scale.  Light-tailed samples
    (coefficient of variation below one) have no interior maximum; that
    surfaces as a missing bracket and raises :class:`ConvergenceError`.
    """
    x = np.asarray(sample, dtype=np.float64)
    if len(x) < 10:
        raise ValueError("need at least 10 values")
    if np.any(x < 0):
        raise ValueError("values must be nonnegative")
    if np.all(x == 0):
        raise ValueError("all values are zero")
    n = len(x)

    # score is positive near zero and, for heavy-tailed samples, negative at
    # large scales: shrink lo until positive, grow hi until negative
    scale = float(x.mean())
    lo = hi = scale
    score_lo = _lomax_score(lo, x)
    for _ in range(200):
        if score_lo > 0:
            break
        lo /= 2.0
        score_lo = _lomax_score(lo, x)
    else:
        raise ConvergenceError(
            "lomax scale bracket not found", {"beta_lo": lo, "score_lo": score_lo}
        )
    # cap the search at a data-scaled bound: past it the score only decays to
    # zero from above (no interior maximum) and float noise fakes sign changes
    cap = scale * 1e9
    score_hi = _lomax_score(hi, x)
    while score_hi >= 0 and hi <= cap:
        hi *= 2.0
        score_hi = _lomax_score(hi, x)
    if score_hi >= 0:
        raise ConvergenceError(
            "lomax scale bracket not found (light-tailed sample?)",
            {"beta_hi": hi, "score_hi": score_hi},
        )
    if lo == hi:
        beta = lo
    else:
        beta = float(
            optimize.brentq(_lomax_score, lo, hi, args=(x,), xtol=1e-12, rtol=1e-15)
        )
    t_hat = float(np.log1p(x / beta).sum())
    gradient = _lomax_score(beta, x) / (beta * t_hat)
    if not math.isfinite(gradient) or abs(gradient) > SCORE_TOL * n:
        raise ConvergenceError(
            "lomax score did not vanish", {"beta": beta, "gradient": gradient}
        )

    alpha = n / t_hat
    loglik = n * math.log(alpha / beta) - (alpha + 1.0) * t_hat
    ks = ks_statistic(x, lambda v: lomax_cdf(v, alpha, beta))
    return FitResult("paretoII", alpha, beta, loglik, ks, n)


def lomax_log_likelihood(sample: Sequence[float], alpha: float, beta: float) -> float:
    x = np.asarray(sample, dtype=np.float64)
    return float(len(x) * math.log(alpha / beta) - (alpha + 1.0) * np.log1p(x / beta).sum())


# ---------------------------------------------------------------------------
# Regression family
# ---------------------------------------------------------------------------

REGRESSION_MODELS = ("linear", "quadratic", "exponential", "loglogPower")


def _least_squares(design: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float, float]:
    """Solve, and report R^2 and the overall F-test p-value."""
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    fitted = design @ coef
    sse = float(np.sum((y - fitted) ** 2))
    sst = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if sst == 0 else 1.0 - sse / sst
    k = design.shape[1] - 1
    dof = len(y) - design.shape[1]
    if sse <= 1e-300 or dof <= 0:
        p_value = 0.0
    else:
        f_stat = ((sst - sse) / k) / (sse / dof)
        p_value = float(stats.f.sf(f_stat, k, dof))
    return coef, r2, p_value


def regress(model: str, xs: Sequence[float], ys: Sequence[float]) -> RegressionResult:
    """Fit one of the scatter models; see :class:`RegressionResult` for layouts.

    Log-scale models require positive values; offenders are reported by
    index rather than silently dropped.
    """
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if len(x) != len(y):
        raise ValueError("xs and ys differ in length")

    if model == "linear":
        arity = 2
        design = np.column_stack([x, np.ones_like(x)])
        target = y
    elif model == "quadratic":
        arity = 3
        design = np.column_stack([x**2, x, np.ones_like(x)])
        target = y
    elif model == "exponential":
        arity = 2
        _require_positive(y, "ys")
        design = np.column_stack([x, np.ones_like(x)])
        target = np.log(y)
    elif model == "loglogPower":
        arity = 2
        _require_positive(x, "xs")
        _require_positive(y, "ys")
        design = np.column_stack([np.log(x), np.ones_like(x)])
        target = np.log(y)
    else:
        raise ValueError(f"unknown regression model {model!r}")

    if len(x) < arity + 1:
        raise ValueError(f"{model} needs at least {arity + 1} points")

    coef, r2, p_value = _least_squares(design, target)
    if model == "exponential":
        coefficients = (float(np.exp(coef[1])), float(coef[0]))
    elif model == "loglogPower":
        coefficients = (float(coef[0]), float(coef[1]))
    else:
        coefficients = tuple(float(c) for c in coef)
    return RegressionResult(model, coefficients, r2, p_value)


def _require_positive(values: np.ndarray, name: str) -> None:
    bad = np.nonzero(values <= 0)[0]
    if len(bad):
        head = ", ".join(str(i) for i in bad[:10])
        raise ValueError(f"{name} must be positive for this model; offending indices: {head}")
