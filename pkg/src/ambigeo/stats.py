"""Least squares, one-way ANOVA, Welch's t, and mean confidence intervals.

p-values come from a self-contained regularized incomplete-beta evaluation
(continued fraction, Lentz's method) of the t and F distributions, and the
normal quantile from Acklam's rational approximation refined with one
Halley step, so the package needs no numeric dependency beyond numpy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, InsufficientDataError, ShapeError, SingularMatrixError


@dataclass(frozen=True)
class OlsFit:
    coefficients: np.ndarray
    standard_errors: np.ndarray
    t_values: np.ndarray
    p_values: np.ndarray
    standardized_beta: np.ndarray
    r_squared: float
    df_residual: int


@dataclass(frozen=True)
class AnovaResult:
    f_value: float
    df_between: int
    df_within: int
    p_value: float
    partial_eta_sq: float


# --------------------------------------------------------------------------
# distribution machinery


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    max_iterations = 300
    eps = 3e-16
    fpmin = 1e-300

    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, max_iterations + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    return h  # converged to machine precision in practice well before this


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0.0 or b <= 0.0:
        raise DomainError(f"beta parameters must be positive, got a={a}, b={b}")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_sf_two_sided(t: float, df: float) -> float:
    """Two-sided tail probability of Student's t."""
    if df <= 0:
        raise DomainError(f"degrees of freedom must be positive, got {df}")
    if math.isinf(t):
        return 0.0
    return betainc_reg(df / 2.0, 0.5, df / (df + t * t))


def f_sf(f: float, df1: float, df2: float) -> float:
    """Upper tail probability of the F distribution."""
    if df1 <= 0 or df2 <= 0:
        raise DomainError("degrees of freedom must be positive")
    if f <= 0.0:
        return 1.0
    if math.isinf(f):
        return 0.0
    return betainc_reg(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f))


# Acklam's inverse-normal coefficients.
_PPF_A = (
    -3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
    1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00,
)
_PPF_B = (
    -5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
    6.680131188771972e01, -1.328068155288572e01,
)
_PPF_C = (
    -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
    -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00,
)
_PPF_D = (
    7.784695709041462e-03, 3.224671290700398e-01,
    2.445134137142996e00, 3.754408661907416e00,
)


def norm_ppf(p: float) -> float:
    """Standard normal quantile, accurate to ~1e-15 after refinement."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"quantile level must be in (0, 1), got {p}")
    p_low, p_high = 0.02425, 1 - 0.02425
    if p < p_low:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((_PPF_C[0] * q + _PPF_C[1]) * q + _PPF_C[2]) * q + _PPF_C[3]) * q + _PPF_C[4]) * q + _PPF_C[5]) / (
            (((_PPF_D[0] * q + _PPF_D[1]) * q + _PPF_D[2]) * q + _PPF_D[3]) * q + 1.0
        )
    elif p <= p_high:
        q = p - 0.5
        r = q * q
        x = (((((_PPF_A[0] * r + _PPF_A[1]) * r + _PPF_A[2]) * r + _PPF_A[3]) * r + _PPF_A[4]) * r + _PPF_A[5]) * q / (
            ((((_PPF_B[0] * r + _PPF_B[1]) * r + _PPF_B[2]) * r + _PPF_B[3]) * r + _PPF_B[4]) * r + 1.0
        )
    else:
        q = math.sqrt(-2.0 * math.log1p(-p))
        x = -(((((_PPF_C[0] * q + _PPF_C[1]) * q + _PPF_C[2]) * q + _PPF_C[3]) * q + _PPF_C[4]) * q + _PPF_C[5]) / (
            (((_PPF_D[0] * q + _PPF_D[1]) * q + _PPF_D[2]) * q + _PPF_D[3]) * q + 1.0
        )
    # One Halley step against the exact CDF via erfc.
    err = 0.5 * math.erfc(-x / math.sqrt(2.0)) - p
    u = err * math.sqrt(2.0 * math.pi) * math.exp(x * x / 2.0)
    return x - u / (1.0 + x * u / 2.0)


# --------------------------------------------------------------------------
# estimators


def ols(y: Sequence[float], predictors: np.ndarray) -> OlsFit:
    """Ordinary least squares; column 0 of predictors must be the intercept.

    Standardized coefficients are recomputed by refitting with the outcome
    and all non-intercept predictors z-scored.
    """
    y = np.asarray(y, dtype=np.float64)
    x = np.asarray(predictors, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise ShapeError(f"incompatible shapes y={y.shape}, predictors={x.shape}")
    n, k = x.shape
    if not np.all(x[:, 0] == 1.0):
        raise ShapeError("column 0 of the predictor matrix must be the intercept")
    if n < k + 1:
        raise InsufficientDataError(f"need at least {k + 1} rows, got {n}")
    if np.linalg.matrix_rank(x) < k:
        raise SingularMatrixError("predictor matrix is rank deficient")

    coef, sse = _solve_ls(x, y)
    df = n - k
    sigma_sq = sse / df
    xtx_inv = np.linalg.inv(x.T @ x)
    se = np.sqrt(np.clip(np.diag(xtx_inv), 0.0, None) * sigma_sq)
    with np.errstate(divide="ignore", invalid="ignore"):
        t_values = np.where(se > 0, coef / se, np.inf * np.sign(coef))
    p_values = np.array([t_sf_two_sided(abs(t), df) for t in t_values])

    sst = float(np.sum((y - y.mean()) ** 2))
    if sst > 0.0:
        r_squared = 1.0 - sse / sst
    else:
        r_squared = 1.0 if sse == 0.0 else 0.0
    standardized = _standardized_beta(y, x)
    return OlsFit(
        coefficients=coef,
        standard_errors=se,
        t_values=t_values,
        p_values=p_values,
        standardized_beta=standardized,
        r_squared=float(r_squared),
        df_residual=df,
    )


def _solve_ls(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    coef, _, _, _ = np.linalg.lstsq(x, y, rcond=None)
    residuals = y - x @ coef
    return coef, float(residuals @ residuals)


def _standardized_beta(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    sd_y = float(np.std(y, ddof=1))
    if sd_y == 0.0:
        return np.zeros(x.shape[1])
    z_y = (y - y.mean()) / sd_y
    z_x = x.copy()
    for j in range(1, x.shape[1]):
        col = x[:, j]
        z_x[:, j] = (col - col.mean()) / np.std(col, ddof=1)
    coef, _ = _solve_ls(z_x, z_y)
    return coef


def one_way_anova(groups: Sequence[Sequence[float]]) -> AnovaResult:
    """Classical between/within decomposition with partial eta squared."""
    arrays = [np.asarray(g, dtype=np.float64) for g in groups]
    if len(arrays) < 2:
        raise InsufficientDataError(f"need >= 2 groups, got {len(arrays)}")
    if any(a.size < 1 for a in arrays):
        raise InsufficientDataError("every group needs at least one value")
    if all(a.size < 2 for a in arrays):
        raise InsufficientDataError("at least one group needs two values")

    total_n = sum(a.size for a in arrays)
    grand = sum(float(a.sum()) for a in arrays) / total_n
    ss_between = sum(a.size * (float(a.mean()) - grand) ** 2 for a in arrays)
    ss_within = sum(float(np.sum((a - a.mean()) ** 2)) for a in arrays)
    df_between = len(arrays) - 1
    df_within = total_n - len(arrays)
    if df_within < 1:
        raise InsufficientDataError("no residual degrees of freedom")

    if ss_within == 0.0:
        if ss_between == 0.0:
            return AnovaResult(0.0, df_between, df_within, 1.0, 0.0)
        # Degenerate fixtures: infinity sentinel instead of a crash.
        return AnovaResult(math.inf, df_between, df_within, 0.0, 1.0)

    f_value = (ss_between / df_between) / (ss_within / df_within)
    return AnovaResult(
        f_value=float(f_value),
        df_between=df_between,
        df_within=df_within,
        p_value=f_sf(f_value, df_between, df_within),
        partial_eta_sq=float(ss_between / (ss_between + ss_within)),
    )


def welch_t(a: Sequence[float], b: Sequence[float]) -> tuple[float, float, float]:
    """Welch's t with Welch-Satterthwaite degrees of freedom; returns (t, df, p)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise DomainError("each sample needs at least two values")
    var_a = float(np.var(a, ddof=1))
    var_b = float(np.var(b, ddof=1))
    if var_a == 0.0 or var_b == 0.0:
        raise DomainError("zero variance sample; Welch statistic undefined")
    sa, sb = var_a / a.size, var_b / b.size
    t = (float(a.mean()) - float(b.mean())) / math.sqrt(sa + sb)
    df = (sa + sb) ** 2 / (sa**2 / (a.size - 1) + sb**2 / (b.size - 1))
    return t, df, t_sf_two_sided(abs(t), df)


def mean_ci(values: Sequence[float], level: float) -> tuple[float, float, float]:
    """Normal-approximation interval: mean +/- z * sd / sqrt(n)."""
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        raise InsufficientDataError("confidence interval needs >= 2 values")
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must be in (0, 1), got {level}")
    mean = float(values.mean())
    half = norm_ppf((1.0 + level) / 2.0) * float(np.std(values, ddof=1)) / math.sqrt(values.size)
    return mean, mean - half, mean + half


# Predictor order for the pair-level interaction model.
INTERACTION_TERMS = ("intercept", "group_status", "word_type", "group_x_word")


def interaction_fit(pairs_first, pairs_second) -> OlsFit:
    """Pair-level model: similarity ~ group + word type + their product.

    ``pairs_*`` are PairRecord-like objects (``group_status``,
    ``similarity``).  Coding: within = 1, between = 0; first word type = 0,
    second = 1.  A negative interaction coefficient means the
    within-minus-between gap shrinks for the second word type.
    """
    rows = []
    outcome = []
    for word_code, records in ((0.0, pairs_first), (1.0, pairs_second)):
        for record in records:
            group = 1.0 if record.group_status == "within" else 0.0
            rows.append([1.0, group, word_code, group * word_code])
            outcome.append(record.similarity)
    return ols(np.asarray(outcome), np.asarray(rows))


def ols_to_dict(fit: OlsFit, names: Sequence[str]) -> dict:
    return {
        "predictors": list(names),
        "coefficients": [float(v) for v in fit.coefficients],
        "standard_errors": [float(v) for v in fit.standard_errors],
        "t_values": [float(v) for v in fit.t_values],
        "p_values": [float(v) for v in fit.p_values],
        "standardized_beta": [float(v) for v in fit.standardized_beta],
        "r_squared": fit.r_squared,
        "df_residual": fit.df_residual,
    }


def anova_to_dict(result: AnovaResult) -> dict:
    return {
        "f_value": result.f_value if math.isfinite(result.f_value) else "inf",
        "df_between": result.df_between,
        "df_within": result.df_within,
        "p_value": result.p_value,
        "partial_eta_sq": result.partial_eta_sq,
    }
