"""Self-contained statistical primitives used across the analysis modules.

Implements the chi-squared upper tail via the regularized incomplete
gamma function (series expansion below a+1, Lentz continued fraction
above), the Mann-Whitney U test with midrank ties and an exact
permutation mode for small samples, the Kruskal-Wallis test with tie
correction, and the Cohen's d / eta-squared effect sizes.
"""

from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np

_MAX_ITER = 500
_EPS = 1e-15

#: Pooled sample size at or below which the U test enumerates exactly.
EXACT_PERMUTATION_LIMIT = 12


class StatisticsError(ValueError):
    """Raised on degenerate statistical inputs."""


# ---------------------------------------------------------------------------
# Incomplete gamma / distribution tails
# ---------------------------------------------------------------------------


def _gamma_p_series(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) by series, for x < a + 1."""
    term = 1.0 / a
    total = term
    n = a
    for _ in range(_MAX_ITER):
        n += 1.0
        term *= x / n
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))

def _gamma_q_contfrac(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) by Lentz's continued fraction."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def gamma_q(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a)."""
    if a <= 0:
        raise StatisticsError("gamma_q requires a > 0")
    if x < 0:
        raise StatisticsError("gamma_q requires x >= 0")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gamma_p_series(a, x)
    return _gamma_q_contfrac(a, x)


def chi2_sf(x: float, dof: int) -> float:
    """Upper tail of the chi-squared distribution with dof degrees of freedom."""
    if dof < 1:
        raise StatisticsError("chi-squared dof must be >= 1")
    if x < 0:
        raise StatisticsError("chi-squared statistic must be >= 0")
    return min(1.0, max(0.0, gamma_q(dof / 2.0, x / 2.0)))


def normal_sf(z: float) -> float:
    """Upper tail of the standard normal distribution."""
    return 0.5 * math.erfc(z / math.sqrt(2.0))


# ---------------------------------------------------------------------------
# Ranking
# ---------------------------------------------------------------------------


def rankdata(values: Sequence[float]) -> np.ndarray:
    """Midrank assignment (ties share the mean of their rank range)."""
    arr = np.asarray(values, dtype=float)
    order = np.argsort(arr, kind="mergesort")
    ranks = np.empty(len(arr), dtype=float)
    i = 0
    while i < len(arr):
        j = i
        while j + 1 < len(arr) and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _tie_term(pooled: np.ndarray) -> float:
    """Sum of t^3 - t over tie groups of the pooled sample."""
    _, counts = np.unique(pooled, return_counts=True)
    return float(np.sum(counts.astype(float) ** 3 - counts))


# ---------------------------------------------------------------------------
# Mann-Whitney U
# ---------------------------------------------------------------------------


def _u_statistic(a: np.ndarray, b: np.ndarray) -> float:
    pooled = np.concatenate([a, b])
    ranks = rankdata(pooled)
    r_a = float(np.sum(ranks[: len(a)]))
    return r_a - len(a) * (len(a) + 1) / 2.0


def _exact_two_sided_p(a: np.ndarray, b: np.ndarray, u_obs: float) -> float:
    """Two-sided permutation p: share of splits at least as extreme as u_obs."""
    pooled = np.concatenate([a, b])
    n_a = len(a)
    mu = n_a * len(b) / 2.0
    threshold = abs(u_obs - mu) - 1e-12
    extreme = 0
    total = 0
    indices = range(len(pooled))
    ranks = rankdata(pooled)
    for combo in itertools.combinations(indices, n_a):
        r_a = float(np.sum(ranks[list(combo)]))
        u = r_a - n_a * (n_a + 1) / 2.0
        if abs(u - mu) >= threshold:
            extreme += 1
        total += 1
    return extreme / total


def mann_whitney_u(
    a: Sequence[float],
    b: Sequence[float],
    alternative: str = "two-sided",
    method: str = "auto",
) -> tuple[float, float]:
    """Mann-Whitney U test; returns (U for sample a, p-value).

    U counts the (a, b) pairs in which a exceeds b, ties counting one
    half. The p-value uses the normal approximation with tie-corrected
    variance and no continuity correction; with method="auto" the exact
    permutation distribution is enumerated instead whenever the pooled
    size is at most EXACT_PERMUTATION_LIMIT (two-sided only).
    """
    if alternative not in ("two-sided", "greater", "less"):
        raise StatisticsError(f"unknown alternative {alternative!r}")
    if method not in ("auto", "exact", "normal"):
        raise StatisticsError(f"unknown method {method!r}")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) == 0 or len(b) == 0:
        raise StatisticsError("both samples must be non-empty")
    n_a, n_b = len(a), len(b)
    n = n_a + n_b
    u = _u_statistic(a, b)
    use_exact = method == "exact" or (method == "auto" and n <= EXACT_PERMUTATION_LIMIT)
    if use_exact and alternative == "two-sided":
        return u, _exact_two_sided_p(a, b, u)
    mu = n_a * n_b / 2.0
    tie = _tie_term(np.concatenate([a, b]))
    var = n_a * n_b / 12.0 * ((n + 1) - tie / (n * (n - 1)))
    if var <= 0:
        return u, 1.0
    z = (u - mu) / math.sqrt(var)
    if alternative == "two-sided":
        p = 2.0 * normal_sf(abs(z))
    elif alternative == "greater":
        p = normal_sf(z)
    else:
        p = 1.0 - normal_sf(z)
    return u, min(1.0, p)


# ---------------------------------------------------------------------------
# Kruskal-Wallis
# ---------------------------------------------------------------------------


def kruskal_wallis(groups: Sequence[Sequence[float]]) -> tuple[float, int, float]:
    """Kruskal-Wallis rank test with tie correction; returns (H, dof, p)."""
    if len(groups) < 2:
        raise StatisticsError("Kruskal-Wallis needs at least 2 groups")
    arrays = [np.asarray(g, dtype=float) for g in groups]
    if any(len(g) == 0 for g in arrays):
        raise StatisticsError("Kruskal-Wallis groups must be non-empty")
    pooled = np.concatenate(arrays)
    n = len(pooled)
    ranks = rankdata(pooled)
    h = 0.0
    offset = 0
    for g in arrays:
        r = float(np.sum(ranks[offset : offset + len(g)]))
        h += r * r / len(g)
        offset += len(g)
    h = 12.0 / (n * (n + 1)) * h - 3.0 * (n + 1)
    correction = 1.0 - _tie_term(pooled) / (n**3 - n)
    if correction <= 0:
        h = 0.0  # every pooled value tied
    else:
        h /= correction
    h = max(0.0, h)
    dof = len(groups) - 1
    return h, dof, chi2_sf(h, dof)


# ---------------------------------------------------------------------------
# Effect sizes
# ---------------------------------------------------------------------------

_D_BANDS = ((0.2, "negligible"), (0.5, "small"), (0.8, "medium"))


def cohens_d(a: Sequence[float], b: Sequence[float]) -> float:
    """Standardized mean difference (mean_a - mean_b) / pooled SD."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise StatisticsError("Cohen's d requires at least 2 values per sample")
    n_a, n_b = len(a), len(b)
    var_a = float(np.var(a, ddof=1))
    var_b = float(np.var(b, ddof=1))
    pooled = ((n_a - 1) * var_a + (n_b - 1) * var_b) / (n_a + n_b - 2)
    if pooled <= 0:
        raise StatisticsError("Cohen's d undefined: pooled standard deviation is 0")
    return (float(np.mean(a)) - float(np.mean(b))) / math.sqrt(pooled)


def cohens_d_band(d: float) -> str:
    """Magnitude band of |d| at the 0.2 / 0.5 / 0.8 thresholds."""
    magnitude = abs(d)
    for upper, band in _D_BANDS:
        if magnitude < upper:
            return band
    return "large"


def eta_squared(h: float, k: int, n: int) -> float:
    """Rank eta-squared from a Kruskal-Wallis H: (H - k + 1) / (n - k), floored at 0."""
    if n <= k:
        raise StatisticsError("eta-squared requires n > k")
    return max(0.0, (h - k + 1) / (n - k))


def eta_squared_band(value: float) -> str:
    return "negligible" if value < 0.01 else "non-negligible"
