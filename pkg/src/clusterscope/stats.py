"""Point statistics, one-way ANOVA, and |r|-sorted pairwise correlations.

The F-distribution CDF is computed from scratch via the regularized
incomplete beta function (Lentz continued fraction), so p-values carry no
external dependency and can be certified against quadrature oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, ParameterError, ValidationError
from .table import TableView

_BETA_EPS = 1e-14
_BETA_MAX_ITER = 500
_TINY = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function, via Lentz."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _BETA_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETA_EPS:
            return h
    return h  # converged to working precision in practice


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) with the symmetry switch at x > (a+1)/(a+b+2)."""
    if x < 0.0 or x > 1.0:
        raise ValidationError(f"incomplete beta needs x in [0,1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_bt = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    bt = math.exp(log_bt)
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


def f_cdf(x: float, d1: int, d2: int) -> float:
    """CDF of the F distribution with (d1, d2) degrees of freedom."""
    if d1 < 1 or d2 < 1:
        raise ParameterError("degrees of freedom must be >= 1")
    if x < 0:
        raise ValidationError(f"F statistic must be non-negative, got {x}")
    if x == 0:
        return 0.0
    return regularized_incomplete_beta(d1 / 2.0, d2 / 2.0, d1 * x / (d1 * x + d2))


@dataclass(frozen=True)
class AnovaResult:
    f_stat: float
    df_between: int
    df_within: int
    p_value: float
    group_means: tuple[float, ...]
    grand_mean: float
    degenerate: bool = False  # SSW == 0 with SSB > 0: infinite F

    def to_json_dict(self) -> dict:
        return {
            "F": None if math.isinf(self.f_stat) else self.f_stat,
            "df1": self.df_between,
            "df2": self.df_within,
            "p": self.p_value,
            "groups": list(self.group_means),
            "grand_mean": self.grand_mean,
            "degenerate": self.degenerate,
        }


def anova_oneway(groups: list[np.ndarray]) -> AnovaResult:
    """One-way ANOVA: F = (SSB/(k-1)) / (SSW/(N-k)), p from the F CDF."""
    if len(groups) < 2:
        raise ParameterError("ANOVA needs at least two groups")
    arrs = [np.asarray(g, dtype=float).ravel() for g in groups]
    if any(len(a) < 1 for a in arrs):
        raise ParameterError("every ANOVA group needs at least one value")
    k = len(arrs)
    N = sum(len(a) for a in arrs)
    if N <= k:
        raise ParameterError(f"ANOVA needs more values ({N}) than groups ({k})")

    pooled = np.concatenate(arrs)
    grand = float(pooled.mean())
    means = [float(a.mean()) for a in arrs]
    ssb = float(sum(len(a) * (m - grand) ** 2 for a, m in zip(arrs, means)))
    ssw = float(sum(((a - m) ** 2).sum() for a, m in zip(arrs, means)))
    df_b, df_w = k - 1, N - k

    if ssw == 0.0 and ssb == 0.0:
        raise DegenerateInputError("all values identical: ANOVA undefined")
    if ssw == 0.0:
        return AnovaResult(
            f_stat=float("inf"),
            df_between=df_b,
            df_within=df_w,
            p_value=0.0,
            group_means=tuple(means),
            grand_mean=grand,
            degenerate=True,
        )
    f_stat = (ssb / df_b) / (ssw / df_w)
    p = 1.0 - f_cdf(f_stat, df_b, df_w)
    return AnovaResult(
        f_stat=f_stat,
        df_between=df_b,
        df_within=df_w,
        p_value=min(max(p, 0.0), 1.0),
        group_means=tuple(means),
        grand_mean=grand,
    )


@dataclass(frozen=True)
class CorrelationEntry:
    feature_a: str
    feature_b: str
    r: float
    defined: bool = True

    def to_json_dict(self) -> dict:
        return {
            "a": self.feature_a,
            "b": self.feature_b,
            "r": self.r if self.defined else None,
            "defined": self.defined,
        }


def corr_pairs(view: TableView) -> list[CorrelationEntry]:
    """Pearson r for every unordered feature pair, sorted by |r| descending.

    Pairs touching a zero-variance feature are flagged undefined and sort
    last; ties break on (feature_a, feature_b) name order.
    """
    names = view.feature_subset
    if len(names) < 2:
        raise ParameterError("correlations need at least two numeric features")
    X = view.matrix()
    sd = X.std(axis=0)
    centered = X - X.mean(axis=0)
    entries: list[CorrelationEntry] = []
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            if sd[i] == 0.0 or sd[j] == 0.0:
                entries.append(CorrelationEntry(names[i], names[j], math.nan, False))
                continue
            r = float(centered[:, i] @ centered[:, j] / (X.shape[0] * sd[i] * sd[j]))
            entries.append(CorrelationEntry(names[i], names[j], max(-1.0, min(1.0, r))))
    entries.sort(
        key=lambda e: (
            not e.defined,
            -abs(e.r) if e.defined else 0.0,
            e.feature_a,
            e.feature_b,
        )
    )
    return entries


def point_stats(view: TableView) -> dict[str, dict[str, float]]:
    """count/mean/std/min/max per selected feature over the selected rows."""
    if view.n_selected == 0:
        raise ValidationError("statistics require at least one selected row")
    X = view.matrix()
    out: dict[str, dict[str, float]] = {}
    for j, name in enumerate(view.feature_subset):
        col = X[:, j]
        out[name] = {
            "count": int(col.shape[0]),
            "mean": float(col.mean()),
            "std": float(col.std()),
            "min": float(col.min()),
            "max": float(col.max()),
        }
    return out
