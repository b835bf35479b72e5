"""One-way ANOVA, Welch's t-test, quartiles and Tukey fences.

Distribution tails go through the regularized incomplete beta function,
evaluated with the modified Lentz continued fraction.  Sample variances use
the n - 1 denominator throughout; t-test p-values are two-sided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence, Union

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000


class StatsError(ValueError):
    """Input violates a statistical routine's preconditions."""


@dataclass(frozen=True)
class SampleSet:
    label: str
    values: tuple

    def __init__(self, label: str, values):
        object.__setattr__(self, "label", label)
        object.__setattr__(self, "values", tuple(float(v) for v in values))

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class AnovaResult:
    f_stat: float
    df_between: int
    df_within: int
    p_value: float


@dataclass(frozen=True)
class WelchResult:
    t_stat: float
    df: float
    p_value: float


@dataclass(frozen=True)
class PooledTResult:
    t_stat: float
    df: int
    p_value: float


@dataclass(frozen=True)
class QuartileSummary:
    q1: float
    q3: float
    iqr: float
    ub: float
    lb: float


@dataclass(frozen=True)
class OutlierReport:
    upper_outliers: tuple
    lower_outliers: tuple

    @property
    def count(self) -> int:
        return len(self.upper_outliers) + len(self.lower_outliers)


Sample = Union[SampleSet, Sequence[float]]


def _values(sample: Sample) -> tuple:
    return sample.values if isinstance(sample, SampleSet) else tuple(float(v) for v in sample)


def mean(values) -> float:
    values = _values(values)
    return math.fsum(values) / len(values)


def variance(values) -> float:
    values = _values(values)
    m = mean(values)
    return math.fsum((v - m) ** 2 for v in values) / (len(values) - 1)


# -- special functions -------------------------------------------------------


def _betacf(a: float, b: float, x: float) -> float:
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
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
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    return _betainc(a, b, x, 1.0 - x)


def _betainc(a: float, b: float, x: float, y: float) -> float:
    # y = 1 - x, passed separately so callers can keep it exact when x is near 1
    if a <= 0 or b <= 0:
        raise StatsError("beta parameters must be positive")
    if x <= 0.0:
        return 0.0
    if y <= 0.0:
        return 1.0
    log_front = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log(y)
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, y) / b


def _check_df(*dfs):
    for df in dfs:
        if not df > 0:
            raise StatsError(f"degrees of freedom must be positive, got {df}")


def f_cdf(x: float, d1: float, d2: float) -> float:
    _check_df(d1, d2)
    if x <= 0:
        return 0.0
    return _betainc(d1 / 2.0, d2 / 2.0, d1 * x / (d1 * x + d2), d2 / (d1 * x + d2))


def f_sf(x: float, d1: float, d2: float) -> float:
    """Upper tail P(F > x), computed directly to keep small p-values accurate."""
    _check_df(d1, d2)
    if x <= 0:
        return 1.0
    return _betainc(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * x), d1 * x / (d2 + d1 * x))


def t_cdf(x: float, df: float) -> float:
    _check_df(df)
    if x == 0:
        return 0.5
    tail = 0.5 * _betainc(df / 2.0, 0.5, df / (df + x * x), x * x / (df + x * x))
    return 1.0 - tail if x > 0 else tail


def t_two_sided_p(t: float, df: float) -> float:
    _check_df(df)
    if t == 0:
        return 1.0
    return _betainc(df / 2.0, 0.5, df / (df + t * t), t * t / (df + t * t))


# -- tests -------------------------------------------------------------------


def one_way_anova(groups) -> AnovaResult:
    """Single-factor ANOVA over two or more groups."""
    samples = [_values(g) for g in groups]
    if len(samples) < 2:
        raise StatsError("ANOVA needs at least two groups")
    if any(len(s) < 2 for s in samples):
        raise StatsError("every ANOVA group needs at least two values")
    n_total = sum(len(s) for s in samples)
    k = len(samples)
    grand = math.fsum(math.fsum(s) for s in samples) / n_total
    means = [math.fsum(s) / len(s) for s in samples]
    ss_between = math.fsum(len(s) * (m - grand) ** 2 for s, m in zip(samples, means))
    ss_within = math.fsum(math.fsum((v - m) ** 2 for v in s) for s, m in zip(samples, means))
    df_b, df_w = k - 1, n_total - k
    if ss_within == 0:
        if ss_between == 0:
            raise StatsError("F is undefined: no variance between or within groups")
        return AnovaResult(math.inf, df_b, df_w, 0.0)
    f = (ss_between / df_b) / (ss_within / df_w)
    return AnovaResult(f, df_b, df_w, f_sf(f, df_b, df_w))


def welch_t_test(a: Sample, b: Sample) -> WelchResult:
    """Two-sample t-test without the equal-variance assumption."""
    xa, xb = _values(a), _values(b)
    if len(xa) < 2 or len(xb) < 2:
        raise StatsError("each sample needs at least two values")
    va, vb = variance(xa) / len(xa), variance(xb) / len(xb)
    diff = mean(xa) - mean(xb)
    se2 = va + vb
    if se2 == 0:
        if diff == 0:
            raise StatsError("t is undefined: both samples constant and equal")
        return WelchResult(math.copysign(math.inf, diff), float(len(xa) + len(xb) - 2), 0.0)
    t = diff / math.sqrt(se2)
    df = se2 * se2 / (va * va / (len(xa) - 1) + vb * vb / (len(xb) - 1))
    return WelchResult(t, df, t_two_sided_p(t, df))


def pooled_t_test(a: Sample, b: Sample) -> PooledTResult:
    """Classic Student t-test with pooled variance."""
    xa, xb = _values(a), _values(b)
    na, nb = len(xa), len(xb)
    if na < 2 or nb < 2:
        raise StatsError("each sample needs at least two values")
    df = na + nb - 2
    sp2 = ((na - 1) * variance(xa) + (nb - 1) * variance(xb)) / df
    if sp2 == 0:
        raise StatsError("t is undefined: zero pooled variance")
    t = (mean(xa) - mean(xb)) / math.sqrt(sp2 * (1 / na + 1 / nb))
    return PooledTResult(t, df, t_two_sided_p(t, df))


def pairwise_welch(samples: Sequence[SampleSet]) -> dict:
    """Welch results for every unordered pair, keyed ``(label_a, label_b)`` in input order."""
    return {(a.label, b.label): welch_t_test(a, b) for a, b in combinations(samples, 2)}


# -- quartiles and fences ----------------------------------------------------


def _quantile_sorted(xs, q):
    pos = q * (len(xs) - 1)
    lo = math.floor(pos)
    frac = pos - lo
    if frac == 0:
        return xs[lo]
    return xs[lo] + (xs[lo + 1] - xs[lo]) * frac


def quartiles(values) -> tuple:
    """(Q1, Q3) by linear interpolation with inclusive endpoints."""
    xs = sorted(_values(values))
    if len(xs) < 4:
        raise StatsError("quartiles need at least four values")
    return _quantile_sorted(xs, 0.25), _quantile_sorted(xs, 0.75)


def outlier_bounds(q1: float, q3: float, k: float = 1.5) -> QuartileSummary:
    if q3 < q1:
        raise StatsError(f"Q3 ({q3}) is below Q1 ({q1})")
    iqr = q3 - q1
    return QuartileSummary(q1, q3, iqr, q3 + k * iqr, q1 - k * iqr)


def detect_outliers(values, summary: QuartileSummary) -> OutlierReport:
    xs = _values(values)
    upper = tuple(sorted((v for v in xs if v > summary.ub), reverse=True))
    lower = tuple(sorted(v for v in xs if v < summary.lb))
    return OutlierReport(upper, lower)
