import csv
import math
from importlib import resources

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special
from scipy import stats as sps

from qcompose.stats import (
    QuartileSummary,
    SampleSet,
    StatsError,
    betainc,
    detect_outliers,
    f_cdf,
    f_sf,
    one_way_anova,
    outlier_bounds,
    pairwise_welch,
    pooled_t_test,
    quartiles,
    t_cdf,
    t_two_sided_p,
    welch_t_test,
)


def _csv_columns(name):
    with resources.files("qcompose.data").joinpath(name).open() as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    return {h: [float(r[i]) for r in body] for i, h in enumerate(header)}


QUANTITIES = _csv_columns("quantities_by_set.csv")
TOP_SCORES = _csv_columns("top_scores_by_set.csv")
SETS = ["Pseudo", "Q5", "Q15", "Q25"]

samples = st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=2, max_size=12).filter(
    lambda xs: max(xs) - min(xs) > 1e-3)


# -- distribution functions against scipy / mpmath -----------------------------


@given(st.floats(0.05, 60), st.floats(0.05, 60), st.floats(0, 1))
@settings(max_examples=300, deadline=None)
def test_betainc_matches_scipy(a, b, x):
    assert betainc(a, b, x) == pytest.approx(special.betainc(a, b, x), abs=1e-8)


@pytest.mark.parametrize("a,b,x", [(0.5, 0.5, 0.3), (2.0, 18.0, 0.95), (1.5, 600.0, 0.001), (30, 3, 0.9)])
def test_betainc_matches_mpmath(a, b, x):
    assert betainc(a, b, x) == pytest.approx(float(mpmath.betainc(a, b, 0, x, regularized=True)), abs=1e-10)


@given(st.floats(0, 50), st.integers(1, 200), st.integers(1, 5000))
@settings(max_examples=200, deadline=None)
def test_f_cdf_matches_scipy(x, d1, d2):
    assert f_cdf(x, d1, d2) == pytest.approx(sps.f.cdf(x, d1, d2), abs=1e-8)
    assert f_sf(x, d1, d2) == pytest.approx(sps.f.sf(x, d1, d2), abs=1e-8)


@given(st.floats(-40, 40), st.floats(0.5, 3000))
@settings(max_examples=200, deadline=None)
def test_t_cdf_matches_scipy(x, df):
    assert t_cdf(x, df) == pytest.approx(sps.t.cdf(x, df), abs=1e-8)
    assert t_two_sided_p(x, df) == pytest.approx(2 * sps.t.sf(abs(x), df), abs=1e-8)


@pytest.mark.parametrize("df", [1, 2.5, 36, 1724])
def test_t_cdf_symmetry_point(df):
    assert t_cdf(0, df) == 0.5


def test_f_cdf_support_and_published_value():
    assert f_cdf(0, 3, 36) == 0.0
    assert f_cdf(-1, 3, 36) == 0.0
    assert f_cdf(1.2714, 3, 36) == pytest.approx(0.701, abs=0.005)


@pytest.mark.parametrize("call", [lambda: f_cdf(1, 0, 3), lambda: f_cdf(1, 3, -1), lambda: t_cdf(1, 0),
                                  lambda: betainc(0, 1, 0.5)])
def test_bad_degrees_of_freedom(call):
    with pytest.raises(StatsError):
        call()


# -- ANOVA -------------------------------------------------------------------


def test_anova_on_published_quantities():
    r = one_way_anova([SampleSet(s, QUANTITIES[s]) for s in SETS])
    assert (r.df_between, r.df_within) == (3, 36)
    assert r.f_stat == pytest.approx(1.271, abs=0.005)
    assert r.p_value == pytest.approx(0.299, abs=0.005)
    ref = sps.f_oneway(*(QUANTITIES[s] for s in SETS))
    assert r.f_stat == pytest.approx(ref.statistic, rel=1e-12)
    assert r.p_value == pytest.approx(ref.pvalue, abs=1e-10)


def test_published_quantity_means():
    means = [math.fsum(QUANTITIES[s]) / 10 for s in SETS]
    assert means == pytest.approx([120, 120.9, 122, 90])


def test_anova_equal_means_gives_zero():
    r = one_way_anova([[1, 3], [2, 2], [3, 1]])
    assert r.f_stat == 0.0 and r.p_value == 1.0


def test_anova_two_groups_is_pooled_t_squared():
    a, b = [3.1, 4.7, 2.2, 5.0, 3.9], [6.3, 5.5, 7.1, 4.8, 6.6]
    assert one_way_anova([a, b]).f_stat == pytest.approx(pooled_t_test(a, b).t_stat ** 2, abs=1e-9)


@given(samples, samples)
@settings(max_examples=100, deadline=None)
def test_anova_t_relationship_property(a, b):
    f = one_way_anova([a, b]).f_stat
    t = pooled_t_test(a, b).t_stat
    assert f == pytest.approx(t * t, rel=1e-9, abs=1e-9)


@given(samples, samples, samples, st.floats(0.01, 100), st.floats(-500, 500))
@settings(max_examples=100, deadline=None)
def test_anova_scale_and_shift_invariant(a, b, c, scale, shift):
    base = one_way_anova([a, b, c])
    scaled = one_way_anova([[scale * v for v in g] for g in (a, b, c)])
    moved = one_way_anova([[v + shift for v in g] for g in (a, b, c)])
    assert scaled.f_stat == pytest.approx(base.f_stat, rel=1e-9, abs=1e-9)
    assert moved.f_stat == pytest.approx(base.f_stat, rel=1e-6, abs=1e-6)
    assert 0.0 <= base.p_value <= 1.0


@pytest.mark.parametrize("groups", [[[1, 2, 3]], [[1, 2], [3]], [[4, 4], [4, 4]]])
def test_anova_errors(groups):
    with pytest.raises(StatsError):
        one_way_anova(groups)


def test_anova_zero_within_nonzero_between():
    r = one_way_anova([[1, 1], [2, 2]])
    assert r.f_stat == math.inf and r.p_value == 0.0


# -- Welch ------------------------------------------------------------------------


def test_welch_identical_samples():
    r = welch_t_test([1, 2, 3, 4, 5], [1, 2, 3, 4, 5])
    assert r.t_stat == 0.0 and r.p_value == 1.0


def _t_pdf(x, nu):
    return (mpmath.gamma((nu + 1) / 2) / (mpmath.sqrt(nu * mpmath.pi) * mpmath.gamma(nu / 2))
            * (1 + x * x / nu) ** (-(nu + 1) / 2))


def test_welch_hand_computed():
    # means 120 and 90; variances 10/4 and 58/4; se^2 = 2.5/5 + 14.5/5 = 3.4
    # df = 3.4^2 / ((0.5^2)/4 + (2.9^2)/4) = 11.56 / 2.165
    a, b = [120, 121, 119, 122, 118], [90, 95, 85, 92, 88]
    t = 30 / math.sqrt(3.4)
    df = 11.56 / 2.165
    mpmath.mp.dps = 30
    p = float(2 * mpmath.quad(lambda x: _t_pdf(x, mpmath.mpf(df)), [t, mpmath.inf]))
    r = welch_t_test(a, b)
    assert r.t_stat == pytest.approx(t, rel=1e-12)
    assert r.df == pytest.approx(df, rel=1e-12)
    assert r.p_value == pytest.approx(p, rel=1e-7)
    assert r.t_stat == pytest.approx(16.2698, abs=1e-4)
    assert r.df == pytest.approx(5.3395, abs=1e-4)


@given(samples, samples)
@settings(max_examples=150, deadline=None)
def test_welch_antisymmetry_and_scipy(a, b):
    ab, ba = welch_t_test(a, b), welch_t_test(b, a)
    assert ab.t_stat == -ba.t_stat
    assert ab.p_value == pytest.approx(ba.p_value, abs=1e-15)
    ref = sps.ttest_ind(a, b, equal_var=False)
    assert ab.t_stat == pytest.approx(ref.statistic, rel=1e-7, abs=1e-9)
    assert ab.p_value == pytest.approx(ref.pvalue, abs=1e-8)
    assert 0.0 <= ab.p_value <= 1.0 and ab.df > 0


def test_welch_shift_invariant():
    a, b = [3.1, 4.7, 2.2, 5.0], [6.3, 5.5, 7.1, 4.8, 6.6]
    base = welch_t_test(a, b).t_stat
    assert welch_t_test([v + 1e3 for v in a], [v + 1e3 for v in b]).t_stat == pytest.approx(base, abs=1e-9)


def test_welch_errors():
    with pytest.raises(StatsError):
        welch_t_test([2, 2, 2], [2, 2])
    with pytest.raises(StatsError):
        welch_t_test([1], [1, 2])


def test_pairwise_welch_keys():
    sets = [SampleSet(s, QUANTITIES[s]) for s in SETS]
    pairs = pairwise_welch(sets)
    assert list(pairs) == [("Pseudo", "Q5"), ("Pseudo", "Q15"), ("Pseudo", "Q25"), ("Q5", "Q15"), ("Q5", "Q25"),
                           ("Q15", "Q25")]
    # the 15% vs 25% quantity comparison is not significant
    assert pairs[("Q15", "Q25")].p_value > 0.05


# -- quartiles and outliers ----------------------------------------------------------


@pytest.mark.parametrize("values,expected", [([1, 2, 3, 4, 5], (2, 4)), ([1, 2, 3, 4], (1.75, 3.25)),
                                             ([5, 5, 5, 5, 5], (5, 5)), ([4, 1, 3, 2], (1.75, 3.25))])
def test_quartile_examples(values, expected):
    assert quartiles(values) == pytest.approx(expected)


@given(st.lists(st.floats(-1e6, 1e6), min_size=4, max_size=60))
def test_quartiles_match_numpy_linear(values):
    import numpy as np

    q1, q3 = quartiles(values)
    assert q1 == pytest.approx(np.quantile(values, 0.25), abs=1e-6)
    assert q3 == pytest.approx(np.quantile(values, 0.75), abs=1e-6)


def test_quartiles_need_four_values():
    with pytest.raises(StatsError):
        quartiles([1, 2, 3])


@pytest.mark.parametrize("q1,q3,iqr,ub,lb,tol", [
    (1.948, 2.688, 0.740, 3.798, 0.838, 5e-4),  # printed to three decimals
    (1.925, 2.662, 0.737, 3.767, 0.820, 5e-4),
    (1.852, 2.639, 0.787, 3.819, 0.672, 0.002),
])
def test_published_bounds(q1, q3, iqr, ub, lb, tol):
    s = outlier_bounds(q1, q3)
    assert s.iqr == pytest.approx(iqr, abs=1e-9)
    assert s.ub == pytest.approx(ub, abs=tol)
    assert s.lb == pytest.approx(lb, abs=tol)


def test_bounds_reject_inverted_quartiles():
    with pytest.raises(StatsError):
        outlier_bounds(3.0, 2.0)


def _published_summary(label):
    with resources.files("qcompose.data").joinpath("score_quartiles.csv").open() as fh:
        row = next(r for r in csv.DictReader(fh) if r["set"] == label)
    return QuartileSummary(*(float(row[k]) for k in ("q1", "q3", "iqr", "ub", "lb")))


@pytest.mark.parametrize("label,count", [("Pseudo", 6), ("Q5", 4), ("Q15", 3), ("Q25", 3)])
def test_published_outlier_counts(label, count):
    summary = _published_summary(label)
    report = detect_outliers(TOP_SCORES[label], summary)
    assert len(report.upper_outliers) == count
    assert report.lower_outliers == ()
    assert list(report.upper_outliers) == sorted(report.upper_outliers, reverse=True)


def test_pseudo_boundary_value_excluded():
    report = detect_outliers(TOP_SCORES["Pseudo"], outlier_bounds(1.948, 2.688))
    assert 3.776 not in report.upper_outliers and report.count == 6


@given(st.lists(st.floats(-100, 100), min_size=4, max_size=40), st.randoms())
def test_outlier_count_permutation_invariant(values, rnd):
    s = outlier_bounds(*quartiles(values))
    shuffled = list(values)
    rnd.shuffle(shuffled)
    a, b = detect_outliers(values, s), detect_outliers(shuffled, s)
    assert a == b
    assert all(v > s.ub for v in a.upper_outliers) and all(v < s.lb for v in a.lower_outliers)
    assert list(a.lower_outliers) == sorted(a.lower_outliers)
