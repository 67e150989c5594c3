import math
import random
import statistics

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import edit_distance
from postocr.errors import EmptyInput
from postocr.metrics import (
    UNDEFINED_WORSE,
    CerReport,
    aggregate,
    cer,
    improvement,
    levenshtein,
    summarize,
)

short = st.text(alphabet="abcé ", max_size=10)


@settings(max_examples=300, deadline=None)
@given(short, short)
def test_levenshtein_matches_table_oracle(a, b):
    assert levenshtein(a, b) == edit_distance(a, b)
    assert levenshtein(a, b) == levenshtein(b, a)


@settings(max_examples=300, deadline=None)
@given(short, short, short)
def test_triangle_inequality(a, b, c):
    assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)


@given(short)
def test_cer_of_self_is_zero(x):
    assert cer(x, x) == 0


def test_cer_percent():
    assert cer("abd", "abc") == pytest.approx(100 / 3)
    assert cer("", "") == 0
    assert cer("abc", "") == 300.0  # empty reference counts as length 1


def test_improvement_examples():
    assert round(improvement(24.77, 15.62), 2) == 36.94
    assert improvement(33.54, 29.41) == pytest.approx(12.31, abs=0.01)
    assert improvement(10, 10) == 0
    assert improvement(0, 0) == 0
    assert improvement(0, 3) == UNDEFINED_WORSE
    with pytest.raises(ValueError):
        improvement(-1, 0)


@given(st.floats(0.01, 100), st.floats(0, 100))
def test_improvement_sign(before, after):
    imp = improvement(before, after)
    assert (imp > 0) == (after < before)
    assert improvement(before, before) == 0


def test_summarize_examples():
    s = summarize([1, 2, 3, 4, 5])
    assert (s.mean, s.p50, s.min, s.max, s.count) == (3, 3, 1, 5, 5)
    s = summarize([7])
    assert (s.min, s.p25, s.p50, s.p75, s.max, s.std) == (7, 7, 7, 7, 7, 0)
    with pytest.raises(EmptyInput):
        summarize([])


def _quantile(sorted_x, q):
    h = (len(sorted_x) - 1) * q
    lo = math.floor(h)
    hi = min(lo + 1, len(sorted_x) - 1)
    return sorted_x[lo] + (h - lo) * (sorted_x[hi] - sorted_x[lo])


def test_summarize_against_straightforward_version():
    rng = random.Random(0)
    for _ in range(100):
        x = [rng.uniform(-50, 100) for _ in range(rng.randint(1, 40))]
        s = summarize(x)
        xs = sorted(x)
        assert s.mean == pytest.approx(statistics.fmean(x), abs=1e-9)
        assert s.std == pytest.approx(statistics.stdev(x) if len(x) > 1 else 0.0, abs=1e-9)
        for q, got in ((0.25, s.p25), (0.5, s.p50), (0.75, s.p75)):
            assert got == pytest.approx(_quantile(xs, q), abs=1e-9)
        assert (s.min, s.max) == (xs[0], xs[-1])


def test_aggregate_modes_and_exclusions():
    reports = [CerReport("a", 10, 5), CerReport("b", 20, 20), CerReport("c", 0, 4)]
    agg = aggregate(reports)
    assert agg.excluded == 1
    assert agg.mean_improvement == pytest.approx(25.0)
    assert agg.mean_cer_before == pytest.approx(10.0)
    assert agg.mean_cer_after == pytest.approx(29 / 3)
    assert agg.ratio_of_means == pytest.approx(improvement(10.0, 29 / 3))
