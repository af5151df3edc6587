import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from qcarfuzz.errors import NoRuleFired
from qcarfuzz.fuzzy import (LABELS, OUTPUT_GRID, IT2Partition, RuleBase, T1Partition, _it2_core, _t1_core,
                            it2_infer, it2_output_tables, km_type_reduce, mf_grade, t1_infer)

RULES = RuleBase()
T1 = T1Partition()
IT2 = IT2Partition()

EXPECTED_RULES = [
    ("NB", "NB", "NB"), ("NB", "N", "NB"), ("NB", "Z", "N"), ("NB", "P", "N"), ("NB", "PB", "Z"),
    ("N", "NB", "NB"), ("N", "N", "N"), ("N", "Z", "N"), ("N", "P", "Z"), ("N", "PB", "P"),
    ("Z", "NB", "N"), ("Z", "N", "N"), ("Z", "Z", "Z"), ("Z", "P", "P"), ("Z", "PB", "P"),
    ("P", "NB", "N"), ("P", "N", "Z"), ("P", "Z", "P"), ("P", "P", "P"), ("P", "PB", "PB"),
    ("PB", "NB", "Z"), ("PB", "N", "P"), ("PB", "Z", "P"), ("PB", "P", "PB"), ("PB", "PB", "PB"),
]

GRID21 = np.linspace(-1, 1, 21)


# -- independent oracle -----------------------------------------------------

def tri(u, apex, half, left_shoulder=False, right_shoulder=False):
    if (left_shoulder and u <= apex) or (right_shoulder and u >= apex):
        return 1.0
    if half == 0:
        return 1.0 if u == apex else 0.0
    return max(0.0, 1.0 - abs(u - apex) / half)


def oracle_grades(u, spread=1.0):
    apexes = [-1.0, -0.5, 0.0, 0.5, 1.0]
    return [tri(u, a, 0.5 * spread, i == 0, i == 4) for i, a in enumerate(apexes)]


def oracle_t1(e, de, spread=1.0):
    ge, gd = oracle_grades(e, spread), oracle_grades(de, spread)
    mu = np.zeros_like(OUTPUT_GRID)
    for (le, ld, lo) in EXPECTED_RULES:
        f = min(ge[LABELS.index(le)], gd[LABELS.index(ld)])
        out = np.array([oracle_grades(y, spread)[LABELS.index(lo)] for y in OUTPUT_GRID])
        mu = np.maximum(mu, np.minimum(f, out))
    return 0.0 if mu.sum() == 0 else float((OUTPUT_GRID * mu).sum() / mu.sum())


def brute_force_interval(intervals, centroids):
    f = np.asarray(intervals, dtype=float)
    c = np.asarray(centroids, dtype=float)
    vals = []
    for pick in itertools.product((0, 1), repeat=len(c)):
        w = f[np.arange(len(c)), list(pick)]
        if w.sum() > 0:
            vals.append((w * c).sum() / w.sum())
    return min(vals), max(vals)


# -- rule base ---------------------------------------------------------------

@pytest.mark.parametrize("e_label,de_label,out", EXPECTED_RULES)
def test_rule_table(e_label, de_label, out):
    assert RULES.rule(e_label, de_label) == out


def test_rule_point_symmetry():
    m = RULES.matrix
    for i in range(5):
        for j in range(5):
            assert m[i, j] == 4 - m[4 - i, 4 - j]


def test_rule_base_roundtrip():
    assert RuleBase.from_dict(RULES.to_dict()) == RULES
    with pytest.raises(ValueError):
        RuleBase((("NB",) * 5,) * 4)
    with pytest.raises(ValueError):
        RuleBase((("XX",) * 5,) * 5)


# -- membership functions ----------------------------------------------------

def test_mf_examples():
    assert mf_grade(T1, "Z", 0.0) == 1.0
    assert mf_grade(T1, "Z", 0.25) == 0.5
    assert mf_grade(T1, "NB", -1.0) == 1.0


@given(st.floats(-1, 1), st.floats(0.5, 2.0))
def test_partition_matches_oracle_and_is_symmetric(u, s):
    part = T1Partition(s)
    np.testing.assert_allclose(part.grades(u), oracle_grades(u, s), atol=1e-12)
    g, gm = part.grades(u), part.grades(-u)
    np.testing.assert_allclose(g, gm[::-1], atol=1e-12)


@given(st.floats(-1, 1), st.floats(0.5001, 2.0))
def test_completeness(u, s):
    assert T1Partition(s).grades(u).max() > 0


@given(st.floats(-1, 1), st.floats(0.5, 2.0), st.floats(0, 1))
def test_fou_well_formed(u, s, fou):
    lo, up = IT2Partition(s, fou).grades(u)
    assert np.all(lo <= up + 1e-15)


@given(st.floats(-1, 1), st.floats(0.5, 2.0))
def test_zero_fou_collapses_to_t1(u, s):
    lo, up = IT2Partition(s, 0.0).grades(u)
    t1 = T1Partition(s).grades(u)
    assert np.array_equal(lo, t1) and np.array_equal(up, t1)


def test_partition_validation():
    with pytest.raises(ValueError):
        T1Partition(0.0)
    with pytest.raises(ValueError):
        IT2Partition(1.0, fou=1.5)
    with pytest.raises(ValueError):
        T1Partition(1.0, apexes=(0, 0, 0, 0, 0))


# -- type-1 inference --------------------------------------------------------

def test_t1_center_is_zero():
    assert t1_infer(RULES, T1, T1, 0.0, 0.0) == pytest.approx(0.0, abs=1e-15)


def test_t1_corner_matches_integrated_centroid():
    num, _ = integrate.quad(lambda y: y * tri(y, 1.0, 0.5, right_shoulder=True), 0.5, 1.0)
    den, _ = integrate.quad(lambda y: tri(y, 1.0, 0.5, right_shoulder=True), 0.5, 1.0)
    assert num / den == pytest.approx(5 / 6)
    # the engine uses a 201-point discrete centroid; the shoulder endpoint gets
    # full weight, so it sits slightly above the continuous value
    y = np.linspace(0.5, 1.0, 51)
    mu = (y - 0.5) / 0.5
    discrete = float(np.sum(y * mu) / np.sum(mu))
    out = t1_infer(RULES, T1, T1, 1.0, 1.0)
    assert out == pytest.approx(discrete, abs=1e-12)
    assert out == pytest.approx(num / den, abs=0.01)


def test_t1_antisymmetric_pair():
    assert t1_infer(RULES, T1, T1, 0.3, -0.3) == pytest.approx(0.0, abs=1e-12)
    assert oracle_t1(0.3, -0.3) == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0.6, 2.0))
def test_t1_matches_brute_force(e, de, s):
    part = T1Partition(s)
    assert t1_infer(RULES, part, part, e, de) == pytest.approx(oracle_t1(e, de, s), abs=1e-12)


def test_inputs_are_clipped():
    assert t1_infer(RULES, T1, T1, 5.0, 7.0) == t1_infer(RULES, T1, T1, 1.0, 1.0)


@pytest.mark.parametrize("infer,part", [(t1_infer, T1), (it2_infer, IT2)])
def test_odd_symmetry_grid(infer, part):
    worst = 0.0
    for e in GRID21:
        for de in GRID21:
            worst = max(worst, abs(infer(RULES, part, part, e, de) + infer(RULES, part, part, -e, -de)))
    assert worst < 1e-9


def test_continuity_and_bounds():
    grid = np.linspace(-1, 1, 401)
    rules = RULES.matrix
    pe = T1.array()
    out_t1 = T1.on_grid()
    tables = it2_output_tables(IT2)
    lo, up = IT2.lower(), IT2.upper()
    for kind in ("T1", "IT2"):
        vals = np.empty((401, 401))
        for i, e in enumerate(grid):
            for j, de in enumerate(grid):
                if kind == "T1":
                    vals[i, j] = _t1_core(rules, pe, pe, out_t1, OUTPUT_GRID, e, de)
                else:
                    vals[i, j] = _it2_core(rules, lo, up, lo, up, *tables, 0, e, de)
        assert np.all(np.abs(vals) <= 1.0)
        jump = max(np.abs(np.diff(vals, axis=0)).max(), np.abs(np.diff(vals, axis=1)).max())
        assert jump <= 0.05, kind


# -- interval type-2 ---------------------------------------------------------

def test_it2_center_is_zero():
    assert it2_infer(RULES, IT2, IT2, 0.0, 0.0) == pytest.approx(0.0, abs=1e-15)


def test_it2_zero_fou_equals_t1():
    part = IT2Partition(1.0, 0.0)
    worst = max(abs(it2_infer(RULES, part, part, e, de) - t1_infer(RULES, T1, T1, e, de))
                for e in GRID21 for de in GRID21)
    assert worst < 1e-9


def test_it2_differs_from_t1_with_fou():
    assert it2_infer(RULES, IT2, IT2, 0.4, 0.1) != pytest.approx(t1_infer(RULES, T1, T1, 0.4, 0.1), abs=1e-6)


def test_cos_reduction_is_odd_and_bounded():
    for e in GRID21:
        for de in GRID21:
            y = it2_infer(RULES, IT2, IT2, e, de, type_reduction="cos")
            ym = it2_infer(RULES, IT2, IT2, -e, -de, type_reduction="cos")
            assert abs(y) <= 1.0 and abs(y + ym) < 1e-9


# -- Karnik-Mendel -----------------------------------------------------------

def test_km_singleton():
    assert km_type_reduce([(1.0, 1.0)], [0.3]) == (0.3, 0.3)


def test_km_symmetric_pair():
    assert km_type_reduce([(1, 1), (1, 1)], [-1, 1]) == (0.0, 0.0)


def test_km_three_rules():
    intervals = [(0.2, 0.6), (0.1, 0.9), (0.4, 0.5)]
    centroids = [-0.7, 0.1, 0.8]
    np.testing.assert_allclose(km_type_reduce(intervals, centroids),
                               brute_force_interval(intervals, centroids), rtol=0, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 8).flatmap(lambda n: st.tuples(
    st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=n, max_size=n),
    st.lists(st.floats(-1, 1), min_size=n, max_size=n))))
def test_km_matches_exhaustive_search(data):
    raw, centroids = data
    intervals = [(min(a, b), max(a, b)) for a, b in raw]
    if max(u for _, u in intervals) == 0:
        return
    yl, yr = km_type_reduce(intervals, centroids)
    bl, br = brute_force_interval(intervals, centroids)
    assert yl == pytest.approx(bl, rel=1e-12, abs=1e-12)
    assert yr == pytest.approx(br, rel=1e-12, abs=1e-12)
    assert yl <= yr + 1e-15


def test_km_no_rule_fired():
    with pytest.raises(NoRuleFired, match="no rule fired"):
        km_type_reduce([(0, 0), (0, 0)], [0.1, 0.2])


def test_km_rejects_malformed_intervals():
    with pytest.raises(ValueError):
        km_type_reduce([(0.5, 0.2)], [0.0])
    with pytest.raises(ValueError):
        km_type_reduce([(0.1, 0.2)], [0.0, 1.0])
