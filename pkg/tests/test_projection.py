from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ksep.boolfn import Label, constant, from_index, parity
from ksep.projection import (Direction, ThreeSepParams, margin_key, margin_score, min_k_over,
                             normalized_gap2, profile, profile_points, profile_vertices)


def test_direction_parse_and_exact_weights():
    w = Direction.parse("3/4,1,-1/4")
    assert w.weights == (Fraction(3, 4), Fraction(1), Fraction(-1, 4))
    assert w.numerators == (3, 4, -1) and w.denominator == 4
    assert str(w) == "(3/4,1,-1/4)"
    with pytest.raises(ValueError):
        Direction.parse("1,x")
    with pytest.raises(ValueError):
        Direction.of([0, 0])


def test_function_27_worked_example():
    f = from_index(3, 27)
    p = profile(f, Direction.parse("3/4,1,-1/4"))
    assert p.valid and p.k == 4 and p.min_gap == Fraction(1, 4)
    assert p.pattern_string() == "11 0 11 000"
    # read right to left this is "000 11 0 11"
    assert p.pattern_string(reverse=True) == "000 11 0 11"
    q = profile(f, Direction.parse("1,1/4,-3/4"))
    assert q.k == 4 and q.min_gap == Fraction(1, 4)
    assert q.pattern_string(reverse=True) == "0 1 000 111"


def test_xor_main_diagonal_groups():
    p = profile(from_index(2, 6), Direction.of([1, 1]))
    assert p.k == 3
    assert [g.members for g in p.groups] == [(0,), (1, 2), (3,)]
    assert p.cluster_sizes == (1, 2, 1)
    assert p.run_pattern == ((Label.MINUS, 1), (Label.PLUS, 1), (Label.MINUS, 1))


def test_mixed_group_invalidates():
    # (1,0) puts vertices 0 and 1 together; XOR differs there
    p = profile(from_index(2, 6), Direction.of([1, 0]))
    assert not p.valid and p.k is None and p.min_gap is None
    assert any(g.label is Label.MIXED for g in p.groups)
    assert p.pattern_string() == ""


def test_constant_is_one_run():
    p = profile(constant(3, False), Direction.of([1, 2, 4]))
    assert p.k == 1 and p.min_gap is None
    assert margin_score(p).min_gap == float("inf")


def test_margin_key_orders():
    f = from_index(3, 27)
    a = profile(f, Direction.parse("3/4,1,-1/4"))
    b = profile(f, Direction.parse("1,2,4"))
    assert margin_key(a) < margin_key(b)  # k=4 beats the tie-free k of (1,2,4)
    with pytest.raises(ValueError):
        margin_key(a, "nope")
    with pytest.raises(ValueError):
        margin_score(profile(from_index(2, 6), Direction.of([1, 0])))


def test_min_k_over_picks_lowest_k_widest_margin():
    f = from_index(3, 27)
    ws = [Direction.parse(s) for s in ("1,2,4", "3/4,1,-1/4", "1,1/4,-3/4", "1,0,0")]
    res = min_k_over(f, ws)
    assert res.k == 4
    assert set(map(str, res.best)) == {"(3/4,1,-1/4)", "(1,1/4,-3/4)"}
    assert min_k_over(parity(2), [Direction.of([1, 0])]).unresolved
    with pytest.raises(ValueError):
        min_k_over(f, [])


def test_normalized_gap_is_scale_free():
    f = from_index(3, 27)
    w = Direction.parse("3/4,1,-1/4")
    p, q = profile(f, w), profile(f, w.scaled(3))
    assert q.min_gap == 3 * p.min_gap
    assert normalized_gap2(p, w) == normalized_gap2(q, w.scaled(3))


def test_profile_points_float_and_tolerance():
    pts = np.array([[0.0], [1.0], [1.0 + 1e-12], [2.0]])
    labs = [False, True, True, False]
    p = profile_points(pts, labs, [1.0])
    assert p.k == 3 and len(p.groups) == 4
    q = profile_points(pts, labs, [1.0], atol=1e-9)
    assert len(q.groups) == 3
    with pytest.raises(ValueError):
        profile_points(pts, labs[:2], [1.0])
    with pytest.raises(ValueError):
        profile_points(pts, labs, [1.0, 2.0])


def test_profile_vertices_float_matches_exact():
    f = from_index(3, 27)
    exact = profile(f, Direction.parse("3/4,1,-1/4"))
    approx = profile_vertices(f, [0.75, 1.0, -0.25])
    assert approx.k == exact.k and approx.run_pattern == exact.run_pattern


def test_three_sep_params():
    assert ThreeSepParams.checked(0.5, 1.5).t == 1.0
    with pytest.raises(ValueError):
        ThreeSepParams.checked(1, 1)


def test_profile_json():
    d = profile(from_index(3, 27), Direction.parse("3/4,1,-1/4")).to_json()
    assert d["k"] == 4 and d["min_gap"] == "1/4"
    assert d["groups"][0] == {"value": "-1/4", "members": [1], "label": "+"}


functions3 = st.integers(0, 255).map(lambda i: from_index(3, i))
directions3 = st.lists(st.integers(-4, 4), min_size=3, max_size=3).filter(any).map(Direction.of)


@settings(max_examples=200)
@given(functions3, directions3, st.integers(1, 7))
def test_sign_scale_complement_symmetry(f, w, c):
    p = profile(f, w)
    for q in (profile(f, -w), profile(f, w.scaled(c)), profile(~f, w)):
        assert q.valid == p.valid and q.k == p.k
    if p.valid and p.min_gap is not None:
        assert profile(f, w.scaled(c)).min_gap == c * p.min_gap
        assert profile(f, -w).min_gap == p.min_gap


@settings(max_examples=200)
@given(functions3, directions3)
def test_run_count_law(f, w):
    """k = 1 + number of label changes between consecutive groups."""
    p = profile(f, w)
    if p.valid:
        changes = sum(a.label is not b.label for a, b in zip(p.groups, p.groups[1:]))
        assert p.k == 1 + changes
        assert sum(p.cluster_sizes) == 8
