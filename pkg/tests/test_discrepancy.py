import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from udk.discrepancy import (
    extreme_discrepancy_1d,
    partition_discrepancy,
    star_discrepancy_1d,
    star_discrepancy_dd,
    star_discrepancy_prefixes,
)
from udk.errors import EmptyPartition, EmptyPointSet, TooLarge, Unsorted, UnsupportedDim
from udk.refine import ls_rule, rho_refine_n, RefinementRule
from udk.sequences import PointSet, halton, van_der_corput

F = Fraction
fractions_01 = st.fractions(min_value=0, max_value=1, max_denominator=64).filter(lambda x: x < 1)
floats_01 = st.floats(min_value=0, max_value=1, exclude_max=True, allow_nan=False)


def grid(n):
    return PointSet.from_values([F(i, n) for i in range(1, n + 1)])


def test_grid_star_and_extreme():
    assert star_discrepancy_1d(grid(10), exact=True) == F(1, 10)
    assert extreme_discrepancy_1d(grid(10), exact=True) == F(1, 10)


def test_single_points():
    assert star_discrepancy_1d(PointSet.from_values([F(1, 2)]), exact=True) == F(1, 2)


def test_single_point_extreme_is_one():
    # (1/4, 1) alone gives 3/4; shrinking [1/4, 1/4 + e) around the point gives 1
    value = extreme_discrepancy_1d(PointSet.from_values([F(1, 4)]), exact=True)
    assert value == oracles.extreme_by_pairs([F(1, 4)]) == 1


def test_vdc_four_points():
    assert star_discrepancy_1d(van_der_corput(4), exact=True) == F(1, 4)


def test_float_input_gives_float():
    value = star_discrepancy_1d(PointSet.from_values([0.5]))
    assert isinstance(value, float) and value == 0.5


def test_empty():
    with pytest.raises(EmptyPointSet):
        star_discrepancy_1d(PointSet(1, ()))


def test_partition_examples():
    assert partition_discrepancy([F(1, 2), F(1)], exact=True) == F(1, 2)
    assert partition_discrepancy([F(i, 8) for i in range(1, 9)], exact=True) == F(1, 8)
    assert partition_discrepancy([F(1, 3), F(5, 9), F(1)], exact=True) == F(4, 9)


def test_partition_validation():
    with pytest.raises(Unsorted):
        partition_discrepancy([F(1, 2), F(1, 3), F(1)])
    with pytest.raises(EmptyPartition):
        partition_discrepancy([])


def test_partition_equals_extreme_of_endpoints():
    breaks = rho_refine_n(RefinementRule.rational([F(1, 4), F(1, 4), F(1, 2)]), 6).breaks()
    assert partition_discrepancy(breaks, exact=True) == oracles.extreme_by_pairs(breaks)


def test_partition_discrepancy_falls_below_one_percent():
    rule = ls_rule(1, 1)
    values = []
    for n in (10, 15, 20, 22):
        values.append(rho_refine_n(rule, n).discrepancy())
    assert values == sorted(values, reverse=True)
    assert rho_refine_n(rule, 22).k > 10**4 and values[-1] < 0.01


def test_dd_single_corner_point():
    assert star_discrepancy_dd(PointSet.from_points([(F(1), F(1))]), exact=True) == 1


def test_dd_centred_grid_matches_box_oracle():
    pts = [(F(2 * i - 1, 4), F(2 * j - 1, 4)) for i in (1, 2) for j in (1, 2)]
    value = star_discrepancy_dd(PointSet.from_points(pts), exact=True)
    assert value == oracles.star_box_oracle(pts) == F(7, 16)


def test_dd_halton_16():
    ps = halton(16, (2, 3))
    value = star_discrepancy_dd(ps, exact=True)
    assert value == oracles.star_box_oracle(list(ps))
    assert value <= F(1, 4)


def test_dd_caps():
    with pytest.raises(TooLarge):
        star_discrepancy_dd(halton(257, (2, 3)))
    with pytest.raises(UnsupportedDim):
        star_discrepancy_dd(halton(4, (2, 3, 5, 7)))
    assert star_discrepancy_dd(halton(300, (2, 3)), max_n=300) > 0


def test_prefix_scan_matches_direct():
    ps = van_der_corput(300)
    scan = star_discrepancy_prefixes(ps)
    for n in (1, 2, 3, 7, 64, 100, 255, 300):
        assert scan[n - 1] == n * star_discrepancy_1d(ps.prefix(n), exact=True)


@given(st.lists(fractions_01, min_size=1, max_size=12))
def test_exact_star_matches_pair_oracle(values):
    ps = PointSet.from_values(values)
    assert star_discrepancy_1d(ps, exact=True) == oracles.star_by_pairs(values)


@given(st.lists(fractions_01, min_size=1, max_size=8))
def test_exact_extreme_matches_pair_oracle(values):
    ps = PointSet.from_values(values)
    assert extreme_discrepancy_1d(ps, exact=True) == oracles.extreme_by_pairs(values)


@given(st.lists(floats_01, min_size=1, max_size=30))
def test_float_path_is_exact_on_the_float_values(values):
    ps = PointSet.from_values(values)
    assert star_discrepancy_1d(ps, exact=True) == oracles.star_by_pairs(values)


@given(st.lists(floats_01, min_size=1, max_size=40))
def test_discrepancy_inequalities(values):
    ps = PointSet.from_values(values)
    star = star_discrepancy_1d(ps, exact=True)
    extreme = extreme_discrepancy_1d(ps, exact=True)
    assert star <= extreme <= 2 * star
    assert F(1, len(values)) <= extreme <= 1


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(fractions_01, fractions_01), min_size=1, max_size=9))
def test_dd_matches_box_oracle_2d(points):
    ps = PointSet.from_points(points)
    assert star_discrepancy_dd(ps, exact=True) == oracles.star_box_oracle(points)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.tuples(floats_01, floats_01, floats_01), min_size=1, max_size=6))
def test_dd_matches_box_oracle_3d(points):
    ps = PointSet.from_points(points)
    assert star_discrepancy_dd(ps, exact=True) == oracles.star_box_oracle(points)


def test_continuous_points_against_dense_grid():
    # endpoints off the grid cost up to one step at each end of an interval
    rng = random.Random(7)
    step = 1e-4
    for _ in range(30):
        values = [rng.random() for _ in range(rng.randint(1, 50))]
        ps = PointSet.from_values(values)
        assert abs(star_discrepancy_1d(ps) - oracles.star_on_grid(values)) <= step + 1e-12
        assert abs(extreme_discrepancy_1d(ps) - oracles.extreme_on_grid(values)) <= 2 * step + 1e-12
