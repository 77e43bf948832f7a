import math
import random
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from udk.errors import BudgetExceeded, DepthTooShallow, UnequalRatios, ValidationError
from udk.fractal import (
    AddressWord,
    apply_address,
    elementary_discrepancy_partition,
    elementary_discrepancy_points,
    elementary_discrepancy_sweep,
    khodak_fractal_partition,
    line_system,
    moran_dimension,
    partition_deviation_by_level,
    preset,
    unit_interval,
    vdc_fractal_partition,
    vdc_fractal_points,
)
from udk.khodak import external_nodes, r_sequence
from udk.refine import RefinementRule, ls_rule, rho_refine_n
from udk.sequences import van_der_corput

F = Fraction
GOLDEN_SIERPINSKI = [
    (0, 0), (0, F(1, 2)), (F(1, 2), F(1, 2)),
    (0, F(1, 4)), (0, F(3, 4)), (F(1, 2), F(3, 4)),
    (F(1, 4), F(1, 4)), (F(1, 4), F(3, 4)), (F(3, 4), F(3, 4)),
    (0, F(1, 8)), (0, F(5, 8)), (F(1, 2), F(5, 8)),
    (0, F(3, 8)), (0, F(7, 8)), (F(1, 2), F(7, 8)),
    (F(1, 4), F(3, 8)), (F(1, 4), F(7, 8)), (F(3, 4), F(7, 8)),
    (F(1, 8), F(1, 8)), (F(1, 8), F(5, 8)), (F(5, 8), F(5, 8)),
    (F(1, 8), F(3, 8)), (F(1, 8), F(7, 8)), (F(5, 8), F(7, 8)),
    (F(3, 8), F(3, 8)), (F(3, 8), F(7, 8)), (F(7, 8), F(7, 8)),
]


def test_moran_examples():
    assert abs(moran_dimension([F(1, 3)] * 2) - math.log(2) / math.log(3)) < 1e-12
    assert abs(moran_dimension([F(1, 2)] * 3) - math.log(3) / math.log(2)) < 1e-12
    assert abs(moran_dimension([F(1, 3)] * 4) - math.log(4) / math.log(3)) < 1e-12


@given(st.lists(st.floats(0.01, 0.95), min_size=2, max_size=6))
def test_moran_residual(ratios):
    s = moran_dimension(ratios)
    assert abs(math.fsum(c**s for c in ratios) - 1) < 1e-14


@given(st.integers(2, 9), st.floats(0.02, 0.98))
def test_moran_equal_ratio_closed_form(m, c):
    assert abs(moran_dimension([c] * m) - math.log(m) / math.log(1 / c)) < 1e-12


@pytest.mark.parametrize("name", ["cantor", "sierpinski-right", "sierpinski-equilateral", "koch"])
def test_maps_are_similarities(name):
    rng = random.Random(3)
    system = preset(name)
    for f in system.maps:
        for _ in range(20):
            x = [rng.uniform(-2, 2) for _ in range(system.dim)]
            y = [rng.uniform(-2, 2) for _ in range(system.dim)]
            gap = math.dist([float(v) for v in f(x)], [float(v) for v in f(y)])
            assert abs(gap - float(f.ratio) * math.dist(x, y)) < 1e-12


def test_sierpinski_golden_points():
    fp = vdc_fractal_points(preset("sierpinski-right"), 27)
    assert list(fp.points) == [tuple(F(c) for c in p) for p in GOLDEN_SIERPINSKI]


def test_unit_interval_is_vdc():
    for m in (2, 3, 5):
        fp = vdc_fractal_points(unit_interval(m), 60)
        assert fp.points == van_der_corput(60, m)


def test_single_point_is_start():
    fp = vdc_fractal_points(preset("cantor"), 1)
    assert list(fp.points) == [(F(0),)] and len(fp.words[0]) == 0


def test_addresses_name_their_points():
    system = preset("sierpinski-right")
    fp = vdc_fractal_points(system, 40)
    for point, word in zip(fp.points, fp.words):
        assert apply_address(system, word, system.start) == point


def test_address_strings():
    fp = vdc_fractal_points(preset("sierpinski-right"), 9)
    # point 2 is psi_2 applied to the start, the most recent map printed last
    assert str(fp.words[1]) == "12"
    assert AddressWord.parse("12") == fp.words[1]


def test_apply_address():
    cantor = preset("cantor")
    assert apply_address(cantor, AddressWord(()), (F(1, 5),)) == (F(1, 5),)
    assert apply_address(cantor, AddressWord((2,)), (F(0),)) == (F(2, 3),)
    assert apply_address(cantor, AddressWord((1, 2)), (F(0),)) == (F(2, 3),)
    assert apply_address(cantor, AddressWord((2, 1)), (F(0),)) == (F(2, 9),)


def test_unequal_ratios_rejected():
    with pytest.raises(UnequalRatios):
        vdc_fractal_points(line_system([F(1, 2), F(1, 4)]), 4)


def test_start_must_be_fixed():
    with pytest.raises(ValidationError):
        vdc_fractal_points(preset("cantor"), 4, x0=(F(1),))


def test_vdc_partition_levels():
    cantor = vdc_fractal_partition(preset("cantor"), 2)
    assert len(cantor) == 4 and set(cantor.probabilities) == {0.25}
    assert len(vdc_fractal_partition(preset("cantor"), 0)) == 1
    sierpinski = vdc_fractal_partition(preset("sierpinski-right"), 1)
    assert len(sierpinski) == 3 and all(abs(p - 1 / 3) < 1e-15 for p in sierpinski.probabilities)
    with pytest.raises(BudgetExceeded):
        vdc_fractal_partition(preset("cantor"), 12, cap=1000)


def test_khodak_partition_first_step():
    fp = khodak_fractal_partition(line_system([F(1, 2), F(1, 4)]), 1)
    golden = (math.sqrt(5) - 1) / 2
    assert len(fp) == 2
    assert abs(fp.probabilities[0] - golden) < 1e-14
    assert abs(fp.probabilities[1] - golden**2) < 1e-14


def test_khodak_partition_matches_ls_rule():
    system = line_system([F(1, 2), F(1, 4)])
    for n in range(0, 12):
        fp = khodak_fractal_partition(system, n)
        part = rho_refine_n(ls_rule(1, 1), n)
        # letter 1 has probability alpha, letter 2 alpha**2
        weights = sorted(Counter(w.letters).get(1, 0) + 2 * Counter(w.letters).get(2, 0) for w in fp.words)
        expected = sorted(int(v[0] + 2 * v[1]) for v in part.exponent_vectors())
        assert weights == expected


def test_khodak_partition_equal_ratios_match_levels():
    system = preset("sierpinski-right")
    fp = khodak_fractal_partition(system, 3)
    assert sorted(w.letters for w in fp.words) == sorted(w.letters for w in vdc_fractal_partition(system, 3).words)


@pytest.mark.parametrize("ratios", [(F(1, 2), F(1, 4)), (F(1, 3), F(1, 5), F(1, 4)), (F(1, 2), F(1, 3))])
def test_khodak_partition_matches_khodak_tree(ratios):
    s = moran_dimension(ratios)
    probs = [float(c) ** s for c in ratios]
    rule = RefinementRule.numeric(probs)
    thresholds = r_sequence(rule, 10)
    system = line_system(ratios)
    for n in range(1, 11):
        fp = khodak_fractal_partition(system, n)
        assert abs(math.fsum(fp.probabilities) - 1) < 1e-12
        counts = sorted(tuple(w.letters.count(j + 1) for j in range(len(ratios))) for w in fp.words)
        assert counts == sorted(external_nodes(rule, thresholds[n - 1]))
        for w, p in zip(fp.words, fp.probabilities):
            assert abs(p - math.prod(probs[j - 1] for j in w.letters)) < 1e-15


def test_each_level_set_holds_one_point():
    for name in ("sierpinski-right", "cantor", "koch"):
        system = preset(name)
        for level in range(0, 5):
            count = system.m**level
            fp = vdc_fractal_points(system, count)
            cells = Counter(w.path[:level] for w in fp.words)
            assert len(cells) == count and set(cells.values()) == {1}


def test_point_discrepancy_small_cases():
    fp = vdc_fractal_points(preset("sierpinski-right"), 1)
    assert elementary_discrepancy_points(fp, exact=True) == F(2, 3)
    fp = vdc_fractal_points(preset("sierpinski-right"), 27)
    for k in range(1, 4):
        assert elementary_discrepancy_points(fp, 3**k, exact=True) <= F(1, 3**k)
    with pytest.raises(DepthTooShallow):
        elementary_discrepancy_points(fp, 27, max_depth=3)


def test_point_discrepancy_by_direct_membership():
    system = preset("cantor")
    fp = vdc_fractal_points(system, 50)
    for count in (1, 5, 17, 50):
        depth = 7
        best = F(0)
        for level in range(depth + 1):
            for letters in _all_words(system.m, level):
                word = AddressWord(letters)
                inside = sum(1 for w in fp.words[:count] if word.contains(w))
                best = max(best, abs(F(inside, count) - F(1, system.m**level)))
        assert elementary_discrepancy_points(fp, count, depth, exact=True) == best


def _all_words(m, level):
    if level == 0:
        yield ()
        return
    for head in _all_words(m, level - 1):
        for j in range(1, m + 1):
            yield head + (j,)


def test_sweep_bound_and_limit():
    fp = vdc_fractal_points(preset("sierpinski-right"), 3**4)
    sweep = elementary_discrepancy_sweep(fp)
    assert max(sweep[2:]) <= 1 and max(sweep[2:]) >= F(9, 10)
    for n in (3, 10, 30, 81):
        assert sweep[n - 1] == n * elementary_discrepancy_points(fp, n, exact=True)


def test_partition_discrepancy_examples():
    level = vdc_fractal_partition(preset("sierpinski-right"), 3)
    for depth in range(0, 4):
        assert max(_deviations(level, depth)) == 0
    ratios = (F(1, 2), F(1, 4))
    single = khodak_fractal_partition(line_system(ratios), 0)
    assert abs(elementary_discrepancy_partition(single) - (1 - min(single.letter_probs))) < 1e-15


def _deviations(fp, depth):
    return partition_deviation_by_level(fp, depth)[: depth + 1]


def test_partition_discrepancy_rate():
    system = line_system([F(1, 2), F(1, 4)])
    fitted = []
    for n in range(4, 18):
        fp = khodak_fractal_partition(system, n)
        fitted.append(elementary_discrepancy_partition(fp) * len(fp))
    assert max(fitted) / min(fitted) < 1.2


@settings(max_examples=20, deadline=None)
@given(st.lists(st.integers(2, 7), min_size=2, max_size=3), st.integers(0, 12))
def test_partition_probabilities_sum_to_one(denominators, steps):
    ratios = [F(1, d) for d in denominators]
    if sum(ratios) > 1:
        return
    fp = khodak_fractal_partition(line_system(ratios), steps)
    assert abs(math.fsum(fp.probabilities) - 1) < 1e-12


@pytest.mark.parametrize("name", ["sierpinski-right", "koch"])
def test_sweep_never_exceeds_one_up_to_hundred_thousand(name):
    fp = vdc_fractal_points(preset(name), 10**5)
    assert max(elementary_discrepancy_sweep(fp)) <= 1
