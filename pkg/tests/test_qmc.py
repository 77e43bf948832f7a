import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from udk.discrepancy import star_discrepancy_prefixes
from udk.errors import DimMismatch
from udk.qmc import (
    INTEGRANDS,
    SplitMix64,
    constant,
    koksma_hlawka_check,
    mc_baseline,
    qmc_integrate,
    sequential_random_reordering,
)
from udk.refine import alpha_rule, rho_refine_n
from udk.sequences import PointSet, halton, van_der_corput

F = Fraction


def test_constant_integrand():
    assert qmc_integrate(van_der_corput(17), constant(F(3, 7)), exact=True) == F(3, 7)
    report = koksma_hlawka_check(van_der_corput(17), constant(2))
    assert report.error == 0 and report.satisfied


def test_grid_mean():
    for n in (1, 7, 64):
        grid = PointSet.from_values([F(j, n) for j in range(1, n + 1)])
        assert qmc_integrate(grid, INTEGRANDS["id"], exact=True) == F(n + 1, 2 * n)


def test_vdc_1024_within_kh():
    ps = van_der_corput(1024)
    report = koksma_hlawka_check(ps, INTEGRANDS["id"])
    assert abs(qmc_integrate(ps, INTEGRANDS["id"]) - 0.5) <= report.dstar
    assert koksma_hlawka_check(van_der_corput(256), INTEGRANDS["id"]).satisfied


def test_single_point_at_one():
    report = koksma_hlawka_check(PointSet.from_values([F(1)]), INTEGRANDS["id"])
    assert report.error == 0.5
    assert report.dstar == float(oracles.star_by_pairs([F(1)])) == 1.0
    assert report.satisfied


def test_dim_mismatch():
    with pytest.raises(DimMismatch):
        qmc_integrate(van_der_corput(4), INTEGRANDS["prod2"])


def test_integrand_constants_by_quadrature():
    # midpoint rule on a fine grid checks the documented integrals
    n = 4000
    xs = [(j + 0.5) / n for j in range(n)]
    for name in ("id", "sq", "ramp"):
        f = INTEGRANDS[name]
        approx = math.fsum(float(f.evaluate((x,))) for x in xs) / n
        assert abs(approx - float(f.exact_integral)) < 1e-6
        # total variation of a monotone function is f(1) - f(0)
        assert f.hk_variation == f.evaluate((F(1),)) - f.evaluate((F(0),))
    m = 200
    grid = [(j + 0.5) / m for j in range(m)]
    approx = math.fsum(x * y for x in grid for y in grid) / m**2
    assert abs(approx - 0.25) < 1e-9


def test_splitmix_reference_values():
    rng = SplitMix64(0)
    assert [rng.next() for _ in range(3)] == [
        0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F
    ]


def test_shuffle_is_uniform_on_three():
    counts = {}
    rng = SplitMix64(123)
    for _ in range(6000):
        order = tuple(rng.shuffle([1, 2, 3]))
        counts[order] = counts.get(order, 0) + 1
    assert len(counts) == 6
    assert all(abs(c - 1000) < 150 for c in counts.values())


def test_single_block_both_orders():
    seen = set()
    for seed in range(20):
        seen.add(tuple(sequential_random_reordering([[F(1, 2), F(1)]], seed).to_pointset().values()))
    assert seen == {(F(1, 2), F(1)), (F(1), F(1, 2))}


def test_reordered_kakutani_discrepancy():
    rule = alpha_rule(F(1, 2))
    blocks = [rho_refine_n(rule, n).breaks() for n in range(1, 13)]
    ps = sequential_random_reordering(blocks, 42).to_pointset()
    assert len(ps) == sum(len(b) for b in blocks)
    scaled = star_discrepancy_prefixes(ps)
    tail = [float(scaled[n - 1]) / n for n in (500, 2000, len(ps))]
    assert tail == sorted(tail, reverse=True)
    assert tail[-1] < 0.05


@settings(max_examples=30, deadline=None)
@given(st.lists(st.lists(st.fractions(0, 1, max_denominator=30), min_size=1, max_size=9), min_size=1, max_size=5),
       st.integers(0, 2**64 - 1))
def test_reordering_preserves_blocks(blocks, seed):
    stream = sequential_random_reordering(blocks, seed)
    out = stream.to_pointset().values()
    assert stream.emitted == sum(len(b) for b in blocks)
    start = 0
    for block in blocks:
        assert sorted(out[start:start + len(block)]) == sorted(block)
        start += len(block)
    assert out == sequential_random_reordering(blocks, seed).to_pointset().values()


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_mc_baseline(seed):
    assert mc_baseline(100, seed, constant(F(1, 3))) == pytest.approx(1 / 3, abs=1e-15)
    estimate = mc_baseline(10**5, seed, INTEGRANDS["id"])
    assert abs(estimate - 0.5) < 0.01
    assert estimate == mc_baseline(10**5, seed, INTEGRANDS["id"])


def test_qmc_beats_mc():
    count = 2**12
    points = van_der_corput(count)
    for name in ("id", "sq", "ramp"):
        f = INTEGRANDS[name]
        q_err = abs(qmc_integrate(points, f) - float(f.exact_integral))
        wins = sum(q_err < abs(mc_baseline(count, seed, f) - float(f.exact_integral)) for seed in range(100))
        assert wins >= 90


def test_halton_prod2_certificate():
    for n in (16, 64, 256):
        assert koksma_hlawka_check(halton(n, (2, 3)), INTEGRANDS["prod2"]).satisfied
