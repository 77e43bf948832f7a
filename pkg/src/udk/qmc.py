"""Quasi-Monte Carlo integration, Koksma-Hlawka certificates and sequential
random reordering.

The shuffle generator is pinned so streams reproduce across implementations:

* SplitMix64: ``state += 0x9E3779B97F4A7C15`` then the standard two
  multiply-xorshift rounds (constants 0xBF58476D1CE4E5B9, 0x94D049BB133111EB),
  all modulo 2**64.
* bounded draws below n: reject outputs >= 2**64 - (2**64 mod n), return x mod n.
* Fisher-Yates: for i = len-1 down to 1, swap item i with item bounded(i + 1).

The seed is the initial SplitMix64 state; one generator runs across all blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .discrepancy import star_discrepancy_1d, star_discrepancy_dd
from .errors import DimMismatch, EmptyPointSet, EmptyPartition, ValidationError
from .sequences import PointSet

_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class TestIntegrand:
    """Integrand with known integral and Hardy-Krause variation (anchored at 1)."""

    __test__ = False  # not a pytest class

    name: str
    dim: int
    evaluate: Callable  # coordinates tuple -> value; exact on Fractions
    vectorized: Callable  # (N, dim) float array -> (N,) array
    exact_integral: Fraction
    hk_variation: Fraction
    description: str = ""


def _ramp(x):
    return min(max(2 * (x - Fraction(1, 4)), 0), 1)


def constant(value) -> TestIntegrand:
    value = Fraction(value)
    return TestIntegrand(
        f"const:{value}",
        1,
        lambda p: value,
        lambda a: np.full(a.shape[0], float(value)),
        value,
        Fraction(0),
        "constant",
    )


INTEGRANDS: dict[str, TestIntegrand] = {
    "id": TestIntegrand(
        "id", 1, lambda p: p[0], lambda a: a[:, 0], Fraction(1, 2), Fraction(1), "f(x) = x"
    ),
    "sq": TestIntegrand(
        "sq", 1, lambda p: p[0] * p[0], lambda a: a[:, 0] ** 2, Fraction(1, 3), Fraction(1), "f(x) = x^2"
    ),
    "ramp": TestIntegrand(
        "ramp",
        1,
        lambda p: _ramp(p[0]),
        lambda a: np.clip(2.0 * (a[:, 0] - 0.25), 0.0, 1.0),
        Fraction(1, 2),
        Fraction(1),
        "0 on [0,1/4], linear to 1 at 3/4, then 1",
    ),
    # V = 1 (x) + 1 (y) + 1 (mixed term, integral of |d2f/dxdy|)
    "prod2": TestIntegrand(
        "prod2",
        2,
        lambda p: p[0] * p[1],
        lambda a: a[:, 0] * a[:, 1],
        Fraction(1, 4),
        Fraction(3),
        "f(x, y) = x y",
    ),
}


def qmc_integrate(ps: PointSet, integrand: TestIntegrand, exact: bool = False):
    """Sample mean of the integrand over the points.

    With ``exact`` and exact points the mean is a Fraction.
    """
    if len(ps) == 0:
        raise EmptyPointSet()
    if ps.dim != integrand.dim:
        raise DimMismatch(integrand.dim, ps.dim)
    if exact and ps.is_exact():
        return sum((Fraction(integrand.evaluate(p)) for p in ps), Fraction(0)) / len(ps)
    return math.fsum(float(integrand.evaluate(p)) for p in ps) / len(ps)


@dataclass(frozen=True)
class KHReport:
    error: float
    bound: float
    dstar: float
    variation: Fraction
    estimate: float
    exact: Fraction
    satisfied: bool

    def as_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "exact": float(self.exact),
            "error": self.error,
            "dstar": self.dstar,
            "variation": float(self.variation),
            "kh_bound": self.bound,
            "satisfied": self.satisfied,
        }


def star_discrepancy(ps: PointSet) -> float:
    """Exact star discrepancy in dimension <= 3; no size cap is applied."""
    if ps.dim == 1:
        return float(star_discrepancy_1d(ps))
    return float(star_discrepancy_dd(ps, max_n=len(ps)))


def koksma_hlawka_check(ps: PointSet, integrand: TestIntegrand, dstar=None) -> KHReport:
    """Compare |I_N - I| with V(f) D*_N; exact arithmetic when the points are exact."""
    estimate = qmc_integrate(ps, integrand, exact=True)
    dstar = star_discrepancy(ps) if dstar is None else float(dstar)
    if isinstance(estimate, Fraction):
        error = float(abs(estimate - integrand.exact_integral))
    else:
        error = abs(estimate - float(integrand.exact_integral))
    bound = float(integrand.hk_variation) * dstar
    return KHReport(
        error,
        bound,
        dstar,
        integrand.hk_variation,
        float(estimate),
        integrand.exact_integral,
        error <= bound + 1e-12,
    )


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) without modulo bias."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next()
            if x < limit:
                return x % n

    def shuffle(self, items: list) -> list:
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
        return items


@dataclass
class ReorderingStream:
    """Iterator over the blocks' points, each block shuffled independently."""

    partitions: Sequence[Sequence]
    seed: int
    emitted: int = 0
    _rng: SplitMix64 = field(init=False, repr=False)
    _iterator: Iterator = field(init=False, repr=False)

    def __post_init__(self):
        if len(self.partitions) == 0:
            raise EmptyPartition()
        self._rng = SplitMix64(self.seed)
        self._iterator = self._generate()

    def _generate(self):
        for block in self.partitions:
            for point in self._rng.shuffle(list(block)):
                yield point

    def __iter__(self):
        return self

    def __next__(self):
        point = next(self._iterator)
        self.emitted += 1
        return point

    def take(self, count: int) -> PointSet:
        out = []
        for point in self:
            out.append(point)
            if len(out) == count:
                break
        return PointSet.from_values(out)

    def to_pointset(self) -> PointSet:
        return PointSet.from_values(list(self))


def sequential_random_reordering(partitions: Iterable[Sequence], seed: int) -> ReorderingStream:
    """Blocks are break lists; each contributes its points in a seeded uniform order."""
    blocks = [tuple(block) for block in partitions]
    if any(len(block) == 0 for block in blocks):
        raise EmptyPartition()
    return ReorderingStream(blocks, seed)


def mc_baseline(count: int, seed: int, integrand: TestIntegrand) -> float:
    """Plain Monte Carlo mean with numpy's PCG64 stream for ``seed``."""
    if count < 1:
        raise ValidationError("count must be >= 1")
    sample = np.random.default_rng(seed).random((count, integrand.dim))
    return math.fsum(integrand.vectorized(sample).tolist()) / count
