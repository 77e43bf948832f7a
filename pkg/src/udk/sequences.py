"""Radical-inverse sequences, Kronecker sequences and Weyl sums.

Every generator returns a :class:`PointSet`.  Radical-inverse families are
exact (``fractions.Fraction`` coordinates); Kronecker points are floats.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import NonCoprimeBases, ValidationError, ZeroFrequency

Coordinate = Fraction | float


@dataclass(frozen=True)
class PointSet:
    """Ordered points of ``[0, 1]^dim``; order is generation order."""

    dim: int
    points: tuple[tuple[Coordinate, ...], ...]

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError("dimension must be positive")
        for point in self.points:
            if len(point) != self.dim:
                raise ValidationError(f"point {point} does not have {self.dim} coordinates")

    @classmethod
    def from_values(cls, values: Iterable[Coordinate]) -> "PointSet":
        """One-dimensional point set from scalar coordinates."""
        return cls(1, tuple((v,) for v in values))

    @classmethod
    def from_points(cls, points: Iterable[Sequence[Coordinate]]) -> "PointSet":
        rows = tuple(tuple(p) for p in points)
        if not rows:
            raise ValidationError("cannot infer dimension of an empty point list")
        return cls(len(rows[0]), rows)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, index):
        return self.points[index]

    def values(self) -> list[Coordinate]:
        """Coordinates of a one-dimensional set as a flat list."""
        if self.dim != 1:
            raise ValidationError("values() needs a one-dimensional point set")
        return [p[0] for p in self.points]

    def prefix(self, n: int) -> "PointSet":
        return PointSet(self.dim, self.points[:n])

    def is_exact(self) -> bool:
        return all(isinstance(c, (Fraction, int)) for p in self.points for c in p)


def _check_base(b: int) -> int:
    if not isinstance(b, int) or b < 2:
        raise ValidationError(f"base must be an integer >= 2, got {b!r}")
    return b


def _check_coprime(bases: Sequence[int]) -> None:
    for i, a in enumerate(bases):
        _check_base(a)
        for b in bases[i + 1 :]:
            if math.gcd(a, b) != 1:
                raise NonCoprimeBases(a, b)


def radical_inverse(n: int, b: int) -> Fraction:
    """Reflect the base-``b`` digits of ``n`` about the radix point."""
    _check_base(b)
    if n < 0:
        raise ValidationError("radical inverse needs n >= 0")
    numerator, denominator = 0, 1
    while n:
        n, digit = divmod(n, b)
        numerator = numerator * b + digit
        denominator *= b
    return Fraction(numerator, denominator)


def van_der_corput(count: int, b: int = 2) -> PointSet:
    """First ``count`` terms; the sequence starts at the radical inverse of 0."""
    if count < 1:
        raise ValidationError("count must be >= 1")
    _check_base(b)
    return PointSet(1, tuple((radical_inverse(n, b),) for n in range(count)))


def halton(count: int, bases: Sequence[int]) -> PointSet:
    """Halton points indexed from 1, so the first point is (1/b_1, 1/b_2, ...)."""
    if count < 1:
        raise ValidationError("count must be >= 1")
    if not bases:
        raise ValidationError("halton needs at least one base")
    _check_coprime(bases)
    rows = tuple(tuple(radical_inverse(n, b) for b in bases) for n in range(1, count + 1))
    return PointSet(len(bases), rows)


def hammersley(count: int, bases: Sequence[int]) -> PointSet:
    """Point n (1..count) is (n/count, radical inverses of n)."""
    if count < 1:
        raise ValidationError("count must be >= 1")
    _check_coprime(bases)
    rows = tuple(
        (Fraction(n, count),) + tuple(radical_inverse(n, b) for b in bases)
        for n in range(1, count + 1)
    )
    return PointSet(len(bases) + 1, rows)


def kronecker(count: int, theta: Sequence[float]) -> PointSet:
    """Fractional parts of n*theta for n = 1..count."""
    if count < 1:
        raise ValidationError("count must be >= 1")
    if not theta:
        raise ValidationError("kronecker needs at least one frequency")
    rows = []
    for n in range(1, count + 1):
        row = []
        for t in theta:
            x = n * float(t)
            row.append(x - math.floor(x))
        rows.append(tuple(row))
    return PointSet(len(theta), tuple(rows))


def weyl_sum(ps: PointSet, h: Sequence[int]) -> float:
    """Modulus of the mean of exp(2 pi i h.x) over the set."""
    if len(ps) == 0:
        raise ValidationError("weyl_sum needs a nonempty point set")
    if len(h) != ps.dim:
        raise ValidationError(f"frequency has {len(h)} entries, points have {ps.dim}")
    if all(k == 0 for k in h):
        raise ZeroFrequency()
    total = 0j
    for point in ps:
        phase = 0.0
        for k, x in zip(h, point):
            # reduce k*x mod 1 exactly when x is rational to keep phases accurate
            t = k * x
            phase += float(t - math.floor(t))
        total += cmath.exp(2j * math.pi * phase)
    return min(1.0, abs(total) / len(ps))
