"""Comparable lengths of the form prod p_g ** k_g.

Entries of a probability vector with the same value share a group, and a
length is addressed by its exponent vector over groups.  Three modes:

* ``rational``: exact Fractions; the ordering key is 1/length.
* ``base``: p_g = alpha ** e_g; the key is the integer weight sum k_g e_g.
* ``numeric``: floats; the key is the log-cost sum k_g log(1/p_g) and keys
  within a relative 1e-12 are treated as equal.

Keys grow as lengths shrink.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

NUMERIC_TIE = 1e-12
MP_DIGITS = 60


def mp_context():
    ctx = mpmath.mp.clone()
    ctx.dps = MP_DIGITS
    return ctx


MP = mp_context()


@dataclass(frozen=True)
class LengthAlgebra:
    mode: str
    values: tuple  # distinct probability values, first-appearance order
    counts: tuple[int, ...]
    letter_group: tuple[int, ...]
    base_exponents: tuple[int, ...] | None = None
    alpha: object = None  # mpf in base mode
    neglogs: tuple[float, ...] = field(default=())

    @classmethod
    def build(cls, probs: Sequence, mode: str, exponents: Sequence[int] | None = None, alpha=None):
        if mode == "base":
            keys = list(exponents)
        else:
            keys = list(probs)
        values, counts, groups = [], [], []
        index = {}
        for entry, key in enumerate(keys):
            if key not in index:
                index[key] = len(values)
                values.append(probs[entry] if mode != "base" else key)
                counts.append(0)
            g = index[key]
            counts[g] += 1
            groups.append(g)
        if mode == "base":
            base_exponents = tuple(values)
            neglog_alpha = -float(MP.log(alpha))
            neglogs = tuple(e * neglog_alpha for e in base_exponents)
            values = tuple(float(MP.power(alpha, e)) for e in base_exponents)
        else:
            base_exponents = None
            neglogs = tuple(-math.log(float(v)) for v in values)
        return cls(mode, tuple(values), tuple(counts), tuple(groups), base_exponents, alpha, neglogs)

    @property
    def groups(self) -> int:
        return len(self.counts)

    @property
    def m(self) -> int:
        return len(self.letter_group)

    def key(self, exps: Sequence[int]):
        if self.mode == "rational":
            length = Fraction(1)
            for v, k in zip(self.values, exps):
                if k:
                    length *= v**k
            return 1 / length
        if self.mode == "base":
            return sum(e * k for e, k in zip(self.base_exponents, exps))
        return math.fsum(c * k for c, k in zip(self.neglogs, exps))

    def same(self, a, b) -> bool:
        if self.mode == "numeric":
            return abs(a - b) <= NUMERIC_TIE * max(1.0, abs(a), abs(b))
        return a == b

    def step_key(self, key, group: int):
        """Key of the child reached through one factor of group ``group``."""
        if self.mode == "rational":
            return key / self.values[group]
        if self.mode == "base":
            return key + self.base_exponents[group]
        return key + self.neglogs[group]

    def threshold(self, r):
        """Key of a real value r in (0, 1]; exact when r is rational in rational mode."""
        if self.mode == "rational":
            value = Fraction(r) if not isinstance(r, float) else Fraction(r)
            return 1 / value
        neglog = -math.log(float(r))
        if self.mode == "base":
            return neglog / self.neglog_alpha
        return neglog

    @property
    def neglog_alpha(self) -> float:
        return -float(MP.log(self.alpha))

    def inside(self, key, threshold) -> bool:
        """True when the length with ``key`` is at least the threshold value."""
        if self.mode == "rational":
            return key <= threshold
        if self.mode == "base":
            if isinstance(threshold, int):
                return key <= threshold
            return key <= threshold + 1e-9 * max(1.0, abs(threshold))
        return key <= threshold + NUMERIC_TIE * max(1.0, abs(threshold))

    def log_cost(self, exps: Sequence[int]) -> float:
        return math.fsum(c * k for c, k in zip(self.neglogs, exps))

    def exact(self, exps: Sequence[int]) -> Fraction:
        if self.mode != "rational":
            raise TypeError("exact lengths exist only in rational mode")
        return 1 / self.key(exps)

    def mp_length(self, exps: Sequence[int]):
        if self.mode == "rational":
            value = self.exact(exps)
            return MP.mpf(value.numerator) / value.denominator
        if self.mode == "base":
            return MP.power(self.alpha, self.key(exps))
        out = MP.mpf(1)
        for v, k in zip(self.values, exps):
            if k:
                out *= MP.power(MP.mpf(v), k)
        return out

    def float_length(self, exps: Sequence[int]) -> float:
        if self.mode == "rational":
            return float(self.exact(exps))
        return float(self.mp_length(exps))
