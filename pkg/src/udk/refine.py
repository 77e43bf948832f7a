"""Kakutani and rho-refinements of [0, 1].

A refinement rule is a finite partition of [0, 1] given by its lengths
p_1..p_m.  One refinement step splits every interval of maximal length
(all ties at once) into m pieces homothetic to the rule, in the rule's
left-to-right order.  Starting from the trivial partition this produces
the sequence of partitions whose sizes are k(0) = 1, k(1) = m, ...

Intervals are stored as labels into a table of length classes.  A class is
an exponent vector over the distinct probability values of the rule, so
every interval length is prod p_g ** k_g and maximal-length detection only
compares class keys (see ``_algebra``).  Breakpoints are produced on demand:
exact Fractions in rational mode, or double-double prefix sums rounded to
float otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _dd
from ._algebra import MP, LengthAlgebra
from .errors import BudgetExceeded, DegenerateRule, OutOfRange, SumNotOne, ValidationError
from .limits import interval_cap

RATIONAL = "rational"
BASE = "base"
NUMERIC = "numeric"


@dataclass(frozen=True)
class RefinementRule:
    """Lengths p_1..p_m of the splitting pattern and how to compare their products."""

    probs: tuple
    structure: str
    algebra: LengthAlgebra
    exponents: tuple[int, ...] | None = None
    label: str = ""

    @property
    def m(self) -> int:
        return len(self.probs)

    @property
    def alpha(self) -> float | None:
        return None if self.algebra.alpha is None else float(self.algebra.alpha)

    def float_probs(self) -> list[float]:
        return [float(p) for p in self.probs]

    @classmethod
    def rational(cls, probs: Sequence, label: str = "") -> "RefinementRule":
        values = [Fraction(p) for p in probs]
        _check_shape(values)
        total = sum(values, Fraction(0))
        if total != 1:
            raise SumNotOne(1 - total)
        return cls(tuple(values), RATIONAL, LengthAlgebra.build(values, RATIONAL), None, label)

    @classmethod
    def numeric(cls, probs: Sequence[float], label: str = "") -> "RefinementRule":
        values = [float(p) for p in probs]
        _check_shape(values)
        if abs(math.fsum(values) - 1.0) > 1e-14:
            raise ValidationError(f"probabilities sum to {math.fsum(values)!r}, not 1")
        return cls(tuple(values), NUMERIC, LengthAlgebra.build(values, NUMERIC), None, label)

    @classmethod
    def single_base(cls, exponents: Sequence[int], label: str = "") -> "RefinementRule":
        """Rule with p_i = alpha ** e_i where alpha in (0, 1) solves sum alpha ** e_i = 1."""
        exponents = [int(e) for e in exponents]
        if len(exponents) < 2:
            raise DegenerateRule("a rule needs at least two pieces")
        if min(exponents) < 1:
            raise ValidationError("exponents must be positive integers")
        alpha = _solve_alpha(exponents)
        probs = tuple(float(MP.power(alpha, e)) for e in exponents)
        algebra = LengthAlgebra.build(probs, BASE, exponents=exponents, alpha=alpha)
        residual = abs(MP.fsum(MP.power(alpha, e) for e in exponents) - 1)
        if residual > MP.mpf(10) ** -14:
            raise ValidationError("could not solve for the base length")
        return cls(probs, BASE, algebra, tuple(exponents), label)


def _check_shape(values) -> None:
    if len(values) < 2:
        raise DegenerateRule("a rule needs at least two pieces")
    for v in values:
        if not 0 < v < 1:
            raise OutOfRange(f"probability {v} outside (0, 1)")


def _solve_alpha(exponents: Sequence[int]):
    """Root in (0, 1) of sum alpha ** e = 1; the left side increases from 0 to m."""
    def f(a):
        return MP.fsum(MP.power(a, e) for e in exponents) - 1

    def df(a):
        return MP.fsum(e * MP.power(a, e - 1) for e in exponents)

    lo, hi = MP.mpf(0), MP.mpf(1)
    for _ in range(60):
        mid = (lo + hi) / 2
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    a = (lo + hi) / 2
    for _ in range(20):
        step = f(a) / df(a)
        a -= step
        if abs(step) < MP.mpf(10) ** -(MP.dps - 5):
            break
    return a


def ls_rule(L: int, S: int) -> RefinementRule:
    """L pieces of length alpha followed by S pieces of length alpha**2."""
    if L < 1 or S < 1:
        raise ValidationError("L and S must be positive")
    return RefinementRule.single_base([1] * L + [2] * S, label=f"ls:{L},{S}")


def pisot_rule(coefficients: Sequence[int]) -> RefinementRule:
    """a_j pieces of length alpha**j, alpha the inverse of the dominant root of
    z**k - a_1 z**(k-1) - ... - a_k."""
    a = [int(x) for x in coefficients]
    if not a or min(a) < 1:
        raise ValidationError("coefficients must be positive integers")
    if any(a[i] < a[i + 1] for i in range(len(a) - 1)):
        raise ValidationError("coefficients must be nonincreasing")
    exponents = [j for j, count in enumerate(a, start=1) for _ in range(count)]
    if len(exponents) < 2:
        raise DegenerateRule("this polynomial gives the trivial length 1")
    return RefinementRule.single_base(exponents, label="pisot:" + ",".join(map(str, a)))


def alpha_rule(alpha) -> RefinementRule:
    """Two-piece rule (alpha, 1 - alpha); exact when alpha is rational."""
    if isinstance(alpha, float):
        if not 0.0 < alpha < 1.0:
            raise OutOfRange(f"alpha={alpha} outside (0, 1)")
        return RefinementRule.numeric([alpha, 1.0 - alpha], label=f"alpha:{alpha!r}")
    alpha = Fraction(alpha)
    if not 0 < alpha < 1:
        raise OutOfRange(f"alpha={alpha} outside (0, 1)")
    return RefinementRule.rational([alpha, 1 - alpha], label=f"alpha:{alpha}")


class _ClassTable:
    """Append-only registry of exponent vectors; ids never change."""

    def __init__(self, algebra: LengthAlgebra):
        self.algebra = algebra
        self.exps: list[tuple[int, ...]] = []
        self.keys: list = []
        self.index: dict[tuple[int, ...], int] = {}
        self.children: dict[int, np.ndarray] = {}

    def intern(self, exps: tuple[int, ...]) -> int:
        found = self.index.get(exps)
        if found is not None:
            return found
        cid = len(self.exps)
        self.exps.append(exps)
        self.keys.append(self.algebra.key(exps))
        self.index[exps] = cid
        return cid

    def child_ids(self, cid: int) -> np.ndarray:
        found = self.children.get(cid)
        if found is not None:
            return found
        parent = self.exps[cid]
        ids = []
        for g in self.algebra.letter_group:
            child = list(parent)
            child[g] += 1
            ids.append(self.intern(tuple(child)))
        found = np.array(ids, dtype=np.int32)
        self.children[cid] = found
        return found


@dataclass(frozen=True, eq=False)
class RefinedPartition:
    """Snapshot of an ordered partition of [0, 1] produced by a rule."""

    rule: RefinementRule
    step: int
    labels: np.ndarray
    table: _ClassTable
    present: dict

    @property
    def k(self) -> int:
        return int(self.labels.size)

    def __len__(self) -> int:
        return self.k

    def _present_keys(self):
        return [(cid, self.table.keys[cid]) for cid in self.present]

    def maximal_classes(self) -> list[int]:
        """Class ids attaining the maximal length, ties grouped by the algebra."""
        algebra = self.rule.algebra
        pairs = self._present_keys()
        best = min(key for _, key in pairs)
        return [cid for cid, key in pairs if algebra.same(key, best)]

    def _extreme_length(self, pick):
        algebra = self.rule.algebra
        pairs = self._present_keys()
        key = pick(k for _, k in pairs)
        cid = next(c for c, k in pairs if k == key)
        exps = self.table.exps[cid]
        if algebra.mode == RATIONAL:
            return algebra.exact(exps)
        return algebra.float_length(exps)

    @property
    def max_length(self):
        """A_n, the largest interval length."""
        return self._extreme_length(min)

    @property
    def min_length(self):
        """a_n, the smallest interval length."""
        return self._extreme_length(max)

    def exponent_vectors(self) -> np.ndarray:
        """Per-interval exponent counts over the rule's distinct probability values."""
        table = np.array(self.table.exps, dtype=np.int64)
        return table[self.labels]

    def group_values(self) -> tuple:
        return self.rule.algebra.values

    def length_multiset(self) -> dict[tuple[int, ...], int]:
        return {self.table.exps[cid]: count for cid, count in self.present.items()}

    def lengths(self) -> list:
        """Interval lengths in order: Fractions in rational mode, floats otherwise."""
        algebra = self.rule.algebra
        if algebra.mode == RATIONAL:
            cache = {cid: algebra.exact(self.table.exps[cid]) for cid in self.present}
        else:
            cache = {cid: algebra.float_length(self.table.exps[cid]) for cid in self.present}
        return [cache[int(c)] for c in self.labels]

    def breaks(self) -> list:
        """Right endpoints t_1 < ... < t_k = 1; exact Fractions in rational mode."""
        if self.rule.algebra.mode == RATIONAL:
            out, acc = [], Fraction(0)
            for length in self.lengths():
                acc += length
                out.append(acc)
            return out
        return list(self.breaks_float())

    def breaks_float(self) -> np.ndarray:
        """Right endpoints as float64, accumulated in double-double.

        t_i = sum over classes c of (#intervals of class c among the first i)
        * length(c); the counts are exact and each product and partial sum
        carries a second float of error compensation.
        """
        algebra = self.rule.algebra
        by_value: dict = {}
        for cid in self.present:
            key = self.table.keys[cid]
            by_value.setdefault(key if algebra.mode != NUMERIC else cid, []).append(cid)
        hi, lo = _dd.zeros(self.k)
        for ids in by_value.values():
            hi_len, lo_len = _dd.from_mpf(algebra.mp_length(self.table.exps[ids[0]]))
            mask = np.isin(self.labels, ids) if len(ids) > 1 else self.labels == ids[0]
            counts = np.cumsum(mask, dtype=np.int64).astype(np.float64)
            ph, pl = _dd.scale_int(counts, hi_len, lo_len)
            hi, lo = _dd.add(hi, lo, ph, pl)
        out = hi + lo
        out[-1] = 1.0 if abs(out[-1] - 1.0) < 1e-12 else out[-1]
        return out

    def discrepancy(self) -> float:
        """Extreme discrepancy of the right endpoints."""
        from .discrepancy import partition_discrepancy, partition_discrepancy_array

        if self.rule.algebra.mode == RATIONAL and self.k <= 4096:
            return partition_discrepancy(self.breaks())
        return partition_discrepancy_array(self.breaks_float())


def trivial_partition(rule: RefinementRule) -> RefinedPartition:
    table = _ClassTable(rule.algebra)
    root = table.intern(tuple([0] * rule.algebra.groups))
    return RefinedPartition(rule, 0, np.array([root], dtype=np.int32), table, {root: 1})


def _split(part: RefinedPartition, split_ids: list[int], cap: int, step: int) -> RefinedPartition:
    m = part.rule.m
    growth = sum(part.present[c] for c in split_ids) * (m - 1)
    new_k = part.k + growth
    if new_k > cap:
        raise BudgetExceeded(new_k, cap)
    table = part.table
    labels = part.labels
    if len(split_ids) == 1:
        mask = labels == split_ids[0]
    else:
        mask = np.isin(labels, split_ids)
    reps = np.where(mask, m, 1)
    out = np.repeat(labels, reps)
    ends = np.cumsum(reps)
    starts = (ends - reps)[mask]
    parents = labels[mask]
    split_set = set(split_ids)
    present = {c: n for c, n in part.present.items() if c not in split_set}
    for cid in split_ids:
        children = table.child_ids(cid)
        sel = starts[parents == cid] if len(split_ids) > 1 else starts
        for j, child in enumerate(children):
            out[sel + j] = child
            present[int(child)] = present.get(int(child), 0) + part.present[cid]
    return RefinedPartition(part.rule, step, out, table, present)


def rho_refine(part: RefinedPartition, cap: int | None = None) -> RefinedPartition:
    """Split every interval of maximal length; the step counter advances by one."""
    cap = interval_cap() if cap is None else cap
    return _split(part, part.maximal_classes(), cap, part.step + 1)


def rho_refine_n(rule: RefinementRule, n: int, cap: int | None = None) -> RefinedPartition:
    if n < 0:
        raise ValidationError("step count must be >= 0")
    part = trivial_partition(rule)
    for _ in range(n):
        part = rho_refine(part, cap)
    return part


def rho_refine_steps(rule: RefinementRule, n: int, cap: int | None = None):
    """Yield the partitions for steps 0..n."""
    part = trivial_partition(rule)
    yield part
    for _ in range(n):
        part = rho_refine(part, cap)
        yield part


def alpha_refine_n(alpha, n: int, cap: int | None = None) -> RefinedPartition:
    """Kakutani splitting with pieces (alpha, 1 - alpha)."""
    return rho_refine_n(alpha_rule(alpha), n, cap)


def rho_adic_partition(rule: RefinementRule, n: int, cap: int | None = None) -> RefinedPartition:
    """Every interval split at every step: m**n intervals in lexicographic address order."""
    cap = interval_cap() if cap is None else cap
    if n < 0:
        raise ValidationError("step count must be >= 0")
    if rule.m**n > cap:
        raise BudgetExceeded(rule.m**n, cap)
    part = trivial_partition(rule)
    for step in range(1, n + 1):
        part = _split(part, list(part.present), cap, step)
    return part
