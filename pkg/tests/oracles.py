"""Slow, direct reference computations used only by the tests."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from fractions import Fraction

import numpy as np


def star_by_pairs(values):
    """sup_a |#{x < a}/N - a|, testing every a in the point set and 1
    together with the right-hand limits (closed boxes). O(N^2), exact."""
    xs = [Fraction(v) for v in values]
    n = len(xs)
    best = Fraction(0)
    for a in xs + [Fraction(1)]:
        open_count = sum(1 for x in xs if x < a)
        closed_count = sum(1 for x in xs if x <= a) if a < 1 else open_count
        best = max(best, abs(Fraction(open_count, n) - a), Fraction(closed_count, n) - a)
    return best


def extreme_by_pairs(values):
    """sup over intervals of |count/N - length|, with endpoints at 0, 1 or a
    point and every open/closed variant at each end. O(N^3), exact."""
    xs = [Fraction(v) for v in values]
    n = len(xs)
    ends = sorted(set(xs) | {Fraction(0), Fraction(1)})
    best = Fraction(0)
    for a, b in itertools.combinations_with_replacement(ends, 2):
        length = b - a
        for left_closed, right_closed in itertools.product((False, True), repeat=2):
            if b == 1:
                right_closed = False
            count = sum(
                1
                for x in xs
                if (a < x or (left_closed and x == a)) and (x < b or (right_closed and x == b))
            )
            best = max(best, abs(Fraction(count, n) - length))
    return best


def grid_deviation(values, step_count: int = 10**4):
    """F(t) = #{x < t}/N - t sampled on t = j/step_count."""
    xs = np.sort(np.asarray([float(v) for v in values]))
    grid = np.arange(step_count + 1) / step_count
    return np.searchsorted(xs, grid, side="left") / len(xs) - grid


def star_on_grid(values, step_count: int = 10**4) -> float:
    return float(np.max(np.abs(grid_deviation(values, step_count))))


def extreme_on_grid(values, step_count: int = 10**4) -> float:
    """max over grid pairs a <= b of |F(b) - F(a)|, the deviation of [a, b)."""
    f = grid_deviation(values, step_count)
    rise = np.max(f - np.minimum.accumulate(f))
    fall = np.max(np.maximum.accumulate(f) - f)
    return float(max(rise, fall))


def star_box_oracle(points):
    """Multi-dimensional star discrepancy by enumerating every corner built
    from coordinate values and 1, counting open and closed boxes directly."""
    pts = [tuple(Fraction(c) for c in p) for p in points]
    n, dim = len(pts), len(pts[0])
    axes = [sorted({p[j] for p in pts} | {Fraction(1)}) for j in range(dim)]
    best = Fraction(0)
    for corner in itertools.product(*axes):
        volume = math.prod(corner)
        open_count = sum(1 for p in pts if all(c < q for c, q in zip(p, corner)))
        closed_count = sum(
            1 for p in pts if all(c < q or (c == q and q < 1) for c, q in zip(p, corner))
        )
        best = max(best, volume - Fraction(open_count, n), Fraction(closed_count, n) - volume)
    return best


def radical_inverse_by_string(n: int, base: int) -> Fraction:
    """Mirror the base-b digit string of n about the radix point."""
    digits = np.base_repr(n, base)
    return sum(
        (Fraction(int(d, base), base ** (i + 1)) for i, d in enumerate(reversed(digits))),
        Fraction(0),
    )


def khodak_leaves_by_recursion(probs, threshold):
    """Leaf probabilities of the tree whose internal nodes have P >= threshold.

    Plain recursion over the tree; exact for Fraction inputs.
    """
    out = Counter()

    def visit(p):
        if p >= threshold:
            for q in probs:
                visit(p * q)
        else:
            out[p] += 1

    visit(Fraction(1))
    return out


def refine_by_lists(probs, steps):
    """Interval lengths after repeatedly splitting every longest interval,
    kept as a plain list of Fractions."""
    lengths = [Fraction(1)]
    for _ in range(steps):
        longest = max(lengths)
        nxt = []
        for length in lengths:
            if length == longest:
                nxt.extend(length * p for p in probs)
            else:
                nxt.append(length)
        lengths = nxt
    return lengths


def breaks_from_lengths(lengths):
    return list(itertools.accumulate(lengths))


def fibonacci(count):
    seq = [1, 2]
    while len(seq) < count:
        seq.append(seq[-1] + seq[-2])
    return seq[:count]
