"""Exact discrepancy of finite point sets and of interval partitions.

Conventions: boxes are half-open, ``[0, a)`` for the star discrepancy and
``[a, b)`` for the extreme discrepancy, so a coordinate equal to 1 is never
counted by any box.

One-dimensional values reduce to two order-statistic extremes.  With sorted
coordinates x_(1) <= ... <= x_(N)::

    over  = max(0, max_i  i/N - x_(i))        # approached from the right of x_(i)
    under = max(0, max_i  x_(i) - (i-1)/N)    # attained at a = x_(i)

    star    = max(over, under)
    extreme = over + under

Rational inputs are evaluated exactly.  Float inputs are scanned in floating
point and the near-maximal candidates are re-evaluated exactly on the binary
values of the floats, so the result is the correctly rounded supremum.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import EmptyPartition, EmptyPointSet, TooLarge, Unsorted, UnsupportedDim, ValidationError
from .sequences import PointSet

DD_CAPS = {2: 256, 3: 64}
_INT_LIMIT = 2**62
_CANDIDATE_SLACK = 1e-9


def _values_1d(ps) -> list:
    if isinstance(ps, PointSet):
        values = ps.values()
    else:
        values = list(ps)
    if not values:
        raise EmptyPointSet()
    return values


def _all_rational(values) -> bool:
    return all(isinstance(v, (Fraction, int)) for v in values)


def _common_denominator(values) -> int:
    lcm = 1
    for v in values:
        d = v.denominator
        lcm = lcm // math.gcd(lcm, d) * d
        if lcm > _INT_LIMIT:
            return 0
    return lcm


def _check_unit(values) -> None:
    for v in values:
        if v < 0 or v > 1:
            raise ValidationError(f"coordinate {v} outside [0, 1]")


def _extremes_exact(values) -> tuple[Fraction, Fraction]:
    """(over, under) in exact arithmetic for rational coordinates."""
    n = len(values)
    denom = _common_denominator(values)
    if denom and denom * n < _INT_LIMIT:
        nums = np.sort(np.array([int(v * denom) for v in values], dtype=np.int64))
        ranks = np.arange(1, n + 1, dtype=np.int64)
        over = int(np.max(ranks * denom - n * nums))
        under = int(np.max(n * nums - (ranks - 1) * denom))
        scale = n * denom
        return Fraction(max(over, 0), scale), Fraction(max(under, 0), scale)
    ordered = sorted(Fraction(v) for v in values)
    over = under = Fraction(0)
    for i, x in enumerate(ordered, start=1):
        over = max(over, Fraction(i, n) - x)
        under = max(under, x - Fraction(i - 1, n))
    return over, under


def _extremes_float(values) -> tuple[Fraction, Fraction]:
    """(over, under) for float coordinates, exact on their binary values."""
    n = len(values)
    xs = np.sort(np.asarray(values, dtype=np.float64))
    ranks = np.arange(1, n + 1, dtype=np.float64)
    over_terms = ranks / n - xs
    under_terms = xs - (ranks - 1) / n

    def refine(terms, exact_term):
        top = terms.max()
        best = Fraction(0)
        for i in np.nonzero(terms >= top - _CANDIDATE_SLACK)[0]:
            best = max(best, exact_term(int(i) + 1, Fraction(float(xs[i]))))
        return best

    over = refine(over_terms, lambda i, x: Fraction(i, n) - x)
    under = refine(under_terms, lambda i, x: x - Fraction(i - 1, n))
    return over, under


def _extremes(values) -> tuple[Fraction, Fraction]:
    _check_unit(values)
    if _all_rational(values):
        return _extremes_exact(values)
    return _extremes_float(values)


def star_discrepancy_1d(ps, exact: bool = False) -> float | Fraction:
    """Supremum over 0 < a <= 1 of |#{x_i < a}/N - a|.

    ``ps`` is a one-dimensional PointSet or a plain sequence of coordinates.
    With ``exact=True`` the value is returned as a Fraction.
    """
    over, under = _extremes(_values_1d(ps))
    value = max(over, under)
    return value if exact else float(value)


def extreme_discrepancy_1d(ps, exact: bool = False) -> float | Fraction:
    """Supremum over 0 <= a < b <= 1 of |#{a <= x_i < b}/N - (b - a)|."""
    over, under = _extremes(_values_1d(ps))
    value = over + under
    return value if exact else float(value)


def partition_discrepancy(breaks: Sequence, exact: bool = False) -> float | Fraction:
    """Extreme discrepancy of the right endpoints t_1 < ... < t_k = 1 of a partition."""
    breaks = list(breaks)
    if not breaks:
        raise EmptyPartition()
    for i in range(1, len(breaks)):
        if not breaks[i - 1] < breaks[i]:
            raise Unsorted(i)
    if breaks[0] <= 0:
        raise ValidationError("breakpoints must lie in (0, 1]")
    last = breaks[-1]
    if not (last == 1 or (isinstance(last, float) and abs(last - 1.0) <= 1e-12)):
        raise ValidationError(f"last breakpoint must be 1, got {last}")
    if isinstance(last, float) and last != 1.0:
        breaks[-1] = 1.0
    return extreme_discrepancy_1d(breaks, exact=exact)


def partition_discrepancy_array(breaks: np.ndarray) -> float:
    """Float-only fast path for very large partitions (no exact refinement)."""
    xs = np.asarray(breaks, dtype=np.float64)
    if xs.size == 0:
        raise EmptyPartition()
    bad = np.nonzero(np.diff(xs) <= 0)[0]
    if bad.size:
        raise Unsorted(int(bad[0]) + 1)
    n = xs.size
    ranks = np.arange(1, n + 1, dtype=np.float64)
    over = max(0.0, float(np.max(ranks / n - xs)))
    under = max(0.0, float(np.max(xs - (ranks - 1) / n)))
    return over + under


def star_discrepancy_prefixes(ps) -> list[Fraction]:
    """N * D*_N for every prefix N = 1..len(ps), exactly.

    Needs rational coordinates whose common denominator L keeps the integer
    terms inside 64 bits.  Every position p of the final sorted order keeps
    the two scaled deviation terms

        over_p  = rank_p * L - N * y_p
        under_p = N * y_p - (rank_p - 1) * L

    where y_p is the coordinate times L.  Adding a point raises the rank of
    every later position (a slice update) and N grows by one (a full-array
    update), so each prefix costs a few vectorized passes.
    """
    values = _values_1d(ps)
    if not _all_rational(values):
        raise ValidationError("prefix scan needs exact rational coordinates")
    _check_unit(values)
    total = len(values)
    denom = _common_denominator(values)
    if not denom or 4 * denom * total >= 2**58:
        raise ValidationError("common denominator too large for the integer prefix scan")
    nums = np.array([int(v * denom) for v in values], dtype=np.int64)
    order = np.argsort(nums, kind="stable")
    position = np.empty(total, dtype=np.int64)
    position[order] = np.arange(total, dtype=np.int64)
    ys = nums[order]
    # inactive slots start far below any reachable value and receive the same updates
    sentinel = -(2**60)
    over = np.full(total, sentinel, dtype=np.int64)
    under = np.full(total, sentinel, dtype=np.int64)
    rank = np.zeros(total, dtype=np.int64)
    out: list[Fraction] = []
    for n in range(1, total + 1):
        q = int(position[n - 1])
        rank[q:] += 1
        over[q:] += denom
        under[q:] -= denom
        over -= ys
        under += ys
        r = int(rank[q])
        over[q] = r * denom - n * int(ys[q])
        under[q] = n * int(ys[q]) - (r - 1) * denom
        best = max(int(over.max()), int(under.max()), 0)
        out.append(Fraction(best, int(denom)))
    return out


def star_discrepancy_dd(ps: PointSet, max_n: int | None = None, exact: bool = False) -> float | Fraction:
    """Exact star discrepancy for dimensions 2 and 3.

    Upper corners range over the sample coordinates plus 1 on every axis.
    At each corner the open box count gives volume - count/N, and the closed
    count (coordinates <= corner, except strict at a corner coordinate of 1)
    gives count/N - volume as a one-sided limit.
    """
    if len(ps) == 0:
        raise EmptyPointSet()
    d = ps.dim
    if d == 1:
        return star_discrepancy_1d(ps, exact=exact)
    if d > 3:
        raise UnsupportedDim(d)
    cap = DD_CAPS[d] if max_n is None else max_n
    n = len(ps)
    if n > cap:
        raise TooLarge(n, cap)
    columns = list(zip(*ps.points))
    for column in columns:
        _check_unit(column)
    if ps.is_exact():
        denoms = [_common_denominator(c) for c in columns]
        if all(denoms) and n * math.prod(denoms) < _INT_LIMIT:
            ints = [np.array([int(v * q) for v in c], dtype=np.int64) for c, q in zip(columns, denoms)]
            value = _dd_scan(ints, denoms, n, integer=True)
            return value if exact else float(value)
    floats = [np.array([float(v) for v in c], dtype=np.float64) for c in columns]
    value = _dd_scan(floats, [1.0] * d, n, integer=False)
    return value if exact else float(value)


def _dd_scan(coords, scales, n, integer: bool) -> Fraction:
    """Enumerate critical corners; ``coords`` are per-axis arrays scaled by ``scales``.

    In integer mode every coordinate is numerator/scale and the deviation
    times n * prod(scales) is an exact integer.  In float mode candidates
    within a small slack of the running maximum are re-evaluated exactly.
    """
    d = len(coords)
    one = [int(s) if integer else 1.0 for s in scales]
    grids = [np.union1d(c, np.array([o], dtype=c.dtype)) for c, o in zip(coords, one)]
    total_scale = n * math.prod(int(s) for s in scales) if integer else None
    best = Fraction(0)
    best_float = 0.0
    candidates = []

    def exact_value(corner, count, closed):
        vol = Fraction(1)
        for value, scale in zip(corner, scales):
            vol *= Fraction(int(value), int(scale)) if integer else Fraction(float(value))
        dev = Fraction(count, n) - vol if closed else vol - Fraction(count, n)
        return dev

    if d == 2:
        xs, ys = coords
        gx, gy = grids
        for a1 in gx:
            if a1 == one[0]:
                open_mask = xs < a1
                closed_mask = open_mask
            else:
                open_mask = xs < a1
                closed_mask = xs <= a1
            y_open = np.sort(ys[open_mask])
            y_closed = np.sort(ys[closed_mask])
            open_counts = np.searchsorted(y_open, gy, side="left")
            closed_counts = np.searchsorted(y_closed, gy, side="right")
            if gy[-1] == one[1]:
                closed_counts[-1] = np.searchsorted(y_closed, one[1], side="left")
            _collect_2d(a1, gy, open_counts, closed_counts, n, scales, integer, total_scale, candidates)
    else:
        pts = np.stack(coords, axis=1)
        mesh = np.stack(np.meshgrid(*grids, indexing="ij"), axis=-1).reshape(-1, d)
        less = pts[None, :, :] < mesh[:, None, :]
        is_one = mesh == np.array(one, dtype=mesh.dtype)
        leq = np.where(is_one[:, None, :], less, pts[None, :, :] <= mesh[:, None, :])
        open_counts = np.all(less, axis=2).sum(axis=1)
        closed_counts = np.all(leq, axis=2).sum(axis=1)
        _collect_nd(mesh, open_counts, closed_counts, n, scales, integer, total_scale, candidates)

    if integer:
        for numerator in candidates:
            best = max(best, Fraction(int(numerator), total_scale))
        return best
    for score, corner, count, closed in candidates:
        best_float = max(best_float, score)
    for score, corner, count, closed in candidates:
        if score >= best_float - _CANDIDATE_SLACK:
            best = max(best, exact_value(corner, count, closed))
    return max(best, Fraction(0))


def _collect_2d(a1, gy, open_counts, closed_counts, n, scales, integer, total_scale, out):
    if integer:
        sx, sy = int(scales[0]), int(scales[1])
        vol = int(a1) * gy.astype(np.int64)
        open_dev = n * vol - open_counts * sx * sy
        closed_dev = closed_counts * sx * sy - n * vol
        out.append(int(max(open_dev.max(), closed_dev.max())))
        return
    vol = float(a1) * gy
    open_dev = vol - open_counts / n
    closed_dev = closed_counts / n - vol
    for devs, counts, closed in ((open_dev, open_counts, False), (closed_dev, closed_counts, True)):
        top = devs.max()
        for j in np.nonzero(devs >= top - _CANDIDATE_SLACK)[0]:
            out.append((float(devs[j]), (a1, gy[j]), int(counts[j]), closed))


def _collect_nd(mesh, open_counts, closed_counts, n, scales, integer, total_scale, out):
    if integer:
        vol = np.prod(mesh.astype(np.int64), axis=1)
        prod_scale = math.prod(int(s) for s in scales)
        open_dev = n * vol - open_counts * prod_scale
        closed_dev = closed_counts * prod_scale - n * vol
        out.append(int(max(open_dev.max(), closed_dev.max())))
        return
    vol = np.prod(mesh, axis=1)
    open_dev = vol - open_counts / n
    closed_dev = closed_counts / n - vol
    for devs, counts, closed in ((open_dev, open_counts, False), (closed_dev, closed_counts, True)):
        top = devs.max()
        for j in np.nonzero(devs >= top - _CANDIDATE_SLACK)[0]:
            out.append((float(devs[j]), tuple(mesh[j]), int(counts[j]), closed))
