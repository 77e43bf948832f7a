"""Self-similar sets: similarity dimension, address-ordered point sequences,
probability-ordered partitions, and elementary discrepancy.

Addresses.  A word (j_1, ..., j_k) names the map psi_{j_k} o ... o psi_{j_1}:
``j_1`` is applied first and the last letter is the outermost map.  The
elementary set of a word is that composition applied to the whole attractor,
so a set contains every set whose word ends with its own word.  Internally a
word is read backwards as a *path* (outermost map first), under which
containment becomes a prefix relation.

Points.  Point number n (0-based) of the equal-ratio sequence applies the
maps given by the base-m digits of n, least significant digit outermost,
to a start point fixed by psi_1.  Padding a word with leading 1s therefore
names the same point, and the sequence does not depend on how many points
are requested.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import BudgetExceeded, DepthTooShallow, UnequalRatios, ValidationError
from .limits import interval_cap
from .sequences import PointSet


@dataclass(frozen=True)
class Similarity:
    """x -> ratio * R x + translation with R orthogonal; ``matrix`` stores ratio * R."""

    ratio: Fraction | float
    matrix: tuple[tuple, ...]
    translation: tuple

    @property
    def dim(self) -> int:
        return len(self.translation)

    def __call__(self, x: Sequence) -> tuple:
        return tuple(
            sum((a * xi for a, xi in zip(row, x)), 0) + t
            for row, t in zip(self.matrix, self.translation)
        )

    @classmethod
    def scaled(cls, ratio, translation, rotation=None) -> "Similarity":
        dim = len(translation)
        if rotation is None:
            rotation = tuple(tuple(1 if i == j else 0 for j in range(dim)) for i in range(dim))
        matrix = tuple(tuple(ratio * a for a in row) for row in rotation)
        return cls(ratio, matrix, tuple(translation))


@dataclass(frozen=True)
class AddressWord:
    """Letters 1..m in application order (first letter applied first)."""

    letters: tuple[int, ...]

    @property
    def path(self) -> tuple[int, ...]:
        """Letters outermost map first; set containment is a prefix relation on paths."""
        return self.letters[::-1]

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        if all(letter <= 9 for letter in self.letters):
            return "".join(str(letter) for letter in self.letters)
        return ".".join(str(letter) for letter in self.letters)

    @classmethod
    def from_path(cls, path: Sequence[int]) -> "AddressWord":
        return cls(tuple(path)[::-1])

    @classmethod
    def parse(cls, text: str) -> "AddressWord":
        parts = text.split(".") if "." in text else list(text)
        return cls(tuple(int(part) for part in parts if part))

    def contains(self, other: "AddressWord") -> bool:
        """True when the elementary set of ``other`` lies inside this word's set."""
        mine, theirs = self.path, other.path
        if len(theirs) < len(mine):
            theirs = theirs + (1,) * (len(mine) - len(theirs))
        return theirs[: len(mine)] == mine


@dataclass(frozen=True)
class IFSSystem:
    maps: tuple[Similarity, ...]
    name: str = ""
    start: tuple | None = None  # a point fixed by the first map

    def __post_init__(self):
        if len(self.maps) < 2:
            raise ValidationError("an IFS needs at least two maps")
        dims = {f.dim for f in self.maps}
        if len(dims) != 1:
            raise ValidationError("maps disagree on dimension")
        for f in self.maps:
            if not 0 < f.ratio < 1:
                raise ValidationError(f"ratio {f.ratio} outside (0, 1)")

    @property
    def m(self) -> int:
        return len(self.maps)

    @property
    def dim(self) -> int:
        return self.maps[0].dim

    @property
    def ratios(self) -> tuple:
        return tuple(f.ratio for f in self.maps)

    def equal_ratio(self) -> bool:
        first = self.ratios[0]
        return all(_close(r, first) for r in self.ratios)


def _close(a, b) -> bool:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    return abs(float(a) - float(b)) <= 1e-12


_HALF = Fraction(1, 2)
_THIRD = Fraction(1, 3)


def unit_interval(m: int) -> IFSSystem:
    """phi_k(x) = (k - 1)/m + x/m on [0, 1]; its point sequence is van der Corput base m."""
    if m < 2:
        raise ValidationError("m must be >= 2")
    maps = tuple(Similarity.scaled(Fraction(1, m), (Fraction(k, m),)) for k in range(m))
    return IFSSystem(maps, f"unit-interval:{m}", (Fraction(0),))


def _rotation(degrees: float):
    c, s = math.cos(math.radians(degrees)), math.sin(math.radians(degrees))
    return ((c, -s), (s, c))


def preset(name: str) -> IFSSystem:
    """Named systems: cantor, sierpinski-right, sierpinski-equilateral, koch, unit-interval:m."""
    if name == "cantor":
        maps = (
            Similarity.scaled(_THIRD, (Fraction(0),)),
            Similarity.scaled(_THIRD, (Fraction(2, 3),)),
        )
        return IFSSystem(maps, name, (Fraction(0),))
    if name == "sierpinski-right":
        zero = Fraction(0)
        maps = (
            Similarity.scaled(_HALF, (zero, zero)),
            Similarity.scaled(_HALF, (zero, _HALF)),
            Similarity.scaled(_HALF, (_HALF, _HALF)),
        )
        return IFSSystem(maps, name, (zero, zero))
    if name == "sierpinski-equilateral":
        maps = (
            Similarity.scaled(0.5, (0.0, 0.0)),
            Similarity.scaled(0.5, (0.25, math.sqrt(3) / 4)),
            Similarity.scaled(0.5, (0.5, 0.0)),
        )
        return IFSSystem(maps, name, (0.0, 0.0))
    if name == "koch":
        third = 1.0 / 3.0
        root = math.sqrt(3) / 6
        # the third map is a rotation composed with a reflection
        maps = (
            Similarity.scaled(third, (0.0, 0.0)),
            Similarity.scaled(third, (third, 0.0), _rotation(60)),
            Similarity(third, ((-1.0 / 6, root), (root, 1.0 / 6)), (2 * third, 0.0)),
            Similarity.scaled(third, (2 * third, 0.0)),
        )
        return IFSSystem(maps, name, (0.0, 0.0))
    if name.startswith("unit-interval"):
        _, _, m = name.partition(":")
        return unit_interval(int(m) if m else 2)
    raise ValidationError(f"unknown preset {name!r}")


PRESETS = ("cantor", "sierpinski-right", "sierpinski-equilateral", "koch", "unit-interval:m")


def line_system(ratios: Sequence) -> IFSSystem:
    """Maps of [0, 1] with the given ratios, placed left to right with equal gaps.

    psi_1 keeps 0 fixed, so 0 is the start point.
    """
    ratios = [Fraction(r) if not isinstance(r, float) else r for r in ratios]
    m = len(ratios)
    if m < 2:
        raise ValidationError("need at least two ratios")
    total = sum(ratios)
    if total > 1:
        raise ValidationError("ratios sum above 1; pieces would overlap")
    gap = (1 - total) / (m - 1)
    maps, offset = [], 0 * total
    for r in ratios:
        maps.append(Similarity.scaled(r, (offset,)))
        offset = offset + r + gap
    return IFSSystem(tuple(maps), "line:" + ",".join(str(r) for r in ratios), (0 * total,))


def moran_dimension(ratios: Sequence) -> float:
    """The s with sum c_i ** s = 1 (bisection to bracket, then Newton)."""
    cs = [float(c) for c in ratios]
    if len(cs) < 2 or any(not 0 < c < 1 for c in cs):
        raise ValidationError("need at least two ratios in (0, 1)")
    logs = [math.log(c) for c in cs]

    def g(s):
        return math.fsum(math.exp(s * lc) for lc in logs) - 1.0

    def dg(s):
        return math.fsum(lc * math.exp(s * lc) for lc in logs)

    lo, hi = 0.0, 1.0
    while g(hi) > 0:
        lo, hi = hi, hi * 2
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    s = 0.5 * (lo + hi)
    for _ in range(20):
        step = g(s) / dg(s)
        s -= step
        if abs(step) < 1e-16:
            break
    return s


def apply_address(system: IFSSystem, word: AddressWord | Sequence[int], x: Sequence) -> tuple:
    """Apply the word's maps to x, first letter first."""
    letters = word.letters if isinstance(word, AddressWord) else tuple(word)
    point = tuple(x)
    for letter in letters:
        if not 1 <= letter <= system.m:
            raise ValidationError(f"letter {letter} outside 1..{system.m}")
        point = system.maps[letter - 1](point)
    return point


@dataclass(frozen=True)
class FractalPoints:
    system: IFSSystem
    points: PointSet
    words: tuple[AddressWord, ...]
    level: int


@dataclass(frozen=True)
class FractalPartition:
    system: IFSSystem
    words: tuple[AddressWord, ...]
    probabilities: tuple[float, ...]
    step: int
    letter_probs: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.words)


def _levels_needed(m: int, n: int) -> int:
    level, size = 0, 1
    while size < n:
        level += 1
        size *= m
    return level


def _start_point(system: IFSSystem, x0) -> tuple:
    x0 = system.start if x0 is None else tuple(x0)
    if x0 is None:
        raise ValidationError("a start point is required")
    image = system.maps[0](x0)
    if any(abs(float(a) - float(b)) > 1e-12 for a, b in zip(image, x0)):
        raise ValidationError("the start point must be fixed by the first map")
    return x0


def vdc_fractal_points(system: IFSSystem, count: int, x0=None) -> FractalPoints:
    """First ``count`` points of the equal-ratio sequence with their addresses."""
    if count < 1:
        raise ValidationError("count must be >= 1")
    if not system.equal_ratio():
        raise UnequalRatios()
    x0 = _start_point(system, x0)
    m = system.m
    level = _levels_needed(m, count)
    current = [x0]
    for _ in range(level):
        current = [f(y) for y in current for f in system.maps]
    points = PointSet(system.dim, tuple(current[:count]))
    words = tuple(_word_of_index(n, m, level) for n in range(count))
    return FractalPoints(system, points, words, level)


def _word_of_index(n: int, m: int, level: int) -> AddressWord:
    path = []
    for _ in range(level):
        n, digit = divmod(n, m)
        path.append(digit + 1)
    return AddressWord.from_path(path)


def vdc_fractal_partition(system: IFSSystem, level: int, cap: int | None = None) -> FractalPartition:
    """All m**level elementary sets of one level, in point-generation order."""
    if not system.equal_ratio():
        raise UnequalRatios()
    cap = interval_cap() if cap is None else cap
    m = system.m
    size = m**level
    if size > cap:
        raise BudgetExceeded(size, cap)
    words = tuple(_word_of_index(n, m, level) for n in range(size))
    probability = 1.0 / size
    return FractalPartition(system, words, (probability,) * size, level, (1.0 / m,) * m)


def khodak_fractal_partition(system: IFSSystem, steps: int, cap: int | None = None) -> FractalPartition:
    """Repeatedly subdivide every set of highest probability P(E) = prod c_j ** s.

    Since c -> c ** s is increasing, comparing products of ratios is the
    same as comparing probabilities; rational ratios make that comparison
    exact.  Children replace their parent in map order, giving the tree's
    left-to-right leaf order.
    """
    cap = interval_cap() if cap is None else cap
    s = moran_dimension(system.ratios)
    letter_probs = tuple(float(c) ** s for c in system.ratios)
    exact = all(isinstance(c, Fraction) for c in system.ratios)
    if exact:
        factors = list(system.ratios)
    else:
        factors = [math.log(float(c)) for c in system.ratios]
    leaves = [((), Fraction(1) if exact else 0.0)]
    m = system.m
    for _ in range(steps):
        best = max(key for _, key in leaves)
        if exact:
            heavy = [key == best for _, key in leaves]
        else:
            heavy = [abs(key - best) <= 1e-12 * max(1.0, abs(best)) for _, key in leaves]
        grown = len(leaves) + sum(heavy) * (m - 1)
        if grown > cap:
            raise BudgetExceeded(grown, cap)
        nxt = []
        for (path, key), split in zip(leaves, heavy):
            if not split:
                nxt.append((path, key))
                continue
            for j in range(m):
                child_key = key * factors[j] if exact else key + factors[j]
                nxt.append((path + (j + 1,), child_key))
        leaves = nxt
    words = tuple(AddressWord.from_path(path) for path, _ in leaves)
    probs = tuple(math.prod(letter_probs[j - 1] for j in path) for path, _ in leaves)
    return FractalPartition(system, words, probs, steps, letter_probs)


def _paths_matrix(paths: Sequence[tuple[int, ...]], depth: int) -> np.ndarray:
    out = np.ones((len(paths), depth), dtype=np.int64)
    for i, path in enumerate(paths):
        cut = path[:depth]
        out[i, : len(cut)] = cut
    return out


def _largest_unoccupied(letter_probs, occupied: set, depth: int, equal: bool, m: int):
    """Largest P(E) over level-``depth`` sets not in ``occupied`` (None if all are)."""
    if equal:
        return None if len(occupied) >= m**depth else Fraction(1, m**depth)
    heap = [(-1.0, ())]
    while heap:
        neg, path = heapq.heappop(heap)
        if len(path) == depth:
            if path not in occupied:
                return -neg
            continue
        for j, pj in enumerate(letter_probs, start=1):
            heapq.heappush(heap, (neg * pj, path + (j,)))
    return None


def _level_deviations(paths, total: int, letter_probs, depth_limit: int, padded: bool, equal: bool):
    """sup |N_E/total - P(E)| for each level 0..depth_limit.

    With ``padded`` the paths are infinite (continued by letter 1), which is
    the point-sequence convention; otherwise a path only reaches sets of
    level at most its length.
    """
    m = len(letter_probs)
    out = []
    for depth in range(depth_limit + 1):
        counts: dict[tuple[int, ...], int] = {}
        for path in paths:
            if not padded and len(path) < depth:
                continue
            prefix = tuple(path[:depth]) + (1,) * max(0, depth - len(path))
            counts[prefix] = counts.get(prefix, 0) + 1
        worst = Fraction(0) if equal else 0.0
        for prefix, c in counts.items():
            if equal:
                dev = abs(Fraction(c, total) - Fraction(1, m**depth))
            else:
                dev = abs(c / total - math.prod(letter_probs[j - 1] for j in prefix))
            worst = max(worst, dev)
        empty = _largest_unoccupied(letter_probs, set(counts), depth, equal, m)
        if empty is not None:
            worst = max(worst, empty)
        out.append(worst)
    return out


def default_point_depth(m: int, count: int) -> int:
    """ceil(log count / log m) + 1, computed in integers."""
    return _levels_needed(m, count) + 1


def elementary_deviation_by_level(fp: FractalPoints, count: int | None = None, max_depth: int | None = None) -> list[Fraction]:
    count = len(fp.words) if count is None else count
    m = fp.system.m
    depth = default_point_depth(m, count) if max_depth is None else max_depth
    paths = [w.path for w in fp.words[:count]]
    return _level_deviations(paths, count, (1.0 / m,) * m, depth, padded=True, equal=True)


def elementary_discrepancy_points(fp: FractalPoints, count: int | None = None, max_depth: int | None = None, exact: bool = False):
    """Sup over elementary sets of level <= max_depth of |#points in E / N - P(E)|.

    Membership is symbolic: a point lies in E when E's word is a suffix of
    the point's word (padded with leading 1s).
    """
    count = len(fp.words) if count is None else count
    if not 1 <= count <= len(fp.words):
        raise ValidationError("prefix length outside the available points")
    m = fp.system.m
    depth = default_point_depth(m, count) if max_depth is None else max_depth
    if m**depth <= count:
        raise DepthTooShallow(depth, count)
    value = max(elementary_deviation_by_level(fp, count, depth))
    return value if exact else float(value)


def elementary_discrepancy_sweep(fp: FractalPoints, limit: int | None = None) -> list[Fraction]:
    """N * D_N for N = 1..limit, each at its default depth, by incremental counting.

    Every level keeps a count per elementary set and a histogram of those
    counts, so the largest and smallest occupancy are O(1) to update.
    N * |c/N - m**-j| = |c m**j - N| / m**j is evaluated in integers.
    """
    limit = len(fp.words) if limit is None else limit
    m = fp.system.m
    top = default_point_depth(m, limit)
    counts = [np.zeros(m**j, dtype=np.int64) for j in range(top + 1)]
    histograms = [{0: m**j} for j in range(top + 1)]
    lowest = [0] * (top + 1)
    highest = [0] * (top + 1)
    out = []
    for index in range(limit):
        path = fp.words[index].path
        code = 0
        for j in range(1, top + 1):
            letter = path[j - 1] if j - 1 < len(path) else 1
            code = code * m + (letter - 1)
            c = int(counts[j][code])
            counts[j][code] = c + 1
            hist = histograms[j]
            hist[c] -= 1
            hist[c + 1] = hist.get(c + 1, 0) + 1
            if c == lowest[j] and hist[c] == 0:
                lowest[j] = c + 1
            highest[j] = max(highest[j], c + 1)
        n = index + 1
        depth = default_point_depth(m, n)
        best = Fraction(0)
        for j in range(1, depth + 1):
            scale = m**j
            numerator = max(highest[j] * scale - n, n - lowest[j] * scale)
            best = max(best, Fraction(numerator, scale))
        out.append(best)
    return out


def default_partition_depth(letter_probs: Sequence[float], count: int) -> int:
    """Smallest depth whose heaviest set has probability below 1/count."""
    p_max = max(letter_probs)
    depth = 0
    while p_max**depth >= 1.0 / count:
        depth += 1
    return depth


def elementary_discrepancy_partition(fp: FractalPartition, max_depth: int | None = None, exact: bool = False):
    """Sup over elementary sets E of |N_E/k - P(E)|, N_E counting partition
    sets whose word makes them subsets of E."""
    k = len(fp.words)
    depth = default_partition_depth(fp.letter_probs, k) if max_depth is None else max_depth
    if max(fp.letter_probs) ** depth >= 1.0 / k:
        raise DepthTooShallow(depth, k)
    equal = len(set(fp.letter_probs)) == 1
    paths = [w.path for w in fp.words]
    value = max(_level_deviations(paths, k, fp.letter_probs, depth, padded=False, equal=equal))
    return value if exact else float(value)


def partition_deviation_by_level(fp: FractalPartition, max_depth: int) -> list:
    equal = len(set(fp.letter_probs)) == 1
    paths = [w.path for w in fp.words]
    return _level_deviations(paths, len(fp.words), fp.letter_probs, max_depth, padded=False, equal=equal)
