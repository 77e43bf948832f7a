"""Khodak trees, rational relations among log-probabilities, and the spectral
constants that govern the growth of the tree's leaf count.

T(r) is the m-ary tree in which a node x is internal iff P(x) >= r, where P
multiplies the branch probabilities along the path from the root.  Its leaf
count M_r satisfies M_r = (m - 1) A(1/r) + 1 with

    A(v) = 0                           for v < 1
    A(v) = 1 + sum_j A(p_j v)           for v >= 1.

When every log(1/p_j) is an integer multiple n_j of a common Lambda, the
roots of f(z) = 1 - sum_j z**n_j control the error of the leading-order
prediction (m - 1)/(r H) * Q1(log(1/r)).
"""

from __future__ import annotations

import cmath
import heapq
import math
import warnings
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from ._algebra import LengthAlgebra
from .errors import BudgetExceeded, IrrationallyRelated, NoConvergence, NotApplicable, ValidationError
from .limits import interval_cap
from .refine import BASE, NUMERIC, RATIONAL, RefinementRule

DEFAULT_DEPTH = 40
RELATION_TOLERANCE = 1e-10
MAX_RELATION_DENOMINATOR = 1000
MAX_DEGREE = 64
LATTICE_BUDGET = 10**8


@dataclass(frozen=True)
class ProbabilityVector:
    """Branch probabilities p_1..p_m together with their comparison algebra."""

    probs: tuple
    algebra: LengthAlgebra
    exponents: tuple[int, ...] | None = None

    @classmethod
    def of(cls, source) -> "ProbabilityVector":
        if isinstance(source, ProbabilityVector):
            return source
        if isinstance(source, RefinementRule):
            return cls(source.probs, source.algebra, source.exponents)
        values = list(source)
        if all(isinstance(v, (Fraction, int)) for v in values):
            rule = RefinementRule.rational(values)
        else:
            rule = RefinementRule.numeric([float(v) for v in values])
        return cls(rule.probs, rule.algebra, rule.exponents)

    @property
    def m(self) -> int:
        return len(self.probs)

    @property
    def p_min(self):
        return min(self.probs)


@dataclass(frozen=True)
class Threshold:
    """A tree threshold r carried exactly as a lattice node's key."""

    key: object
    exps: tuple[int, ...]
    value: float
    log_inverse: float  # log(1/r)


@dataclass(frozen=True)
class RationalRelation:
    lam: float
    n: tuple[int, ...]


@dataclass(frozen=True)
class SpectralData:
    lam: float
    n: tuple[int, ...]
    entropy: float
    c_prime: float
    eta: float
    d: int
    roots: tuple[tuple[complex, int], ...]
    dominant: float

    def as_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "n": list(self.n),
            "entropy": self.entropy,
            "c_prime": self.c_prime,
            "eta": self.eta if math.isfinite(self.eta) else None,
            "d": self.d,
            "dominant_root": self.dominant,
            "roots": [
                {"re": z.real, "im": z.imag, "multiplicity": mult} for z, mult in self.roots
            ],
        }


def entropy(p) -> float:
    """H = sum p_i log(1/p_i), natural logarithm."""
    pv = ProbabilityVector.of(p)
    return math.fsum(float(x) * -math.log(float(x)) for x in pv.probs)


def _threshold_key(pv: ProbabilityVector, r):
    if isinstance(r, Threshold):
        return r.key
    if not 0 < r <= 1:
        raise ValidationError(f"r={r} outside (0, 1]")
    return pv.algebra.threshold(r)


def _count_internal(pv: ProbabilityVector, limit, budget: int = LATTICE_BUDGET) -> int:
    """A(v): number of nodes with P(x) >= r, memoized over the exponent lattice."""
    algebra = pv.algebra
    groups = algebra.groups
    root = (0,) * groups
    root_key = algebra.key(root)
    if not algebra.inside(root_key, limit):
        return 0
    memo: dict[tuple[int, ...], int] = {}
    keys = {root: root_key}
    stack = [root]
    while stack:
        node = stack[-1]
        if node in memo:
            stack.pop()
            continue
        pending = []
        for g in range(groups):
            child = node[:g] + (node[g] + 1,) + node[g + 1 :]
            if child in memo:
                continue
            ckey = keys.get(child)
            if ckey is None:
                ckey = algebra.step_key(keys[node], g)
                keys[child] = ckey
            if algebra.inside(ckey, limit):
                pending.append(child)
            else:
                memo[child] = 0
        if pending:
            stack.extend(pending)
            if len(keys) > budget:
                raise BudgetExceeded(len(keys), budget)
            continue
        total = 1
        for g in range(groups):
            child = node[:g] + (node[g] + 1,) + node[g + 1 :]
            total += algebra.counts[g] * memo[child]
        memo[node] = total
        stack.pop()
    return memo[root]


def a_of_v(p, v) -> int:
    """A(v) of the recurrence above; ``v`` may be a Threshold standing for 1/r."""
    pv = ProbabilityVector.of(p)
    if isinstance(v, Threshold):
        return _count_internal(pv, v.key)
    if v <= 0:
        raise ValidationError("v must be positive")
    if v < 1:
        return 0
    r = 1 / Fraction(v) if not isinstance(v, float) else 1.0 / v
    return _count_internal(pv, pv.algebra.threshold(r))


def m_of_r(p, r) -> int:
    """Number of external nodes of T(r)."""
    pv = ProbabilityVector.of(p)
    limit = _threshold_key(pv, r)
    return (pv.m - 1) * _count_internal(pv, limit) + 1


def external_nodes(p, r, cap: int | None = None) -> list[tuple[int, ...]]:
    """Leaves of T(r) in left-to-right order, as exponent vectors over the
    distinct probability values."""
    pv = ProbabilityVector.of(p)
    cap = interval_cap() if cap is None else cap
    algebra = pv.algebra
    limit = _threshold_key(pv, r)
    root = (0,) * algebra.groups
    leaves: list[tuple[int, ...]] = []
    stack = [(root, algebra.key(root))]
    while stack:
        node, key = stack.pop()
        if not algebra.inside(key, limit):
            leaves.append(node)
            if len(leaves) > cap:
                raise BudgetExceeded(len(leaves), cap)
            continue
        children = []
        for g in algebra.letter_group:
            child = node[:g] + (node[g] + 1,) + node[g + 1 :]
            children.append((child, algebra.step_key(key, g)))
        stack.extend(reversed(children))
    return leaves


def leaf_multiset(p, r) -> Counter:
    return Counter(external_nodes(p, r))


def r_sequence(p, count: int) -> list[Threshold]:
    """r_1 = 1 > r_2 > ... : the distinct node probabilities in decreasing order.

    r_j is the largest leaf probability after j - 1 refinement steps, so
    M_{r_j} equals the partition size after step j.
    """
    pv = ProbabilityVector.of(p)
    algebra = pv.algebra
    root = (0,) * algebra.groups
    heap = [(algebra.key(root), root, algebra.key(root))]
    seen = {root}
    out: list[Threshold] = []
    while heap and len(out) < count:
        _, node, key = heapq.heappop(heap)
        if not out or not algebra.same(out[-1].key, key):
            out.append(
                Threshold(key, node, math.exp(-algebra.log_cost(node)), algebra.log_cost(node))
            )
        for g in range(algebra.groups):
            child = node[:g] + (node[g] + 1,) + node[g + 1 :]
            if child not in seen:
                seen.add(child)
                ckey = algebra.step_key(key, g)
                heapq.heappush(heap, (ckey, child, ckey))
    return out


def continued_fraction(x, depth: int = DEFAULT_DEPTH) -> list[int]:
    """Partial quotients of the exact binary value of x, stopping when x
    becomes an integer or a convergent denominator would exceed 10**15."""
    if depth > 60:
        raise ValidationError("depth must be <= 60")
    value = Fraction(x)
    if value <= 0:
        raise ValidationError("x must be positive")
    quotients: list[int] = []
    q_prev, q = 0, 1
    for _ in range(depth):
        a = value.numerator // value.denominator
        q_next = a * q + q_prev
        if quotients and q_next > 10**15:
            break
        quotients.append(a)
        q_prev, q = q, q_next
        rest = value - a
        if rest == 0:
            break
        value = 1 / rest
    return quotients


def convergents(quotients: Sequence[int]) -> list[Fraction]:
    out = []
    h_prev, h = 1, quotients[0]
    k_prev, k = 0, 1
    out.append(Fraction(h, k))
    for a in quotients[1:]:
        h_prev, h = h, a * h + h_prev
        k_prev, k = k, a * k + k_prev
        out.append(Fraction(h, k))
    return out


def detect_rational_relation(
    p,
    depth: int = DEFAULT_DEPTH,
    tolerance: float = RELATION_TOLERANCE,
    max_denominator: int = MAX_RELATION_DENOMINATOR,
) -> RationalRelation | None:
    """Lambda and coprime n_j with log(1/p_j) = n_j Lambda, or None.

    Single-base rules are decided exactly.  Otherwise each ratio
    log(1/p_j) / log(1/p_1) is matched to the first continued-fraction
    convergent within ``tolerance`` whose denominator is at most
    ``max_denominator``; rational probabilities then confirm the candidate
    exactly through p_j ** k == p_1 ** h.
    """
    pv = ProbabilityVector.of(p)
    algebra = pv.algebra
    if algebra.mode == BASE:
        g = reduce(math.gcd, pv.exponents)
        return RationalRelation(g * algebra.neglog_alpha, tuple(e // g for e in pv.exponents))
    ref_value = algebra.values[0]
    ref = algebra.neglogs[0]
    ratios = []
    for value, cost in zip(algebra.values, algebra.neglogs):
        x = cost / ref
        found = None
        for c in convergents(continued_fraction(x, depth)):
            if c.denominator > max_denominator:
                break
            if abs(x - c) < tolerance * max(1.0, x):
                found = c
                break
        if found is None:
            return None
        if algebra.mode == RATIONAL and value ** found.denominator != ref_value ** found.numerator:
            return None
        ratios.append(found)
    lcm = reduce(lambda a, b: a * b // math.gcd(a, b), (c.denominator for c in ratios), 1)
    multiples = [int(c * lcm) for c in ratios]
    g = reduce(math.gcd, multiples)
    per_group = [v // g for v in multiples]
    lam = ref * g / lcm
    return RationalRelation(lam, tuple(per_group[grp] for grp in algebra.letter_group))


def _cluster_roots(poly: np.ndarray, raw: np.ndarray) -> list[tuple[complex, int]]:
    """Group numerically split multiple roots and refine each cluster centre
    by Newton on the derivative whose order matches the multiplicity."""
    derivs = [poly]
    for _ in range(len(poly)):
        derivs.append(npoly.polyder(derivs[-1]))
    remaining = [complex(z) for z in raw]
    clusters: list[list[complex]] = []
    while remaining:
        z = remaining.pop(0)
        group = [z]
        rest = []
        for w in remaining:
            if abs(w - z) <= 1e-4 * max(1.0, abs(z)):
                group.append(w)
            else:
                rest.append(w)
        remaining = rest
        clusters.append(group)
    out = []
    for group in clusters:
        mult = len(group)
        centre = sum(group) / mult
        target = derivs[mult - 1]
        slope = derivs[mult]
        for _ in range(50):
            fz = npoly.polyval(centre, target)
            dz = npoly.polyval(centre, slope)
            if dz == 0:
                break
            step = fz / dz
            centre -= step
            if abs(step) < 1e-16 * max(1.0, abs(centre)):
                break
        scale = max(1.0, float(np.sum(np.abs(poly))))
        if mult > 1 and any(abs(npoly.polyval(centre, derivs[j])) > 1e-7 * scale for j in range(mult - 1)):
            # not a genuine multiple root: keep the separately polished members
            for w in group:
                out.append((_newton(poly, derivs[1], w), 1))
            continue
        out.append((centre, mult))
    return out


def _newton(poly, dpoly, z: complex) -> complex:
    for _ in range(50):
        dz = npoly.polyval(z, dpoly)
        if dz == 0:
            break
        step = npoly.polyval(z, poly) / dz
        z -= step
        if abs(step) < 1e-16 * max(1.0, abs(z)):
            break
    return z


def characteristic_polynomial(n: Sequence[int]) -> np.ndarray:
    """Ascending coefficients of f(z) = 1 - sum_j z**n_j."""
    degree = max(n)
    coeffs = np.zeros(degree + 1)
    coeffs[0] = 1.0
    for nj in n:
        coeffs[nj] -= 1.0
    return coeffs


def spectral_analysis(p) -> SpectralData:
    pv = ProbabilityVector.of(p)
    relation = detect_rational_relation(pv)
    if relation is None:
        raise IrrationallyRelated()
    lam, n = relation.lam, relation.n
    if max(n) > MAX_DEGREE:
        raise ValidationError(f"characteristic polynomial degree {max(n)} exceeds {MAX_DEGREE}")
    poly = characteristic_polynomial(n)
    raw = np.roots(poly[::-1])
    roots = _cluster_roots(poly, raw)
    dominant_value = math.exp(-lam)
    residual = abs(npoly.polyval(dominant_value, poly))
    if residual > 1e-12:
        raise ValidationError(f"exp(-Lambda) is not a root (residual {residual:.3g})")
    dominant_index = min(range(len(roots)), key=lambda i: abs(roots[i][0] - dominant_value))
    others = [r for i, r in enumerate(roots) if i != dominant_index]
    if others:
        smallest = min(abs(z) for z, _ in others)
        tied = [mult for z, mult in others if abs(abs(z) - smallest) <= 1e-9 * smallest]
        eta = 1.0 + math.log(smallest) / lam
        d = max(tied) - 1
    else:
        eta, d = math.inf, 0
    h = entropy(pv)
    m = pv.m
    c_prime = (m - 1) * lam / (h * (1 - math.exp(-lam)))
    ordered = tuple(sorted(roots, key=lambda r: (abs(r[0]), r[0].imag)))
    return SpectralData(lam, n, h, c_prime, eta, d, ordered, dominant_value)


def q1(lam: float, x: float) -> float:
    """Q1(x) = Lambda / (1 - exp(-Lambda)) * exp(-Lambda * frac(x / Lambda))."""
    if lam <= 0:
        raise ValidationError("Lambda must be positive")
    t = x / lam
    frac = t - math.floor(t)
    # lattice points evaluated in floating point may land just below an integer
    if 1.0 - frac < 1e-9:
        frac = 0.0
    return lam / (1.0 - math.exp(-lam)) * math.exp(-lam * frac)


def predicted_mr_rational(sd: SpectralData, m: int, r) -> float:
    """Leading term (m - 1)/(r H) * Q1(log(1/r))."""
    if isinstance(r, Threshold):
        log_inverse = r.log_inverse
    else:
        if not 0 < r <= 1:
            raise ValidationError(f"r={r} outside (0, 1]")
        log_inverse = -math.log(float(r))
    return (m - 1) * math.exp(log_inverse) / sd.entropy * q1(sd.lam, log_inverse)


def predicted_kn_irrational(p, n: int, m: int = 2) -> float:
    """((m - 1)/H) * exp(sqrt(2 n log(1/p) log(1/q))) for the two-piece rule (p, 1 - p).

    Warns with ``NotApplicable`` when log p / log q is rational, where the
    formula does not describe the growth.
    """
    p_value = Fraction(p) if not isinstance(p, float) else p
    q_value = 1 - p_value
    if not 0 < p_value < 1:
        raise ValidationError("p must lie in (0, 1)")
    if detect_rational_relation([p_value, q_value]) is not None:
        warnings.warn("log p / log q is rational; irrational-case growth does not apply", NotApplicable)
    lp, lq = -math.log(float(p_value)), -math.log(float(q_value))
    h = float(p_value) * lp + float(q_value) * lq
    return (m - 1) / h * math.exp(math.sqrt(2.0 * n * lp * lq))


@dataclass(frozen=True)
class DirichletZero:
    box: int
    s: complex


def dirichlet_zeros(p, boxes: int) -> list[DirichletZero]:
    """One zero of 1 - p**(-s) - q**(-s) per box, for 1 <= |k| <= boxes.

    With l = log(1/min(p, q)) and l' = log(1/max(p, q)) the equation reads
    exp(s l) = 1 - exp(s l'), so taking the branch k of the logarithm,

        s = (Log(1 - exp(s l')) + 2 pi i k) / l,

    puts Im(s) in box k of height 2 tau, tau = pi / l.  A few iterations of
    that map seed a damped Newton iteration on the original equation; a grid
    of starts inside the box is the fallback.
    """
    if boxes > 200:
        raise ValidationError("at most 200 boxes")
    p = float(p)
    if not 0 < p < 1:
        raise ValidationError("p must lie in (0, 1)")
    big, small = sorted((-math.log(p), -math.log(1.0 - p)), reverse=True)
    tau = math.pi / big

    def f(s):
        return 1 - cmath.exp(s * big) - cmath.exp(s * small)

    def df(s):
        return -big * cmath.exp(s * big) - small * cmath.exp(s * small)

    def in_box(s, k):
        return (2 * k - 1) * tau <= s.imag < (2 * k + 1) * tau and s.real >= -1 - 1e-9

    def newton(s):
        try:
            value = f(s)
            for _ in range(200):
                if abs(value) < 1e-14:
                    break
                step = value / df(s)
                damping = 1.0
                while damping > 1e-6:
                    trial = s - damping * step
                    # zeros live in a bounded vertical strip; far excursions overflow exp
                    if abs(trial.real) <= 40 and abs(trial_value := f(trial)) < abs(value):
                        break
                    damping /= 2
                else:
                    break
                s, value = trial, trial_value
        except (OverflowError, ZeroDivisionError):
            return None
        return s if abs(value) < 1e-10 else None

    def branch_seed(k):
        s = complex(-0.5, 2 * k * tau)
        try:
            for _ in range(60):
                rest = 1 - cmath.exp(s * small)
                if rest == 0:
                    return None
                s = (cmath.log(rest) + 2j * math.pi * k) / big
        except OverflowError:
            return None
        return s

    found, failed = [], []
    for k in [j for j in range(-boxes, boxes + 1) if j != 0]:
        seed = branch_seed(k)
        starts = [] if seed is None else [seed]
        starts += [
            complex(re, 2 * k * tau + off * tau)
            for off in (0.0, -0.5, 0.5, -0.9, 0.9)
            for re in (-0.5, -1.0, 0.0, 0.5, 1.0)
        ]
        zero = None
        for start in starts:
            s = newton(start)
            if s is not None and in_box(s, k):
                zero = s
                break
        if zero is None:
            failed.append(k)
        else:
            found.append(DirichletZero(k, zero))
    if failed:
        raise NoConvergence(failed)
    return found


def zero_free_constant(zeros: Sequence[DirichletZero]) -> float:
    """Empirical min over zeros of (Re(s) + 1) * Im(s)**2."""
    return min((z.s.real + 1) * z.s.imag**2 for z in zeros)
