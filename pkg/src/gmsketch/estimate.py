"""Estimators and sketch algebra.

Downstream consumers of sketches: the register-match similarity
estimator, the weighted-cardinality estimator, elementwise-min merging,
and inclusion-exclusion set algebra built on top of those.  Exact
(non-sketch) similarity computations live here too; they serve as ground
truth in experiments and tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import fsum
from typing import Iterable, Sequence

from .errors import InvalidParameterError, MismatchedSketchError
from .sketch import GumbelMaxSketch, WeightedVector, check_compatible


@dataclass(frozen=True)
class SimilarityEstimate:
    """Register-match fraction; a multiple of 1/k in [0, 1]."""

    value: float
    k: int
    matches: int


@dataclass(frozen=True)
class CardinalityEstimate:
    """Weighted-cardinality estimate (k-1)/sum(y)."""

    value: float
    k: int


@dataclass(frozen=True)
class SetAlgebraEstimate:
    """Inclusion-exclusion estimates for two sketched sets."""

    union_w: float
    intersection_w: float
    a_minus_b_w: float
    jaccard_w: float


def estimate_jaccard_p(a: GumbelMaxSketch, b: GumbelMaxSketch) -> SimilarityEstimate:
    """Fraction of registers whose winning element agrees.

    Unbiased for the probability Jaccard similarity of the underlying
    vectors, with variance J(1-J)/k.
    """
    check_compatible(a, b)
    matches = sum(1 for x, z in zip(a.s, b.s) if x == z)
    return SimilarityEstimate(matches / a.k, a.k, matches)


def exact_jaccard_p(u: WeightedVector, v: WeightedVector) -> float:
    """Probability Jaccard similarity, evaluated exactly.

    Sum over shared-support elements i of
    1 / sum_l max(u_l / u_i, v_l / v_i), treating absent entries as 0.
    Scale-invariant; 0 for disjoint supports; 1 when u == v up to scale.
    """
    union = set(u) | set(v)
    total = 0.0
    for i in u:
        vi = v.get(i)
        if vi == 0.0:
            continue
        ui = u[i]
        denom = fsum(
            max(u.get(l) / ui, v.get(l) / vi)
            for l in union
        )
        total += 1.0 / denom
    return total


def exact_jaccard_w(u: WeightedVector, v: WeightedVector) -> float:
    """Weighted Jaccard similarity: sum of minima over sum of maxima."""
    union = set(u) | set(v)
    num = fsum(min(u.get(l), v.get(l)) for l in union)
    den = fsum(max(u.get(l), v.get(l)) for l in union)
    if den == 0.0:
        return 0.0
    return num / den


def estimate_cardinality(sk: GumbelMaxSketch) -> CardinalityEstimate:
    """Weighted cardinality from register values: (k-1)/sum(y).

    Each register value is EXP(c) for c the total weight, so the sum is
    Gamma(k, c) and the estimator is unbiased.  Requires k >= 2.
    """
    if sk.k < 2:
        raise InvalidParameterError(
            f"cardinality estimation needs k >= 2, got k={sk.k}"
        )
    return CardinalityEstimate((sk.k - 1) / fsum(sk.y), sk.k)


def merge(sketches: Sequence[GumbelMaxSketch]) -> GumbelMaxSketch:
    """Combine sketches by per-register minimum.

    The result equals the sketch of the union of the underlying weighted
    sets, bit-for-bit, whenever shared elements carry equal weights.
    Commutative, associative, and idempotent.
    """
    if not sketches:
        raise MismatchedSketchError("cannot merge an empty list of sketches")
    first = sketches[0]
    for other in sketches[1:]:
        check_compatible(first, other)
    y = list(first.y)
    s = list(first.s)
    for other in sketches[1:]:
        oy = other.y
        os_ = other.s
        for j in range(first.k):
            t = oy[j]
            if t < y[j]:
                y[j] = t
                s[j] = os_[j]
    return GumbelMaxSketch(first.k, tuple(s), tuple(y), first.fingerprint)


def estimate_difference(
    a: GumbelMaxSketch, subtrahends: Iterable[GumbelMaxSketch]
) -> float:
    """Weighted cardinality of ``a`` minus the union of ``subtrahends``.

    Inclusion-exclusion: c(a | union) - c(union), floored at 0.  Accepts
    any number of subtrahend sketches (the union on the right is r-ary).
    """
    subs = list(subtrahends)
    if not subs:
        return estimate_cardinality(a).value
    union_without = estimate_cardinality(merge(subs)).value
    union_with = estimate_cardinality(merge([a, *subs])).value
    return max(0.0, union_with - union_without)


def estimate_set_algebra(
    ska: GumbelMaxSketch, skb: GumbelMaxSketch
) -> SetAlgebraEstimate:
    """Union / intersection / difference / weighted-Jaccard estimates.

    Composed from cardinality estimates by inclusion-exclusion, with
    negative intersections floored at 0 and the Jaccard ratio clamped to
    [0, 1]; the raw components are individually unbiased but the floored
    compositions are not, which the documented tolerances absorb.
    """
    check_compatible(ska, skb)
    c_union = estimate_cardinality(merge([ska, skb])).value
    c_a = estimate_cardinality(ska).value
    c_b = estimate_cardinality(skb).value
    intersection = max(0.0, c_a + c_b - c_union)
    a_minus_b = max(0.0, c_union - c_b)
    jaccard = 0.0 if c_union <= 0.0 else min(1.0, intersection / c_union)
    return SetAlgebraEstimate(c_union, intersection, a_minus_b, jaccard)
