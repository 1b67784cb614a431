"""Core sketch types and the two batch generators.

A Gumbel-Max sketch of a weighted vector is a pair of length-k register
arrays: ``s[j]`` holds the element index winning register j and ``y[j]``
holds the winning value, the minimum over elements i of that element's
exponential arrival assigned to server j.  Each y[j] is EXP(sum of
weights) distributed and each s[j] equals element i with probability
proportional to its weight.

Two generators are provided.  ``sketch_naive`` runs every element queue
to exhaustion (k emissions per positive element) and takes per-server
minima; it is the exactness oracle.  ``sketch_fast`` produces the
identical sketch while emitting far fewer order statistics: a search
phase releases customers in batches proportional to normalized weights
until every register is set, then a prune phase walks each remaining
queue in ascending order and closes it as soon as its next arrival
exceeds the current maximum register, which no later arrival from that
queue can beat.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterator, Mapping

from .errors import (
    EmptyVectorError,
    InvalidParameterError,
    InvalidWeightError,
    MismatchedSketchError,
    MissingElementError,
)
from .randgen import MIN_WEIGHT, LazyPermutation, SeedScheme, _run_queue

SKETCH_FORMAT = "gmsketch/1"


class WeightedVector:
    """Sparse map of element index (>= 1) to strictly positive weight.

    Zero or negative weights are rejected rather than stored; the element
    iteration order is always ascending index so that generation is
    deterministic regardless of how the mapping was built.
    """

    __slots__ = ("_items", "_index", "_weight_sum")

    def __init__(self, entries: Mapping[int, float]):
        items = []
        for element, weight in entries.items():
            element = int(element)
            if element < 1:
                raise InvalidWeightError(f"element indices must be >= 1, got {element}")
            weight = float(weight)
            if not math.isfinite(weight) or weight <= 0.0:
                raise InvalidWeightError(
                    f"element {element}: weight must be positive and finite, got {weight}"
                )
            if weight < MIN_WEIGHT:
                raise InvalidWeightError(
                    f"element {element}: weight {weight} below minimum {MIN_WEIGHT}"
                )
            items.append((element, weight))
        items.sort()
        self._items = tuple(items)
        self._index = dict(items)
        self._weight_sum = math.fsum(w for _, w in items)

    @property
    def n_plus(self) -> int:
        return len(self._items)

    @property
    def weight_sum(self) -> float:
        return self._weight_sum

    def items(self) -> tuple[tuple[int, float], ...]:
        """Entries as (element, weight) pairs in ascending element order."""
        return self._items

    def get(self, element: int, default: float = 0.0) -> float:
        return self._index.get(element, default)

    def __getitem__(self, element: int) -> float:
        try:
            return self._index[element]
        except KeyError:
            raise MissingElementError(f"element {element} not in vector") from None

    def __contains__(self, element: int) -> bool:
        return element in self._index

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self) -> Iterator[int]:
        return iter(self._index)

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightedVector):
            return NotImplemented
        return self._items == other._items

    def __repr__(self) -> str:
        return f"WeightedVector(n_plus={self.n_plus}, weight_sum={self._weight_sum!r})"

    def as_dict(self) -> dict[int, float]:
        return dict(self._items)

    def scaled(self, factor: float) -> "WeightedVector":
        if not (factor > 0.0) or not math.isfinite(factor):
            raise InvalidWeightError(f"scale factor must be positive, got {factor}")
        return WeightedVector({e: w * factor for e, w in self._items})


@dataclass(frozen=True)
class GumbelMaxSketch:
    """Immutable length-k sketch: winning element per register plus value.

    The classical Gumbel-Max variable for register j is recoverable as
    ``-log(y[j])``; it is not stored.
    """

    k: int
    s: tuple[int, ...]
    y: tuple[float, ...]
    fingerprint: int

    def __post_init__(self):
        if len(self.s) != self.k or len(self.y) != self.k:
            raise InvalidParameterError(
                f"register arrays must have length k={self.k}, "
                f"got {len(self.s)} and {len(self.y)}"
            )


@dataclass(frozen=True)
class GenerationParams:
    """Sketch-generation knobs: register count k, batch increment delta.

    ``delta`` is the amount the release budget R grows by per search
    round; it defaults to k, which works well across workloads.
    """

    k: int
    scheme: SeedScheme
    delta: int | None = None

    def __post_init__(self):
        if self.k < 1:
            raise InvalidParameterError(f"k must be >= 1, got {self.k}")
        if self.delta is None:
            object.__setattr__(self, "delta", self.k)
        elif self.delta < 1:
            raise InvalidParameterError(f"delta must be >= 1, got {self.delta}")


def compute_ri(R: int, v: WeightedVector, element: int) -> int:
    """Customers queue `element` may release under a total budget of R.

    Equals ceil(R * weight / weight_sum); callers cap it at k since a
    queue only holds k customers.
    """
    if R < 0:
        raise InvalidParameterError(f"R must be >= 0, got {R}")
    weight = v[element]
    return math.ceil(R * weight / v.weight_sum)


def _check_input(v: WeightedVector, params: GenerationParams) -> None:
    if v.n_plus == 0:
        raise EmptyVectorError("cannot sketch a vector with no positive entries")


def sketch_naive(v: WeightedVector, params: GenerationParams) -> GumbelMaxSketch:
    """Exhaustive generator: k emissions per element, per-server minima."""
    sk, _ = sketch_naive_counted(v, params)
    return sk


def sketch_naive_counted(
    v: WeightedVector, params: GenerationParams
) -> tuple[GumbelMaxSketch, int]:
    """Exhaustive generator returning (sketch, emitted order statistics)."""
    _check_input(v, params)
    k = params.k
    scheme = params.scheme
    useed = scheme.global_seed
    pseed = scheme.perm_seed
    y: list[float | None] = [None] * k
    s = [0] * k
    times = [0.0] * k
    servers = [0] * k
    for element, weight in v.items():
        perm = list(range(1, k + 1))
        _run_queue(useed, pseed, element, weight, k, 0, k, 0.0, perm, times, servers)
        for idx in range(k):
            t = times[idx]
            c = servers[idx] - 1
            cur = y[c]
            if cur is None or t < cur:
                y[c] = t
                s[c] = element
    return (
        GumbelMaxSketch(k, tuple(s), tuple(y), scheme.fingerprint),
        v.n_plus * k,
    )


def sketch_fast(v: WeightedVector, params: GenerationParams) -> GumbelMaxSketch:
    """Pruned generator; bit-identical to ``sketch_naive`` on every input."""
    sk, _ = sketch_fast_counted(v, params)
    return sk


def sketch_fast_counted(
    v: WeightedVector, params: GenerationParams
) -> tuple[GumbelMaxSketch, int]:
    """Pruned generator returning (sketch, emitted order statistics)."""
    _check_input(v, params)
    k = params.k
    delta = params.delta
    scheme = params.scheme
    useed = scheme.global_seed
    pseed = scheme.perm_seed
    weight_sum = v.weight_sum
    items = v.items()
    n = len(items)
    ceil = math.ceil

    zs = [0] * n
    bs = [0.0] * n
    perms: list[LazyPermutation | None] = [None] * n
    y: list[float | None] = [None] * k
    s = [0] * k
    times = [0.0] * k
    servers = [0] * k
    emitted = 0
    unset = k
    R = 0

    # Search phase: release customers in weight-proportional batches until
    # every register has seen at least one arrival.
    while unset:
        R += delta
        for idx in range(n):
            element, weight = items[idx]
            target = ceil(R * weight / weight_sum)
            if target > k:
                target = k
            z = zs[idx]
            if z >= target:
                continue
            perm = perms[idx]
            if perm is None:
                perm = perms[idx] = LazyPermutation()
            bs[idx] = _run_queue(
                useed, pseed, element, weight, k, z, target, bs[idx], perm, times, servers
            )
            span = target - z
            emitted += span
            for t_idx in range(span):
                t = times[t_idx]
                c = servers[t_idx] - 1
                cur = y[c]
                if cur is None:
                    y[c] = t
                    s[c] = element
                    unset -= 1
                elif t < cur:
                    y[c] = t
                    s[c] = element
            zs[idx] = target

    # Prune phase: walk each remaining queue in ascending order and close
    # it at the first arrival exceeding the maximum register, which every
    # later arrival from that queue would also exceed.
    jstar = max(range(k), key=y.__getitem__)
    one_t = [0.0]
    one_s = [0]
    for idx in range(n):
        z = zs[idx]
        if z >= k:
            continue
        element, weight = items[idx]
        b = bs[idx]
        perm = perms[idx]
        while z < k:
            b = _run_queue(
                useed, pseed, element, weight, k, z, z + 1, b, perm, one_t, one_s
            )
            z += 1
            emitted += 1
            t = one_t[0]
            if t > y[jstar]:
                break
            c = one_s[0] - 1
            if t < y[c]:
                y[c] = t
                s[c] = element
                if c == jstar:
                    jstar = max(range(k), key=y.__getitem__)
        zs[idx] = z
        bs[idx] = b

    return (
        GumbelMaxSketch(k, tuple(s), tuple(y), scheme.fingerprint),
        emitted,
    )


def check_compatible(a: GumbelMaxSketch, b: GumbelMaxSketch) -> None:
    """Raise unless two sketches share k and seed-scheme fingerprint."""
    if a.k != b.k:
        raise MismatchedSketchError(f"register counts differ: {a.k} != {b.k}")
    if a.fingerprint != b.fingerprint:
        raise MismatchedSketchError(
            f"seed-scheme fingerprints differ: "
            f"{a.fingerprint:#018x} != {b.fingerprint:#018x}"
        )


def sketch_to_json(sk: GumbelMaxSketch) -> str:
    """Serialize to the versioned record format.

    Register values are written as IEEE-754 hex strings so that sketches
    round-trip through files bit-exactly; merges of file-loaded sketches
    equal merges of in-memory ones.
    """
    record = {
        "format": SKETCH_FORMAT,
        "k": sk.k,
        "fingerprint": f"{sk.fingerprint:#018x}",
        "s": list(sk.s),
        "y": [value.hex() for value in sk.y],
    }
    return json.dumps(record, separators=(",", ":"))


def sketch_from_json(text: str) -> GumbelMaxSketch:
    """Parse a record produced by :func:`sketch_to_json`."""
    try:
        record = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MismatchedSketchError(f"not a sketch record: {exc}") from exc
    if not isinstance(record, dict) or record.get("format") != SKETCH_FORMAT:
        raise MismatchedSketchError(
            f"unsupported sketch format {record.get('format')!r}; "
            f"expected {SKETCH_FORMAT!r}"
        )
    k = int(record["k"])
    s = tuple(int(e) for e in record["s"])
    y = tuple(float.fromhex(value) for value in record["y"])
    fingerprint = int(record["fingerprint"], 16)
    return GumbelMaxSketch(k, s, y, fingerprint)
