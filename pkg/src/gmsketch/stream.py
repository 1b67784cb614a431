"""One-pass streaming sketch construction.

Items arrive as (element, weight) pairs in any order, possibly with
duplicates.  Each item's queue is walked in ascending arrival order;
until every register has been set the full queue is processed, and once
all registers are set processing of an item stops at the first arrival
exceeding the current maximum register.  Randomness is keyed by element
id and step, never by arrival position, so any permutation of the
distinct items produces the identical sketch, bit-for-bit equal to the
batch generators run on the equivalent vector.
"""

from __future__ import annotations

import math
from typing import Iterable, TextIO

from .errors import (
    IncompleteSketchError,
    InconsistentWeightError,
    InvalidParameterError,
    InvalidWeightError,
)
from .randgen import MIN_WEIGHT, LazyPermutation, SeedScheme, _run_queue
from .sketch import GumbelMaxSketch

StreamItem = tuple[int, float]


class StreamSketchState:
    """Mutable per-stream sketch under construction.

    Single-writer: one state per stream.  ``skip_duplicates`` short-
    circuits items whose element id was already processed; reprocessing
    them is a no-op on the registers either way (identical draws), so the
    skip only saves work.  An element reappearing with a *different*
    weight is an error in both modes.
    """

    def __init__(self, k: int, scheme: SeedScheme, skip_duplicates: bool = True):
        if k < 1:
            raise InvalidParameterError(f"k must be >= 1, got {k}")
        self.k = k
        self.scheme = scheme
        self.skip_duplicates = skip_duplicates
        self.unset_count = k
        self.jstar = 0
        self.prune_enabled = False
        self.weights: dict[int, float] = {}
        self.emitted = 0
        self.last_item_emitted = 0
        self._y: list[float | None] = [None] * k
        self._s = [0] * k
        self._one_t = [0.0]
        self._one_s = [0]


def stream_update(state: StreamSketchState, item: StreamItem) -> StreamSketchState:
    """Fold one (element, weight) item into the sketch; returns the state."""
    element, weight = item
    element = int(element)
    weight = float(weight)
    if not math.isfinite(weight) or weight <= 0.0 or weight < MIN_WEIGHT:
        raise InvalidWeightError(
            f"element {element}: weight must be positive and finite, got {weight}"
        )
    known = state.weights.get(element)
    if known is not None:
        if known != weight:
            raise InconsistentWeightError(
                f"element {element} reappeared with weight {weight}, "
                f"previously {known}"
            )
        if state.skip_duplicates:
            state.last_item_emitted = 0
            return state
    else:
        state.weights[element] = weight

    k = state.k
    scheme = state.scheme
    useed = scheme.global_seed
    pseed = scheme.perm_seed
    y = state._y
    s = state._s
    one_t = state._one_t
    one_s = state._one_s
    perm = LazyPermutation()
    b = 0.0
    z = 0
    item_emitted = 0
    jstar = state.jstar
    while z < k:
        b = _run_queue(useed, pseed, element, weight, k, z, z + 1, b, perm, one_t, one_s)
        z += 1
        item_emitted += 1
        t = one_t[0]
        c = one_s[0] - 1
        if not state.prune_enabled:
            cur = y[c]
            if cur is None:
                y[c] = t
                s[c] = element
                state.unset_count -= 1
                if state.unset_count == 0:
                    state.prune_enabled = True
                    jstar = max(range(k), key=y.__getitem__)
            elif t < cur:
                y[c] = t
                s[c] = element
        if state.prune_enabled:
            if t > y[jstar]:
                break
            if t < y[c]:
                y[c] = t
                s[c] = element
                if c == jstar:
                    jstar = max(range(k), key=y.__getitem__)
    state.jstar = jstar
    state.emitted += item_emitted
    state.last_item_emitted = item_emitted
    return state


def stream_finalize(state: StreamSketchState) -> GumbelMaxSketch:
    """Freeze the state into an immutable sketch.

    Raises if any register is still unset, which can only happen for a
    stream whose items never covered all k servers (an empty stream, in
    practice: any single item covers every server).
    """
    if state.unset_count > 0:
        unset = [j for j, value in enumerate(state._y) if value is None]
        raise IncompleteSketchError(unset)
    return GumbelMaxSketch(
        state.k,
        tuple(state._s),
        tuple(state._y),
        state.scheme.fingerprint,
    )


def sketch_stream(
    items: Iterable[StreamItem],
    k: int,
    scheme: SeedScheme,
    skip_duplicates: bool = True,
) -> GumbelMaxSketch:
    """Build a sketch from an item iterable in one pass."""
    state = StreamSketchState(k, scheme, skip_duplicates=skip_duplicates)
    for item in items:
        stream_update(state, item)
    return stream_finalize(state)


def parse_stream_items(lines: Iterable[str] | TextIO) -> Iterable[StreamItem]:
    """Parse the line format ``element_id weight`` (whitespace-separated).

    Blank lines and lines starting with ``#`` are skipped.
    """
    for number, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InvalidParameterError(
                f"line {number}: expected 'element_id weight', got {line!r}"
            )
        try:
            element = int(parts[0])
            weight = float(parts[1])
        except ValueError as exc:
            raise InvalidParameterError(f"line {number}: {exc}") from exc
        yield element, weight
