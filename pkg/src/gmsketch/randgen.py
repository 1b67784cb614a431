"""Seeded randomness for sketch generation.

Every random quantity the library consumes is a pure function of a
:class:`SeedScheme` plus an (element, step) pair, never of program state.
Two independent draw streams exist:

* the *uniform* stream, keyed by ``(global_seed, element, step)``, which
  feeds the exponential spacings, and
* the *permutation* stream, keyed by ``(global_seed XOR stream_salt,
  element, step)``, which feeds the incremental Fisher-Yates shuffle.

Keeping the permutation stream independent of weights (and of the uniform
stream) is what makes register positions consistent across vectors that
share an element, which the matching-register similarity estimator relies
on.

Canonical mixing construction
-----------------------------

A draw key is ``(seed + element * K_ELEM + step * K_STEP) mod 2**64``
pushed through the splitmix64 finalizer (two multiply-xor-shift rounds,
full avalanche).  The resulting 64-bit word becomes a uniform in the open
interval (0, 1) by taking the high 53 bits as an integer and computing
``bits * 2**-53 + 2**-54``, so outputs can never be exactly 0 or 1.
Bounded integers are drawn from the permutation stream by rejection
sampling, which avoids modulo bias; rejected words rehash the key offset
by ``attempt * K_RETRY``.

The construction is fixed: changing any constant changes every sketch.
Results are reproducible bit-for-bit across processes and platforms for a
given ``SeedScheme``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InvalidWeightError, QueueExhaustedError

MASK64 = (1 << 64) - 1
_RANGE64 = 1 << 64

# Key-schedule constants: golden-ratio increment plus two odd constants
# borrowed from widely deployed avalanche hashes.
K_ELEM = 0x9E3779B97F4A7C15
K_STEP = 0xC2B2AE3D27D4EB4F
K_RETRY = 0xD6E8FEB86659FD93

# splitmix64 finalizer multipliers
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

# Fractional bits of sqrt(2); distinguishes the permutation stream.
DEFAULT_STREAM_SALT = 0x6A09E667F3BCC909

_INV_2_53 = 2.0**-53
_INV_2_54 = 2.0**-54

# Weights below this would overflow 1/v in the spacing denominators.
MIN_WEIGHT = 1e-300


def mix64(x: int) -> int:
    """splitmix64 finalizer: 64-bit full-avalanche permutation."""
    x &= MASK64
    x = ((x ^ (x >> 30)) * _M1) & MASK64
    x = ((x ^ (x >> 27)) * _M2) & MASK64
    return x ^ (x >> 31)


@dataclass(frozen=True)
class SeedScheme:
    """Immutable pair of seeds defining every draw the library makes.

    ``global_seed`` keys the uniform stream; ``global_seed XOR
    stream_salt`` keys the permutation stream.  Sketches built under
    different schemes are not comparable, so each scheme exposes a
    64-bit ``fingerprint`` that sketches carry for mismatch detection.
    """

    global_seed: int
    stream_salt: int = DEFAULT_STREAM_SALT

    def __post_init__(self):
        object.__setattr__(self, "global_seed", self.global_seed & MASK64)
        object.__setattr__(self, "stream_salt", self.stream_salt & MASK64)

    @property
    def perm_seed(self) -> int:
        return self.global_seed ^ self.stream_salt

    @property
    def fingerprint(self) -> int:
        return mix64(self.global_seed + mix64(self.stream_salt))


def derive_seed(master: int, index: int) -> int:
    """Child seed for trial/run ``index`` under a master seed.

    Used for seed hygiene in experiments: trial t gets an independent
    scheme without any two trials sharing draw keys.
    """
    return mix64((master + (index + 1) * K_ELEM) & MASK64)


def uniform_open(scheme: SeedScheme, element: int, step: int) -> float:
    """Deterministic uniform draw in the open interval (0, 1).

    ``step`` is 1-based; the value depends only on (scheme, element,
    step), never on weights or on other elements.
    """
    if step < 1:
        raise ValueError(f"step must be >= 1, got {step}")
    x = (scheme.global_seed + element * K_ELEM + step * K_STEP) & MASK64
    x = ((x ^ (x >> 30)) * _M1) & MASK64
    x = ((x ^ (x >> 27)) * _M2) & MASK64
    x ^= x >> 31
    return (x >> 11) * _INV_2_53 + _INV_2_54


def rand_int_between(scheme: SeedScheme, element: int, step: int, lo: int, hi: int) -> int:
    """Unbiased integer in [lo, hi] from the permutation stream.

    Rejection sampling on successive rehashes of the (element, step) key;
    the result is still a pure function of (scheme, element, step).
    """
    if step < 1:
        raise ValueError(f"step must be >= 1, got {step}")
    if hi < lo:
        raise ValueError(f"empty range [{lo}, {hi}]")
    m = hi - lo + 1
    limit = _RANGE64 - _RANGE64 % m
    base = (scheme.perm_seed + element * K_ELEM + step * K_STEP) & MASK64
    attempt = 0
    while True:
        x = (base + attempt * K_RETRY) & MASK64
        x = ((x ^ (x >> 30)) * _M1) & MASK64
        x = ((x ^ (x >> 27)) * _M2) & MASK64
        x ^= x >> 31
        if x < limit:
            return lo + x % m
        attempt += 1


class LazyPermutation(dict):
    """Sparse in-progress Fisher-Yates permutation of 1..k.

    Behaves like a list initialized to (1, ..., k) at 0-based positions,
    but only stores touched slots, so a queue that emits z customers
    costs O(z) space instead of O(k).
    """

    def __missing__(self, index):
        return index + 1


def _run_queue(useed, pseed, element, weight, k, z0, z1, b, perm, out_times, out_servers):
    """Emit order statistics z0+1 .. z1 of an element queue.

    This is the single hot kernel behind every generator (exhaustive,
    pruned, and streaming), so their outputs agree bit-for-bit.  Each step
    z draws u from the uniform stream and advances the running order
    statistic by ``-log(u) / (weight * (k - z + 1))`` (ascending
    exponential spacings), then draws j in {z..k} from the permutation
    stream and swaps perm[z-1] <-> perm[j-1]; the emitted server is
    perm[z-1].  Times land in out_times[0:z1-z0] and servers in
    out_servers[0:z1-z0]; returns the updated running statistic.

    ``perm`` is the element's in-progress permutation (1-based values in a
    0-based list) and is mutated in place.  Callers guarantee
    0 <= z0 <= z1 <= k and weight > 0.
    """
    log = math.log
    ubase = (useed + element * K_ELEM) & MASK64
    pbase = (pseed + element * K_ELEM) & MASK64
    idx = 0
    z = z0
    while z < z1:
        z += 1
        x = (ubase + z * K_STEP) & MASK64
        x = ((x ^ (x >> 30)) * _M1) & MASK64
        x = ((x ^ (x >> 27)) * _M2) & MASK64
        x ^= x >> 31
        u = (x >> 11) * _INV_2_53 + _INV_2_54
        b += -log(u) / (weight * (k - z + 1))
        m = k - z + 1
        g = (pbase + z * K_STEP) & MASK64
        g = ((g ^ (g >> 30)) * _M1) & MASK64
        g = ((g ^ (g >> 27)) * _M2) & MASK64
        g ^= g >> 31
        limit = _RANGE64 - _RANGE64 % m
        attempt = 0
        while g >= limit:
            attempt += 1
            g = (pbase + z * K_STEP + attempt * K_RETRY) & MASK64
            g = ((g ^ (g >> 30)) * _M1) & MASK64
            g = ((g ^ (g >> 27)) * _M2) & MASK64
            g ^= g >> 31
        j = z + g % m
        zi = z - 1
        ji = j - 1
        perm[zi], perm[ji] = perm[ji], perm[zi]
        out_times[idx] = b
        out_servers[idx] = perm[zi]
        idx += 1
    return b


@dataclass
class ElementQueueState:
    """Generation cursor for one element's queue of k customers.

    Tracks how many order statistics were emitted (z), the last emitted
    value (b, nondecreasing), and the in-progress Fisher-Yates permutation
    assigning emissions to servers.
    """

    element_id: int
    weight: float
    k: int
    z: int = 0
    b: float = 0.0
    perm: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not (self.weight > 0.0) or not math.isfinite(self.weight):
            raise InvalidWeightError(
                f"element {self.element_id}: weight must be positive and finite, "
                f"got {self.weight}"
            )
        if self.weight < MIN_WEIGHT:
            raise InvalidWeightError(
                f"element {self.element_id}: weight {self.weight} below {MIN_WEIGHT}"
            )
        if not self.perm:
            self.perm = list(range(1, self.k + 1))

    @property
    def exhausted(self) -> bool:
        return self.z >= self.k


def next_order_statistic(state: ElementQueueState, scheme: SeedScheme) -> tuple[float, int]:
    """Advance a queue by one emission; return (arrival time, server).

    Times over a full k-call run are the sorted values of k independent
    EXP(weight) draws; servers form a uniform random permutation of 1..k
    that does not depend on the weight.
    """
    if state.z >= state.k:
        raise QueueExhaustedError(
            f"element {state.element_id}: all {state.k} order statistics emitted"
        )
    times = [0.0]
    servers = [0]
    state.b = _run_queue(
        scheme.global_seed,
        scheme.perm_seed,
        state.element_id,
        state.weight,
        state.k,
        state.z,
        state.z + 1,
        state.b,
        state.perm,
        times,
        servers,
    )
    state.z += 1
    return state.b, servers[0]
