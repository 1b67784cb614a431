"""Tests for vectors, registers, and the two batch generators."""

import math
import random

import pytest

from gmsketch.errors import (
    EmptyVectorError,
    InvalidParameterError,
    InvalidWeightError,
    MismatchedSketchError,
    MissingElementError,
)
from gmsketch.randgen import (
    ElementQueueState,
    SeedScheme,
    next_order_statistic,
    rand_int_between,
    uniform_open,
)
from gmsketch.sketch import (
    GenerationParams,
    GumbelMaxSketch,
    WeightedVector,
    compute_ri,
    sketch_fast,
    sketch_fast_counted,
    sketch_from_json,
    sketch_naive,
    sketch_naive_counted,
    sketch_to_json,
)

SCHEME = SeedScheme(20240601)

# Worked sizing example: 8 weights, k = 8, R = ceil(8 ln 8) = 17.
EXAMPLE_WEIGHTS = (0.3, 0.1, 0.05, 0.05, 0.2, 0.07, 0.1, 0.03)
EXAMPLE_VECTOR = WeightedVector({i + 1: w for i, w in enumerate(EXAMPLE_WEIGHTS)})


def random_vector(rng, n, max_index=10**6):
    entries = {}
    while len(entries) < n:
        entries[rng.randrange(1, max_index)] = rng.random() + 1e-9
    return WeightedVector(entries)


class TestWeightedVector:
    def test_rejects_bad_weights(self):
        for bad in (0.0, -1.0, float("nan"), float("inf"), 1e-310):
            with pytest.raises(InvalidWeightError):
                WeightedVector({1: bad})

    def test_rejects_bad_indices(self):
        with pytest.raises(InvalidWeightError):
            WeightedVector({0: 1.0})

    def test_sums_and_counts(self):
        v = WeightedVector({3: 0.5, 1: 0.25, 7: 0.25})
        assert v.n_plus == 3
        assert v.weight_sum == pytest.approx(1.0, rel=1e-12)
        assert v.items() == ((1, 0.25), (3, 0.5), (7, 0.25))
        assert v[3] == 0.5
        assert v.get(99) == 0.0
        with pytest.raises(MissingElementError):
            v[99]

    def test_equality_ignores_insertion_order(self):
        a = WeightedVector({1: 0.5, 2: 1.5})
        b = WeightedVector({2: 1.5, 1: 0.5})
        assert a == b

    def test_scaled(self):
        v = WeightedVector({1: 0.5, 2: 1.5}).scaled(2.0)
        assert v[1] == 1.0 and v[2] == 3.0
        with pytest.raises(InvalidWeightError):
            v.scaled(0.0)


class TestComputeRi:
    def test_worked_sizing_example(self):
        """R = 17 splits as (6, 2, 1, 1, 4, 2, 2, 1) over the 8 weights."""
        allocations = [compute_ri(17, EXAMPLE_VECTOR, e) for e in range(1, 9)]
        assert allocations == [6, 2, 1, 1, 4, 2, 2, 1]
        assert sum(allocations) == 19

    def test_zero_budget(self):
        assert compute_ri(0, EXAMPLE_VECTOR, 1) == 0

    def test_missing_element(self):
        with pytest.raises(MissingElementError):
            compute_ri(17, EXAMPLE_VECTOR, 99)

    def test_negative_budget(self):
        with pytest.raises(InvalidParameterError):
            compute_ri(-1, EXAMPLE_VECTOR, 1)


class TestGenerationParams:
    def test_delta_defaults_to_k(self):
        params = GenerationParams(k=32, scheme=SCHEME)
        assert params.delta == 32

    def test_validation(self):
        with pytest.raises(InvalidParameterError):
            GenerationParams(k=0, scheme=SCHEME)
        with pytest.raises(InvalidParameterError):
            GenerationParams(k=4, scheme=SCHEME, delta=0)


class TestNaiveGenerator:
    def test_single_element_owns_every_register(self):
        v = WeightedVector({5: 1.0})
        sk = sketch_naive(v, GenerationParams(k=3, scheme=SCHEME))
        assert sk.s == (5, 5, 5)
        # registers are that element's three order statistics scattered by
        # its server permutation
        state = ElementQueueState(element_id=5, weight=1.0, k=3)
        expected = {}
        for _ in range(3):
            t, c = next_order_statistic(state, SCHEME)
            expected[c - 1] = t
        assert sk.y == tuple(expected[j] for j in range(3))

    def test_scale_equivariance(self):
        """Scaling the vector leaves s unchanged and divides y by the factor."""
        params = GenerationParams(k=16, scheme=SCHEME)
        base = sketch_naive(EXAMPLE_VECTOR, params)
        scaled = sketch_naive(EXAMPLE_VECTOR.scaled(7.0), params)
        assert scaled.s == base.s
        for a, b in zip(scaled.y, base.y):
            assert a == pytest.approx(b / 7.0, rel=1e-9)

    def test_matrix_oracle(self):
        """Columnwise min/argmin of the fully materialized arrival matrix.

        The oracle expands each row's ascending arrivals directly from the
        spacing formula and replays the server assignment with its own
        Fisher-Yates loop, then reduces columns independently of the
        generator's incremental path.
        """
        k = 4
        v = WeightedVector({2: 0.4, 5: 1.3, 9: 0.05})
        matrix = {}
        for element, weight in v.items():
            perm = list(range(1, k + 1))
            prefix = 0.0
            for z in range(1, k + 1):
                prefix += -math.log(uniform_open(SCHEME, element, z)) / (k - z + 1)
                j = rand_int_between(SCHEME, element, z, z, k)
                perm[z - 1], perm[j - 1] = perm[j - 1], perm[z - 1]
                matrix[element, perm[z - 1]] = prefix / weight
        expected_y = []
        expected_s = []
        for server in range(1, k + 1):
            winner = min((e for e in v), key=lambda e: matrix[e, server])
            expected_s.append(winner)
            expected_y.append(matrix[winner, server])

        sk = sketch_naive(v, GenerationParams(k=k, scheme=SCHEME))
        assert sk.s == tuple(expected_s)
        for got, want in zip(sk.y, expected_y):
            assert got == pytest.approx(want, rel=1e-12)

    def test_errors(self):
        with pytest.raises(EmptyVectorError):
            sketch_naive(WeightedVector({}), GenerationParams(k=4, scheme=SCHEME))

    def test_emitted_count(self):
        _, emitted = sketch_naive_counted(EXAMPLE_VECTOR, GenerationParams(k=8, scheme=SCHEME))
        assert emitted == 8 * 8


class TestFastGenerator:
    def test_equals_naive_on_example(self):
        params = GenerationParams(k=8, scheme=SCHEME)
        assert sketch_fast(EXAMPLE_VECTOR, params) == sketch_naive(EXAMPLE_VECTOR, params)

    def test_equals_naive_random_sweep(self):
        rng = random.Random(99)
        for _ in range(25):
            n = rng.choice([1, 2, 7, 40, 300])
            k = rng.choice([1, 3, 16, 96])
            v = random_vector(rng, n)
            scheme = SeedScheme(rng.getrandbits(64))
            params = GenerationParams(k=k, scheme=scheme)
            assert sketch_fast(v, params) == sketch_naive(v, params)

    def test_delta_does_not_change_output(self):
        for delta in (1, 3, 8, 64):
            params = GenerationParams(k=16, scheme=SCHEME, delta=delta)
            reference = GenerationParams(k=16, scheme=SCHEME)
            assert sketch_fast(EXAMPLE_VECTOR, params) == sketch_fast(
                EXAMPLE_VECTOR, reference
            )

    def test_emits_less_than_naive_at_scale(self):
        rng = random.Random(5)
        v = random_vector(rng, 400)
        params = GenerationParams(k=128, scheme=SCHEME)
        _, fast_emitted = sketch_fast_counted(v, params)
        _, naive_emitted = sketch_naive_counted(v, params)
        assert fast_emitted < naive_emitted / 5

    def test_register_mean_tracks_total_weight(self):
        """Register values average 1/weight_sum (EXP(c) law), 5 SE band."""
        k = 8
        total = 0.0
        trials = 600
        for seed in range(trials):
            sk = sketch_fast(EXAMPLE_VECTOR, GenerationParams(k=k, scheme=SeedScheme(seed)))
            total += sum(sk.y)
        mean = total / (k * trials)
        expected = 1.0 / EXAMPLE_VECTOR.weight_sum
        se = expected / math.sqrt(k * trials)
        assert abs(mean - expected) < 5 * se


class TestSerialization:
    def test_round_trip_bit_exact(self):
        sk = sketch_fast(EXAMPLE_VECTOR, GenerationParams(k=8, scheme=SCHEME))
        again = sketch_from_json(sketch_to_json(sk))
        assert again == sk
        assert again.y == sk.y

    def test_rejects_other_payloads(self):
        with pytest.raises(MismatchedSketchError):
            sketch_from_json("not json")
        with pytest.raises(MismatchedSketchError):
            sketch_from_json('{"format": "something/9", "k": 1}')

    def test_register_length_validated(self):
        with pytest.raises(InvalidParameterError):
            GumbelMaxSketch(k=3, s=(1, 2), y=(0.1, 0.2), fingerprint=0)
