"""Tests for the HTTP service surface."""

import pytest
from fastapi.testclient import TestClient

from gmsketch.estimate import estimate_cardinality, estimate_set_algebra, merge
from gmsketch.randgen import SeedScheme
from gmsketch.service import create_app
from gmsketch.service.models import SketchModel
from gmsketch.sketch import GenerationParams, WeightedVector, sketch_fast
from gmsketch.stream import sketch_stream


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def library_sketch(entries, k=8, seed=42):
    vector = WeightedVector(entries)
    params = GenerationParams(k=k, scheme=SeedScheme(seed))
    return sketch_fast(vector, params)


class TestHealth:
    def test_healthz(self, client):
        response = client.get("/healthz")
        assert response.status_code == 200
        body = response.json()
        assert body["status"] == "ok"
        assert body["version"]


class TestSketchEndpoints:
    def test_vector_sketch_matches_library(self, client):
        response = client.post(
            "/sketches/vector",
            json={"entries": {"1": 0.5, "2": 1.5}, "k": 8, "seed": 42},
        )
        assert response.status_code == 200
        wire = SketchModel(**response.json()).to_sketch()
        assert wire == library_sketch({1: 0.5, 2: 1.5})

    def test_naive_method_agrees(self, client):
        payload = {"entries": {"1": 0.5, "2": 1.5, "9": 0.25}, "k": 16, "seed": 7}
        fast = client.post("/sketches/vector", json=payload).json()
        naive = client.post(
            "/sketches/vector", json={**payload, "method": "naive"}
        ).json()
        assert fast == naive

    def test_stream_sketch_matches_library(self, client):
        response = client.post(
            "/sketches/stream",
            json={"items": [[1, 0.5], [2, 1.5], [1, 0.5]], "k": 8, "seed": 42},
        )
        assert response.status_code == 200
        wire = SketchModel(**response.json()).to_sketch()
        assert wire == sketch_stream([(1, 0.5), (2, 1.5)], 8, SeedScheme(42))

    def test_merge_endpoint(self, client):
        a = library_sketch({1: 0.5})
        b = library_sketch({2: 1.5})
        response = client.post(
            "/sketches/merge",
            json={
                "sketches": [
                    SketchModel.from_sketch(a).model_dump(),
                    SketchModel.from_sketch(b).model_dump(),
                ]
            },
        )
        assert response.status_code == 200
        assert SketchModel(**response.json()).to_sketch() == merge([a, b])

    def test_wire_format_is_bit_exact(self, client):
        sk = library_sketch({1: 0.5, 2: 1.5}, k=32)
        model = SketchModel.from_sketch(sk)
        assert model.to_sketch().y == sk.y

    def test_invalid_weight_is_400(self, client):
        response = client.post(
            "/sketches/vector", json={"entries": {"1": -1.0}, "k": 4, "seed": 1}
        )
        assert response.status_code == 400
        assert response.json()["error"] == "InvalidWeightError"

    def test_malformed_body_is_422(self, client):
        response = client.post("/sketches/vector", json={"k": 4})
        assert response.status_code == 422

    def test_mismatched_merge_is_400(self, client):
        a = SketchModel.from_sketch(library_sketch({1: 1.0}, k=4)).model_dump()
        b = SketchModel.from_sketch(library_sketch({1: 1.0}, k=8)).model_dump()
        response = client.post("/sketches/merge", json={"sketches": [a, b]})
        assert response.status_code == 400
        assert response.json()["error"] == "MismatchedSketchError"


class TestEstimateEndpoints:
    def test_jaccard(self, client):
        a = SketchModel.from_sketch(library_sketch({1: 1.0, 2: 2.0}, k=16))
        response = client.post(
            "/estimates/jaccard", json={"a": a.model_dump(), "b": a.model_dump()}
        )
        assert response.status_code == 200
        assert response.json() == {"jaccard_p": 1.0, "k": 16, "matches": 16}

    def test_cardinality(self, client):
        sk = library_sketch({1: 1.0, 2: 2.0}, k=16)
        response = client.post(
            "/estimates/cardinality",
            json={"sketch": SketchModel.from_sketch(sk).model_dump()},
        )
        assert response.status_code == 200
        assert response.json()["weighted_cardinality"] == pytest.approx(
            estimate_cardinality(sk).value
        )

    def test_set_algebra(self, client):
        a = library_sketch({1: 1.0, 2: 2.0}, k=16)
        b = library_sketch({2: 2.0, 3: 0.5}, k=16)
        response = client.post(
            "/estimates/set-algebra",
            json={
                "a": SketchModel.from_sketch(a).model_dump(),
                "b": SketchModel.from_sketch(b).model_dump(),
            },
        )
        assert response.status_code == 200
        expected = estimate_set_algebra(a, b)
        body = response.json()
        assert body["union_w"] == pytest.approx(expected.union_w)
        assert body["intersection_w"] == pytest.approx(expected.intersection_w)
        assert body["a_minus_b_w"] == pytest.approx(expected.a_minus_b_w)
        assert body["jaccard_w"] == pytest.approx(expected.jaccard_w)

    def test_cardinality_k1_is_400(self, client):
        sk = library_sketch({1: 1.0}, k=1)
        response = client.post(
            "/estimates/cardinality",
            json={"sketch": SketchModel.from_sketch(sk).model_dump()},
        )
        assert response.status_code == 400


class TestExperimentEndpoints:
    def test_speed(self, client):
        response = client.post(
            "/experiments/speed",
            json={"n": 30, "k_list": [4, 8], "seed": 3, "reps": 1, "warmup": 0},
        )
        assert response.status_code == 200
        body = response.json()
        assert body["kind"] == "speed"
        assert len(body["rows"]) == 4

    def test_rmse(self, client):
        response = client.post(
            "/experiments/rmse",
            json={"task": "cardinality", "n": 20, "k_list": [8], "trials": 10, "seed": 3},
        )
        assert response.status_code == 200
        body = response.json()
        assert body["kind"] == "rmse"
        assert len(body["rows"]) == 10

    def test_braid(self, client):
        response = client.post(
            "/simulations/braid",
            json={"d": 3, "n": 40, "k": 16, "seed": 9, "runs": 1},
        )
        assert response.status_code == 200
        body = response.json()
        assert len(body["rows"]) == 3
        assert body["rows"][0]["layer"] == 1
