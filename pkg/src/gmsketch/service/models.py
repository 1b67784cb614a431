"""Pydantic request/response models for the HTTP service.

``SketchModel`` uses the same field layout as the on-disk sketch record,
so a line from a sketch file can be posted verbatim and a response body
can be written to a file unchanged.  Register values travel as IEEE-754
hex strings to keep the wire format bit-exact.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

from ..sketch import SKETCH_FORMAT, GumbelMaxSketch


class SketchModel(BaseModel):
    format: str = SKETCH_FORMAT
    k: int = Field(ge=1)
    fingerprint: str
    s: list[int]
    y: list[str]

    @classmethod
    def from_sketch(cls, sk: GumbelMaxSketch) -> "SketchModel":
        return cls(
            k=sk.k,
            fingerprint=f"{sk.fingerprint:#018x}",
            s=list(sk.s),
            y=[value.hex() for value in sk.y],
        )

    def to_sketch(self) -> GumbelMaxSketch:
        return GumbelMaxSketch(
            k=self.k,
            s=tuple(self.s),
            y=tuple(float.fromhex(value) for value in self.y),
            fingerprint=int(self.fingerprint, 16),
        )


class VectorSketchRequest(BaseModel):
    entries: dict[int, float]
    k: int = Field(ge=1)
    seed: int
    stream_salt: int | None = None
    delta: int | None = Field(default=None, ge=1)
    method: Literal["fast", "naive"] = "fast"


class StreamSketchRequest(BaseModel):
    items: list[tuple[int, float]]
    k: int = Field(ge=1)
    seed: int
    stream_salt: int | None = None
    skip_duplicates: bool = True


class MergeRequest(BaseModel):
    sketches: list[SketchModel] = Field(min_length=1)


class SketchPairRequest(BaseModel):
    a: SketchModel
    b: SketchModel


class CardinalityRequest(BaseModel):
    sketch: SketchModel


class SimilarityResponse(BaseModel):
    jaccard_p: float
    k: int
    matches: int


class CardinalityResponse(BaseModel):
    weighted_cardinality: float
    k: int


class SetAlgebraResponse(BaseModel):
    union_w: float
    intersection_w: float
    a_minus_b_w: float
    jaccard_w: float


class SpeedBenchRequest(BaseModel):
    n: int = Field(default=1000, ge=1)
    dist: str = "uniform01"
    vectors: int = Field(default=1, ge=1)
    workload: list[dict[int, float]] | None = None
    k_list: list[int] = Field(min_length=1)
    methods: list[Literal["naive", "fast", "stream"]] = ["naive", "fast"]
    seed: int = 1
    delta: int | None = None
    reps: int = Field(default=5, ge=1)
    warmup: int = Field(default=1, ge=0)


class RmseBenchRequest(BaseModel):
    task: Literal["jaccard", "cardinality"]
    n: int = Field(default=100, ge=1)
    dist: str = "uniform01"
    workload: list[dict[int, float]] | None = None
    k_list: list[int] = Field(min_length=1)
    trials: int = Field(default=1000, ge=2)
    seed: int = 1
    workers: int = Field(default=1, ge=1)


class ReportResponse(BaseModel):
    kind: str
    config: dict
    summary: dict
    rows: list[dict]


class BraidSimRequest(BaseModel):
    d: int = Field(default=30, ge=2)
    p1: float = Field(default=0.9, ge=0.0, le=1.0)
    p2: float = Field(default=0.1, ge=0.0, le=1.0)
    n: int = Field(default=10000, ge=1)
    k: int = Field(default=200, ge=2)
    weight_dist: str = "beta(5,5)"
    seed: int = 1
    runs: int = Field(default=1, ge=1)


class BraidSimResponse(BaseModel):
    config: dict
    rows: list[dict]


class HealthResponse(BaseModel):
    status: str
    version: str
