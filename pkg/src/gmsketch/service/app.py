"""FastAPI application wrapping the sketch library.

All endpoints are deterministic functions of their request bodies; seeds
always arrive explicitly.  Library errors surface as HTTP 400 with the
error class name and message.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..bench import gen_synthetic, run_rmse_experiment, run_speed_experiment
from ..errors import GmSketchError, InvalidParameterError
from ..estimate import (
    estimate_cardinality,
    estimate_jaccard_p,
    estimate_set_algebra,
    merge,
)
from ..netsim import BraidNetConfig, simulate_rows
from ..randgen import DEFAULT_STREAM_SALT, SeedScheme, derive_seed
from ..sketch import GenerationParams, WeightedVector, sketch_fast, sketch_naive
from ..stream import sketch_stream
from .models import (
    BraidSimRequest,
    BraidSimResponse,
    CardinalityRequest,
    CardinalityResponse,
    HealthResponse,
    MergeRequest,
    ReportResponse,
    RmseBenchRequest,
    SetAlgebraResponse,
    SimilarityResponse,
    SketchModel,
    SketchPairRequest,
    SpeedBenchRequest,
    StreamSketchRequest,
    VectorSketchRequest,
)


def _scheme(seed: int, stream_salt: int | None) -> SeedScheme:
    if stream_salt is None:
        return SeedScheme(seed)
    return SeedScheme(seed, stream_salt)


def create_app() -> FastAPI:
    app = FastAPI(
        title="gmsketch",
        version=__version__,
        description=(
            "Gumbel-Max sketch service: build, stream, and merge sketches; "
            "estimate similarity, weighted cardinality, and set algebra; "
            "run timing/accuracy experiments and the braided-chain network "
            "simulation."
        ),
    )

    @app.exception_handler(GmSketchError)
    async def _library_error(request: Request, exc: GmSketchError):
        return JSONResponse(
            status_code=400,
            content={"detail": str(exc), "error": type(exc).__name__},
        )

    @app.get("/healthz", response_model=HealthResponse)
    def healthz():
        return HealthResponse(status="ok", version=__version__)

    @app.post("/sketches/vector", response_model=SketchModel)
    def sketch_vector(req: VectorSketchRequest):
        vector = WeightedVector(req.entries)
        params = GenerationParams(
            k=req.k, scheme=_scheme(req.seed, req.stream_salt), delta=req.delta
        )
        generate = sketch_naive if req.method == "naive" else sketch_fast
        return SketchModel.from_sketch(generate(vector, params))

    @app.post("/sketches/stream", response_model=SketchModel)
    def sketch_from_stream(req: StreamSketchRequest):
        sk = sketch_stream(
            req.items,
            req.k,
            _scheme(req.seed, req.stream_salt),
            skip_duplicates=req.skip_duplicates,
        )
        return SketchModel.from_sketch(sk)

    @app.post("/sketches/merge", response_model=SketchModel)
    def merge_sketches(req: MergeRequest):
        merged = merge([model.to_sketch() for model in req.sketches])
        return SketchModel.from_sketch(merged)

    @app.post("/estimates/jaccard", response_model=SimilarityResponse)
    def jaccard(req: SketchPairRequest):
        est = estimate_jaccard_p(req.a.to_sketch(), req.b.to_sketch())
        return SimilarityResponse(jaccard_p=est.value, k=est.k, matches=est.matches)

    @app.post("/estimates/cardinality", response_model=CardinalityResponse)
    def cardinality(req: CardinalityRequest):
        est = estimate_cardinality(req.sketch.to_sketch())
        return CardinalityResponse(weighted_cardinality=est.value, k=est.k)

    @app.post("/estimates/set-algebra", response_model=SetAlgebraResponse)
    def set_algebra(req: SketchPairRequest):
        est = estimate_set_algebra(req.a.to_sketch(), req.b.to_sketch())
        return SetAlgebraResponse(
            union_w=est.union_w,
            intersection_w=est.intersection_w,
            a_minus_b_w=est.a_minus_b_w,
            jaccard_w=est.jaccard_w,
        )

    @app.post("/experiments/speed", response_model=ReportResponse)
    def bench_speed(req: SpeedBenchRequest):
        if req.workload is not None:
            vectors = [WeightedVector(entries) for entries in req.workload]
            label = f"posted workload ({len(vectors)} vectors)"
        else:
            vectors = [
                gen_synthetic(req.n, req.dist, derive_seed(req.seed, 10**7 + i))
                for i in range(req.vectors)
            ]
            label = f"synthetic n={req.n} {req.dist}"
        report = run_speed_experiment(
            vectors,
            req.k_list,
            methods=req.methods,
            seed=req.seed,
            delta=req.delta,
            reps=req.reps,
            warmup=req.warmup,
            label=label,
        )
        return ReportResponse(
            kind=report.kind,
            config=report.config,
            summary=report.summary,
            rows=report.rows,
        )

    @app.post("/experiments/rmse", response_model=ReportResponse)
    def bench_rmse(req: RmseBenchRequest):
        pair = None
        vector = None
        if req.workload is not None:
            if req.task == "jaccard":
                if len(req.workload) < 2:
                    raise InvalidParameterError(
                        "jaccard task needs at least two workload vectors"
                    )
                pair = (
                    WeightedVector(req.workload[0]),
                    WeightedVector(req.workload[1]),
                )
            else:
                if not req.workload:
                    raise InvalidParameterError("workload must be nonempty")
                vector = WeightedVector(req.workload[0])
        report = run_rmse_experiment(
            req.task,
            k_list=req.k_list,
            trials=req.trials,
            seed=req.seed,
            n=req.n,
            dist=req.dist,
            pair=pair,
            vector=vector,
            workers=req.workers,
        )
        return ReportResponse(
            kind=report.kind,
            config=report.config,
            summary=report.summary,
            rows=report.rows,
        )

    @app.post("/simulations/braid", response_model=BraidSimResponse)
    def simulate_braid(req: BraidSimRequest):
        config = BraidNetConfig(
            d=req.d,
            p1=req.p1,
            p2=req.p2,
            n=req.n,
            k=req.k,
            weight_dist=req.weight_dist,
            seed=req.seed,
        )
        rows = simulate_rows(config, runs=req.runs)
        return BraidSimResponse(
            config={
                "d": req.d,
                "p1": req.p1,
                "p2": req.p2,
                "n": req.n,
                "k": req.k,
                "weight_dist": req.weight_dist,
                "seed": req.seed,
                "runs": req.runs,
                "stream_salt": DEFAULT_STREAM_SALT,
            },
            rows=rows,
        )

    return app


app = create_app()
