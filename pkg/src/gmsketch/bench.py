"""Experiment harness: dataset ingestion, synthetic workloads, timing and
accuracy runs, machine-readable reports.

Timing methodology: monotonic clock, one warm-up pass, median of the
configured repetitions.  Accuracy runs use one independent seed scheme
per trial, derived from the master seed, so no two trials share draws.
Reports carry the full configuration echo; with a fixed master seed every
non-timing field is reproducible byte-for-byte.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DatasetParseError, InvalidParameterError, UnknownDistributionError
from .estimate import (
    estimate_cardinality,
    estimate_jaccard_p,
    exact_jaccard_p,
)
from .randgen import SeedScheme, derive_seed
from .sketch import (
    GenerationParams,
    WeightedVector,
    sketch_fast,
    sketch_fast_counted,
    sketch_naive_counted,
)
from .stream import StreamSketchState, stream_finalize, stream_update

SPEED_METHODS = ("naive", "fast", "stream")


@dataclass
class SparseDataset:
    """A list of sparse weighted vectors plus the ambient dimension."""

    vectors: list[WeightedVector]
    feature_dim: int
    name: str


def load_sparse(path: str | Path) -> SparseDataset:
    """Load the conventional sparse text format.

    One vector per line: an optional leading label token (no colon),
    then whitespace-separated ``index:value`` pairs with 1-based indices
    and positive decimal values.  Blank lines and ``#`` comments are
    skipped.  An empty file yields an empty dataset with feature_dim 0.
    """
    path = Path(path)
    vectors: list[WeightedVector] = []
    feature_dim = 0
    with path.open() as handle:
        for number, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            if ":" not in tokens[0]:
                tokens = tokens[1:]
            entries: dict[int, float] = {}
            for token in tokens:
                try:
                    index_text, value_text = token.split(":", 1)
                    index = int(index_text)
                    value = float(value_text)
                except ValueError as exc:
                    raise DatasetParseError(f"bad pair {token!r}: {exc}", number) from exc
                if index < 1:
                    raise DatasetParseError(f"index {index} must be >= 1", number)
                if value <= 0.0 or not math.isfinite(value):
                    raise DatasetParseError(
                        f"value {value} for index {index} must be positive", number
                    )
                if index in entries:
                    raise DatasetParseError(f"duplicate index {index}", number)
                entries[index] = value
                if index > feature_dim:
                    feature_dim = index
            if not entries:
                raise DatasetParseError("no index:value pairs", number)
            vectors.append(WeightedVector(entries))
    return SparseDataset(vectors, feature_dim, path.stem)


_DIST_ALIASES = {
    "uniform01": "uniform01",
    "uni(0,1)": "uniform01",
    "exp1": "exp1",
    "exp(1)": "exp1",
    "normal": "normal(1,0.1)",
    "normal(1,0.1)": "normal(1,0.1)",
    "beta": "beta(5,5)",
    "beta(5,5)": "beta(5,5)",
}


def canonical_distribution(dist: str) -> str:
    key = dist.strip().lower().replace(" ", "")
    try:
        return _DIST_ALIASES[key]
    except KeyError:
        raise UnknownDistributionError(
            f"unknown distribution {dist!r}; expected one of "
            f"uniform01, exp1, normal(1,0.1), beta(5,5)"
        ) from None


def _positive_draws(draw, n: int) -> np.ndarray:
    values = draw(n)
    while True:
        bad = values <= 0.0
        if not bad.any():
            return values
        values[bad] = draw(int(bad.sum()))


def gen_synthetic(n: int, dist: str, seed: int) -> WeightedVector:
    """Dense synthetic vector: elements 1..n with weights from ``dist``.

    Normal and beta draws are rejection-resampled to stay strictly
    positive.
    """
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    name = canonical_distribution(dist)
    rng = np.random.default_rng(seed)
    if name == "uniform01":
        values = _positive_draws(lambda m: rng.random(m), n)
    elif name == "exp1":
        values = _positive_draws(lambda m: rng.exponential(1.0, m), n)
    elif name == "normal(1,0.1)":
        values = _positive_draws(lambda m: rng.normal(1.0, 0.1, m), n)
    else:
        values = _positive_draws(lambda m: rng.beta(5.0, 5.0, m), n)
    return WeightedVector({i + 1: float(values[i]) for i in range(n)})


def make_synthetic_pair(
    n: int, dist: str, seed: int, shared_fraction: float = 0.5
) -> tuple[WeightedVector, WeightedVector]:
    """Vector pair sharing a weight-identical prefix of the support.

    The first ``round(n * shared_fraction)`` elements appear in both
    vectors with equal weights; the remainder of each support is private.
    Useful for accuracy runs where the exact similarity is then computed
    by the exact estimators.
    """
    if not 0.0 <= shared_fraction <= 1.0:
        raise InvalidParameterError(
            f"shared_fraction must be in [0, 1], got {shared_fraction}"
        )
    base = gen_synthetic(2 * n, dist, seed).as_dict()
    shared = round(n * shared_fraction)
    u = {i: base[i] for i in range(1, n + 1)}
    v = {i: base[i] for i in range(1, shared + 1)}
    for i in range(shared + 1, n + 1):
        v[n + i] = base[n + i]
    return WeightedVector(u), WeightedVector(v)


@dataclass
class ExperimentReport:
    """Config echo plus per-run rows and aggregate summary."""

    kind: str
    config: dict
    rows: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": self.kind,
                "config": self.config,
                "summary": self.summary,
                "rows": self.rows,
            },
            indent=2,
            sort_keys=True,
        )

    def csv_text(self) -> str:
        if not self.rows:
            return ""
        buffer = io.StringIO()
        fields = list(self.rows[0].keys())
        writer = csv.DictWriter(buffer, fieldnames=fields)
        writer.writeheader()
        for row in self.rows:
            writer.writerow(row)
        return buffer.getvalue()

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return self.to_json()
        if fmt == "csv":
            return self.csv_text()
        raise InvalidParameterError(f"unknown output format {fmt!r}")


def _time_method(fn, reps: int, warmup: int) -> list[int]:
    for _ in range(warmup):
        fn()
    durations = []
    for _ in range(reps):
        start = time.perf_counter_ns()
        fn()
        durations.append(time.perf_counter_ns() - start)
    return durations


def run_speed_experiment(
    vectors: Sequence[WeightedVector],
    k_list: Sequence[int],
    methods: Sequence[str] = SPEED_METHODS,
    seed: int = 1,
    delta: int | None = None,
    reps: int = 5,
    warmup: int = 1,
    label: str = "workload",
) -> ExperimentReport:
    """Wall-clock and work comparison of the generators.

    Every method sees identical seeds.  Rows carry the median duration
    and the emitted-order-statistic count (the work metric); the summary
    reports the fast-vs-naive speedup per k when both ran.
    """
    for method in methods:
        if method not in SPEED_METHODS:
            raise InvalidParameterError(f"unknown method {method!r}")
    scheme = SeedScheme(seed)
    report = ExperimentReport(
        kind="speed",
        config={
            "label": label,
            "vectors": len(vectors),
            "n_plus_total": sum(v.n_plus for v in vectors),
            "k_list": list(k_list),
            "methods": list(methods),
            "seed": seed,
            "delta": delta,
            "reps": reps,
            "warmup": warmup,
        },
    )
    medians: dict[tuple[int, str], float] = {}
    for k in k_list:
        params = GenerationParams(k=k, scheme=scheme, delta=delta)
        for method in methods:
            emitted_total = 0

            if method == "naive":

                def job():
                    nonlocal emitted_total
                    emitted_total = 0
                    for vec in vectors:
                        _, emitted = sketch_naive_counted(vec, params)
                        emitted_total += emitted

            elif method == "fast":

                def job():
                    nonlocal emitted_total
                    emitted_total = 0
                    for vec in vectors:
                        _, emitted = sketch_fast_counted(vec, params)
                        emitted_total += emitted

            else:

                def job():
                    nonlocal emitted_total
                    emitted_total = 0
                    for vec in vectors:
                        state = StreamSketchState(k, scheme)
                        for item in vec.items():
                            stream_update(state, item)
                        stream_finalize(state)
                        emitted_total += state.emitted

            durations = _time_method(job, reps=reps, warmup=warmup)
            median_ns = int(np.median(durations))
            medians[(k, method)] = median_ns
            report.rows.append(
                {
                    "k": k,
                    "method": method,
                    "median_ns": median_ns,
                    "min_ns": min(durations),
                    "max_ns": max(durations),
                    "reps": reps,
                    "emitted": emitted_total,
                }
            )
    speedups = {}
    for k in k_list:
        naive_ns = medians.get((k, "naive"))
        fast_ns = medians.get((k, "fast"))
        if naive_ns and fast_ns:
            speedups[str(k)] = naive_ns / fast_ns
    report.summary["fast_vs_naive_speedup"] = speedups
    return report


def _jaccard_chunk(args) -> list[dict]:
    u_entries, v_entries, k, trials_and_seeds = args
    u = WeightedVector(u_entries)
    v = WeightedVector(v_entries)
    rows = []
    for trial, seed in trials_and_seeds:
        scheme = SeedScheme(seed)
        params = GenerationParams(k=k, scheme=scheme)
        est = estimate_jaccard_p(sketch_fast(u, params), sketch_fast(v, params))
        rows.append({"trial": trial, "k": k, "estimate": est.value})
    return rows


def _cardinality_chunk(args) -> list[dict]:
    entries, k, trials_and_seeds = args
    vec = WeightedVector(entries)
    rows = []
    for trial, seed in trials_and_seeds:
        scheme = SeedScheme(seed)
        params = GenerationParams(k=k, scheme=scheme)
        est = estimate_cardinality(sketch_fast(vec, params))
        rows.append({"trial": trial, "k": k, "estimate": est.value})
    return rows


def _run_chunks(worker, job_args, workers: int) -> list[dict]:
    if workers <= 1:
        rows: list[dict] = []
        for args in job_args:
            rows.extend(worker(args))
        return rows
    rows = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for chunk_rows in pool.map(worker, job_args):
            rows.extend(chunk_rows)
    return rows


def _chunked_trials(trials: int, master: int, pieces: int):
    all_pairs = [(t, derive_seed(master, t)) for t in range(trials)]
    size = max(1, math.ceil(trials / pieces))
    return [all_pairs[i : i + size] for i in range(0, trials, size)]


def run_rmse_experiment(
    task: str,
    *,
    k_list: Sequence[int],
    trials: int = 1000,
    seed: int = 1,
    n: int = 100,
    dist: str = "uniform01",
    pair: tuple[WeightedVector, WeightedVector] | None = None,
    vector: WeightedVector | None = None,
    workers: int = 1,
) -> ExperimentReport:
    """Accuracy run: empirical RMSE across independent schemes per k.

    ``task`` is ``jaccard`` (similarity of a vector pair against the
    exact value) or ``cardinality`` (weighted cardinality of one vector
    against its exact total weight).  The summary includes the matching
    theoretical curves sqrt(J(1-J)/k) and c*sqrt(2/k).
    """
    if trials < 2:
        raise InvalidParameterError(f"trials must be >= 2, got {trials}")
    if task == "jaccard":
        if pair is None:
            pair = make_synthetic_pair(n, dist, derive_seed(seed, 10**6))
        u, v = pair
        truth = exact_jaccard_p(u, v)
        config_extra = {"exact_jaccard_p": truth, "u_n_plus": u.n_plus, "v_n_plus": v.n_plus}
    elif task == "cardinality":
        if vector is None:
            vector = gen_synthetic(n, dist, derive_seed(seed, 10**6))
        truth = vector.weight_sum
        config_extra = {"exact_cardinality": truth, "n_plus": vector.n_plus}
    else:
        raise InvalidParameterError(f"unknown rmse task {task!r}")

    report = ExperimentReport(
        kind="rmse",
        config={
            "task": task,
            "k_list": list(k_list),
            "trials": trials,
            "seed": seed,
            "dist": canonical_distribution(dist),
            "workers": workers,
            **config_extra,
        },
    )
    per_k = {}
    for k in k_list:
        chunks = _chunked_trials(trials, seed, pieces=max(workers * 4, 1))
        if task == "jaccard":
            job_args = [(u.as_dict(), v.as_dict(), k, chunk) for chunk in chunks]
            rows = _run_chunks(_jaccard_chunk, job_args, workers)
        else:
            job_args = [(vector.as_dict(), k, chunk) for chunk in chunks]
            rows = _run_chunks(_cardinality_chunk, job_args, workers)
        rows.sort(key=lambda r: r["trial"])
        report.rows.extend(rows)
        estimates = np.array([r["estimate"] for r in rows])
        rmse = float(np.sqrt(np.mean((estimates - truth) ** 2)))
        entry = {
            "mean": float(estimates.mean()),
            "rmse": rmse,
            "sample_variance": float(estimates.var(ddof=1)),
        }
        if task == "jaccard":
            entry["theory_rmse"] = math.sqrt(truth * (1.0 - truth) / k)
        else:
            entry["rel_rmse"] = rmse / truth
            entry["theory_rmse"] = truth * math.sqrt(2.0 / k)
            entry["theory_rel_rmse"] = math.sqrt(2.0 / k)
        per_k[str(k)] = entry
    report.summary["truth"] = truth
    report.summary["per_k"] = per_k
    return report
