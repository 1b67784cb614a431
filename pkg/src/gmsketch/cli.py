"""Command-line client for the sketch service.

Every command talks to the HTTP API: to a remote server when ``--server``
is given, otherwise to an in-process instance of the same application, so
local and remote runs produce identical bytes.  The CLI's own job is file
handling; all sketching and estimation happens behind the service
endpoints.
"""

from __future__ import annotations

import asyncio
import csv
import io
import json
import sys
from pathlib import Path

import click
import httpx

from .bench import load_sparse
from .service.app import create_app
from .stream import parse_stream_items

DEFAULT_SEED = 1


class ServiceClient:
    """Minimal JSON-over-HTTP client with an in-process fallback."""

    def __init__(self, server: str | None = None):
        self._server = server
        self._app = None if server else create_app()

    def call(self, method: str, path: str, payload: dict | None = None) -> dict:
        if self._server:
            with httpx.Client(base_url=self._server, timeout=None) as client:
                response = client.request(method, path, json=payload)
        else:
            response = asyncio.run(self._in_process(method, path, payload))
        if response.status_code >= 400:
            try:
                detail = response.json().get("detail", response.text)
            except ValueError:
                detail = response.text
            raise click.ClickException(f"{path}: {detail}")
        return response.json()

    async def _in_process(self, method: str, path: str, payload: dict | None):
        transport = httpx.ASGITransport(app=self._app)
        async with httpx.AsyncClient(
            transport=transport, base_url="http://gmsketch.local", timeout=None
        ) as client:
            return await client.request(method, path, json=payload)


def _write_text(output: str | None, text: str) -> None:
    if output in (None, "-"):
        click.echo(text, nl=not text.endswith("\n"))
    else:
        Path(output).write_text(text if text.endswith("\n") else text + "\n")


def _read_sketch_lines(path: str) -> list[dict]:
    records = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line:
            records.append(json.loads(line))
    if not records:
        raise click.ClickException(f"{path}: no sketch records found")
    return records


def _rows_to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue()


def _render_report(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True)
    return _rows_to_csv(report["rows"])


@click.group()
@click.option(
    "--seed",
    type=int,
    default=DEFAULT_SEED,
    envvar="GMSKETCH_SEED",
    show_default=True,
    help="Master seed (env GMSKETCH_SEED overrides the default).",
)
@click.option("--k", type=int, default=256, show_default=True, help="Sketch length.")
@click.option("--delta", type=int, default=None, help="Batch increment (defaults to k).")
@click.option("--threads", type=int, default=1, show_default=True, help="Worker pool size for trials.")
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["csv", "json"]),
    default="csv",
    show_default=True,
    help="Report output format.",
)
@click.option("--server", default=None, help="Base URL of a running service; default is in-process.")
@click.pass_context
def main(ctx, seed, k, delta, threads, fmt, server):
    """Gumbel-Max sketch toolkit."""
    ctx.obj = {
        "seed": seed,
        "k": k,
        "delta": delta,
        "threads": threads,
        "format": fmt,
        "client": ServiceClient(server),
    }


@main.command()
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", default="-", help="Output file ('-' for stdout).")
@click.option(
    "--input-format",
    type=click.Choice(["sparse", "stream"]),
    default="sparse",
    show_default=True,
    help="sparse: one vector per line (label + index:value pairs); "
    "stream: one 'element weight' item per line, one sketch total.",
)
@click.option("--method", type=click.Choice(["fast", "naive"]), default="fast", show_default=True)
@click.pass_obj
def sketch(obj, input_path, output, input_format, method):
    """Sketch vectors from a file; writes one JSON sketch record per line."""
    client = obj["client"]
    lines = []
    if input_format == "stream":
        with open(input_path) as handle:
            items = [[e, w] for e, w in parse_stream_items(handle)]
        record = client.call(
            "POST",
            "/sketches/stream",
            {"items": items, "k": obj["k"], "seed": obj["seed"]},
        )
        lines.append(json.dumps(record, separators=(",", ":")))
    else:
        dataset = load_sparse(input_path)
        for vector in dataset.vectors:
            record = client.call(
                "POST",
                "/sketches/vector",
                {
                    "entries": vector.as_dict(),
                    "k": obj["k"],
                    "seed": obj["seed"],
                    "delta": obj["delta"],
                    "method": method,
                },
            )
            lines.append(json.dumps(record, separators=(",", ":")))
    _write_text(output, "\n".join(lines))


@main.command()
@click.argument("sketch_a", type=click.Path(exists=True, dir_okay=False))
@click.argument("sketch_b", type=click.Path(exists=True, dir_okay=False), required=False)
@click.option("-o", "--output", default="-")
@click.pass_obj
def estimate(obj, sketch_a, sketch_b, output):
    """Similarity of two sketch files, or cardinality of one."""
    client = obj["client"]
    if sketch_b is None:
        rows = []
        for record in _read_sketch_lines(sketch_a):
            result = client.call("POST", "/estimates/cardinality", {"sketch": record})
            rows.append(result)
        text = (
            json.dumps(rows, indent=2)
            if obj["format"] == "json"
            else _rows_to_csv(rows)
        )
    else:
        a = _read_sketch_lines(sketch_a)[0]
        b = _read_sketch_lines(sketch_b)[0]
        result = client.call("POST", "/estimates/jaccard", {"a": a, "b": b})
        text = (
            json.dumps(result, indent=2)
            if obj["format"] == "json"
            else _rows_to_csv([result])
        )
    _write_text(output, text)


@main.command()
@click.argument("sketch_files", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", default="-")
@click.pass_obj
def merge(obj, sketch_files, output):
    """Merge all sketches found in the given files into one."""
    client = obj["client"]
    records = []
    for path in sketch_files:
        records.extend(_read_sketch_lines(path))
    merged = client.call("POST", "/sketches/merge", {"sketches": records})
    _write_text(output, json.dumps(merged, separators=(",", ":")))


def _load_workload(dataset):
    if dataset is None:
        return None
    return [vector.as_dict() for vector in load_sparse(dataset).vectors]


@main.command("bench-speed")
@click.option("--n", type=int, default=1000, show_default=True)
@click.option("--dist", default="uniform01", show_default=True)
@click.option("--vectors", type=int, default=1, show_default=True)
@click.option(
    "--dataset",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="Sparse-format file to use as the workload instead of synthetic vectors.",
)
@click.option("--k-list", default=None, help="Comma-separated k values (defaults to --k).")
@click.option(
    "--methods",
    default="naive,fast",
    show_default=True,
    help="Comma-separated subset of naive,fast,stream.",
)
@click.option("--reps", type=int, default=5, show_default=True)
@click.option("-o", "--output", default="-")
@click.pass_obj
def bench_speed(obj, n, dist, vectors, dataset, k_list, methods, reps, output):
    """Time the generators on a synthetic or file-backed workload."""
    ks = [int(x) for x in k_list.split(",")] if k_list else [obj["k"]]
    report = obj["client"].call(
        "POST",
        "/experiments/speed",
        {
            "n": n,
            "dist": dist,
            "vectors": vectors,
            "workload": _load_workload(dataset),
            "k_list": ks,
            "methods": [m.strip() for m in methods.split(",") if m.strip()],
            "seed": obj["seed"],
            "delta": obj["delta"],
            "reps": reps,
        },
    )
    _write_text(output, _render_report(report, obj["format"]))


@main.command("bench-rmse")
@click.option("--task", type=click.Choice(["jaccard", "cardinality"]), default="cardinality", show_default=True)
@click.option("--n", type=int, default=100, show_default=True)
@click.option("--dist", default="uniform01", show_default=True)
@click.option(
    "--dataset",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="Sparse-format file: first vector (cardinality) or first two (jaccard).",
)
@click.option("--k-list", default=None, help="Comma-separated k values (defaults to --k).")
@click.option("--trials", type=int, default=1000, show_default=True)
@click.option("-o", "--output", default="-")
@click.pass_obj
def bench_rmse(obj, task, n, dist, dataset, k_list, trials, output):
    """Estimation accuracy across independent seed schemes."""
    ks = [int(x) for x in k_list.split(",")] if k_list else [obj["k"]]
    report = obj["client"].call(
        "POST",
        "/experiments/rmse",
        {
            "task": task,
            "n": n,
            "dist": dist,
            "workload": _load_workload(dataset),
            "k_list": ks,
            "trials": trials,
            "seed": obj["seed"],
            "workers": obj["threads"],
        },
    )
    _write_text(output, _render_report(report, obj["format"]))


@main.command("simulate-net")
@click.option("--d", type=int, default=30, show_default=True)
@click.option("--p1", type=float, default=0.9, show_default=True)
@click.option("--p2", type=float, default=0.1, show_default=True)
@click.option("--n", type=int, default=10000, show_default=True)
@click.option("--runs", type=int, default=1, show_default=True)
@click.option("--weight-dist", default="beta(5,5)", show_default=True)
@click.option("-o", "--output", default="-")
@click.pass_obj
def simulate_net(obj, d, p1, p2, n, runs, weight_dist, output):
    """Braided-chain simulation; per-layer exact vs estimate columns."""
    result = obj["client"].call(
        "POST",
        "/simulations/braid",
        {
            "d": d,
            "p1": p1,
            "p2": p2,
            "n": n,
            "k": obj["k"],
            "weight_dist": weight_dist,
            "seed": obj["seed"],
            "runs": runs,
        },
    )
    if obj["format"] == "json":
        _write_text(output, json.dumps(result, indent=2, sort_keys=True))
    else:
        _write_text(output, _rows_to_csv(result["rows"]))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main(prog_name="gmsketch", auto_envvar_prefix="GMSKETCH")
