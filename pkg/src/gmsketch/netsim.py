"""Braided-chain sensor-network simulation.

Two chains of d relay nodes each; the two layer-1 nodes are sources that
generate n packets apiece (disjoint id ranges).  Every node forwards its
distinct packet set to both layer-(l+1) nodes; a same-chain copy arrives
with probability p1 and a cross-chain copy with probability p2,
independently per packet per edge.  Each node summarizes its traffic
with two mergeable sketches over the same packet ids, one weighted by
packet size and one with unit weights, so that query code can estimate
total sizes, packet counts, and their ratio.  Exact received sets are
kept alongside as ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import fsum

import numpy as np

from .errors import InvalidParameterError
from .estimate import (
    estimate_cardinality,
    estimate_difference,
    estimate_set_algebra,
)
from .bench import canonical_distribution, gen_synthetic
from .randgen import SeedScheme, derive_seed
from .sketch import GumbelMaxSketch
from .stream import StreamSketchState, stream_finalize, stream_update

QUERIES = ("split_a", "split_b", "mean_size", "lost_a", "cross_jw")


@dataclass(frozen=True)
class BraidNetConfig:
    """Simulation parameters for one braided chain."""

    d: int
    p1: float
    p2: float
    n: int
    k: int
    weight_dist: str = "beta(5,5)"
    seed: int = 1

    def __post_init__(self):
        if self.d < 2:
            raise InvalidParameterError(f"d must be >= 2, got {self.d}")
        if not (0.0 <= self.p1 <= 1.0 and 0.0 <= self.p2 <= 1.0):
            raise InvalidParameterError(
                f"link probabilities must lie in [0, 1], got p1={self.p1}, p2={self.p2}"
            )
        if self.n < 1:
            raise InvalidParameterError(f"n must be >= 1, got {self.n}")
        if self.k < 2:
            raise InvalidParameterError(f"k must be >= 2 for queries, got {self.k}")
        canonical_distribution(self.weight_dist)


@dataclass
class NodeState:
    """One sensor node: exact received packets plus its two sketches."""

    layer: int
    chain: str
    received: dict[int, float]
    weighted_sketch: GumbelMaxSketch | None
    unit_sketch: GumbelMaxSketch | None
    delivered_from: dict[str, set[int]]

    @property
    def name(self) -> str:
        return f"{self.chain}{self.layer}"

    @property
    def empty(self) -> bool:
        return not self.received


def _build_sketches(
    received: dict[int, float], k: int, scheme: SeedScheme
) -> tuple[GumbelMaxSketch | None, GumbelMaxSketch | None]:
    if not received:
        return None, None
    weighted = StreamSketchState(k, scheme)
    unit = StreamSketchState(k, scheme)
    for pid in sorted(received):
        stream_update(weighted, (pid, received[pid]))
        stream_update(unit, (pid, 1.0))
    return stream_finalize(weighted), stream_finalize(unit)


def simulate(config: BraidNetConfig, run_index: int = 0) -> dict[str, NodeState]:
    """Run one loss realization; returns nodes keyed by name (A1..Bd).

    Per-node sketches are built by streaming the node's received packets;
    by construction they equal both the batch sketch of the received set
    and the merge of sketches of any decomposition of it.
    """
    master = derive_seed(config.seed, run_index)
    scheme = SeedScheme(derive_seed(master, 0))
    links = np.random.default_rng(derive_seed(master, 1))

    sizes_a = gen_synthetic(config.n, config.weight_dist, derive_seed(master, 2)).as_dict()
    sizes_b = {
        config.n + pid: w
        for pid, w in gen_synthetic(
            config.n, config.weight_dist, derive_seed(master, 3)
        ).as_dict().items()
    }
    sizes = {**sizes_a, **sizes_b}

    nodes: dict[str, NodeState] = {}
    current = {"A": dict(sizes_a), "B": dict(sizes_b)}
    delivered_from: dict[str, dict[str, set[int]]] = {"A": {}, "B": {}}
    for layer in range(1, config.d + 1):
        for chain in ("A", "B"):
            received = current[chain]
            weighted, unit = _build_sketches(received, config.k, scheme)
            nodes[f"{chain}{layer}"] = NodeState(
                layer=layer,
                chain=chain,
                received=received,
                weighted_sketch=weighted,
                unit_sketch=unit,
                delivered_from=delivered_from[chain],
            )
        if layer == config.d:
            break
        next_received = {"A": {}, "B": {}}
        next_delivered: dict[str, dict[str, set[int]]] = {"A": {}, "B": {}}
        for src_chain in ("A", "B"):
            upstream = nodes[f"{src_chain}{layer}"]
            pids = sorted(upstream.received)
            if not pids:
                continue
            for dst_chain in ("A", "B"):
                prob = config.p1 if dst_chain == src_chain else config.p2
                draws = links.random(len(pids))
                delivered = {pid for pid, x in zip(pids, draws) if x < prob}
                next_delivered[dst_chain][upstream.name] = delivered
                bucket = next_received[dst_chain]
                for pid in delivered:
                    bucket[pid] = sizes[pid]
        current = next_received
        delivered_from = next_delivered
    return nodes


@dataclass(frozen=True)
class QueryValue:
    """An (estimate, exact) pair; estimate is None when undefined."""

    estimate: float | None
    exact: float


def _exact_weight(received: dict[int, float]) -> float:
    return fsum(received.values())


def _exact_intersection(a: dict[int, float], b: dict[int, float]) -> float:
    if len(b) < len(a):
        a, b = b, a
    return fsum(w for pid, w in a.items() if pid in b)


def query_node(nodes: dict[str, NodeState], layer: int) -> dict[str, QueryValue]:
    """Evaluate the four per-layer queries at chain-A node of ``layer``.

    split_a / split_b: total size of the node's distinct packets that
    originated at source A / source B (sketch intersection vs. exact).
    mean_size: weighted estimate divided by the unit-sketch count.
    lost_a: total size of source-A packets that reached neither node of
    the layer.  cross_jw: weighted Jaccard similarity of the two nodes.
    Empty nodes yield exact values and flagged-undefined estimates.
    """
    node_a = nodes.get(f"A{layer}")
    node_b = nodes.get(f"B{layer}")
    if node_a is None or node_b is None:
        raise InvalidParameterError(f"layer {layer} out of range")
    source_a = nodes["A1"]
    source_b = nodes["B1"]

    out: dict[str, QueryValue] = {}

    exact_split_a = _exact_intersection(source_a.received, node_a.received)
    exact_split_b = _exact_intersection(source_b.received, node_a.received)
    if node_a.weighted_sketch is None:
        out["split_a"] = QueryValue(None, exact_split_a)
        out["split_b"] = QueryValue(None, exact_split_b)
    else:
        alg_a = estimate_set_algebra(source_a.weighted_sketch, node_a.weighted_sketch)
        alg_b = estimate_set_algebra(source_b.weighted_sketch, node_a.weighted_sketch)
        out["split_a"] = QueryValue(alg_a.intersection_w, exact_split_a)
        out["split_b"] = QueryValue(alg_b.intersection_w, exact_split_b)

    if node_a.empty:
        out["mean_size"] = QueryValue(None, 0.0)
    else:
        exact_mean = _exact_weight(node_a.received) / len(node_a.received)
        total = estimate_cardinality(node_a.weighted_sketch).value
        count = estimate_cardinality(node_a.unit_sketch).value
        estimate = total / count if count > 0 else None
        out["mean_size"] = QueryValue(estimate, exact_mean)

    union_ab = set(node_a.received) | set(node_b.received)
    exact_lost = fsum(
        w for pid, w in source_a.received.items() if pid not in union_ab
    )
    layer_sketches = [
        node.weighted_sketch
        for node in (node_a, node_b)
        if node.weighted_sketch is not None
    ]
    est_lost = estimate_difference(source_a.weighted_sketch, layer_sketches)
    out["lost_a"] = QueryValue(est_lost, exact_lost)

    exact_int = _exact_intersection(node_a.received, node_b.received)
    exact_union = (
        _exact_weight(node_a.received)
        + _exact_weight(node_b.received)
        - exact_int
    )
    exact_jw = exact_int / exact_union if exact_union > 0 else 0.0
    if node_a.weighted_sketch is None or node_b.weighted_sketch is None:
        out["cross_jw"] = QueryValue(None, exact_jw)
    else:
        alg = estimate_set_algebra(node_a.weighted_sketch, node_b.weighted_sketch)
        out["cross_jw"] = QueryValue(alg.jaccard_w, exact_jw)
    return out


def simulate_rows(config: BraidNetConfig, runs: int = 1) -> list[dict]:
    """Per-(run, layer) rows with exact and estimate columns per query."""
    rows = []
    for run in range(runs):
        nodes = simulate(config, run_index=run)
        for layer in range(1, config.d + 1):
            results = query_node(nodes, layer)
            row: dict = {"run": run, "layer": layer}
            for query in QUERIES:
                value = results[query]
                row[f"{query}_exact"] = value.exact
                row[f"{query}_estimate"] = value.estimate
            rows.append(row)
    return rows
