"""Weighted graph type, edge-list I/O, and seeded synthetic generators."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .rng import Rng

# Weights must stay polynomial in n so any distance fits in one word.
WEIGHT_EXPONENT = 4

GENERATOR_KINDS = ("path", "grid", "erdos_renyi", "random_weighted")


class GraphError(ValueError):
    """Malformed or invalid graph input."""


class GenerationError(RuntimeError):
    """A generator could not produce a valid instance within its budget."""


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected connected graph with nonnegative integer edge weights.

    Edges are stored once as (u, v, w) with u < v, sorted; an adjacency
    view is materialized on construction. Instances are immutable and safe
    to share across concurrent runs.
    """

    n: int
    edges: tuple[tuple[int, int, int], ...]
    adj: tuple[tuple[tuple[int, int], ...], ...] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        lists: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        for u, v, w in self.edges:
            lists[u].append((v, w))
            lists[v].append((u, w))
        object.__setattr__(
            self, "adj", tuple(tuple(sorted(es)) for es in lists)
        )

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbors(self, u: int) -> tuple[tuple[int, int], ...]:
        return self.adj[u]

    def degree(self, u: int) -> int:
        return len(self.adj[u])

    @classmethod
    def from_edges(
        cls, n: int, edges: Iterable[tuple[int, int, int]]
    ) -> "WeightedGraph":
        """Validate and canonicalize an edge set into a graph."""
        if n < 2:
            raise GraphError("graph must have at least 2 nodes")
        canon: dict[tuple[int, int], int] = {}
        bound = n**WEIGHT_EXPONENT
        for u, v, w in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"node id out of range in edge ({u}, {v})")
            if u == v:
                raise GraphError(f"self-loop at node {u}")
            if w < 0:
                raise GraphError(f"negative weight on edge ({u}, {v})")
            if w > bound:
                raise GraphError(
                    f"weight {w} on edge ({u}, {v}) exceeds n^{WEIGHT_EXPONENT}"
                )
            key = (u, v) if u < v else (v, u)
            if key in canon:
                raise GraphError(f"duplicate edge ({key[0]}, {key[1]})")
            canon[key] = w
        g = cls(n, tuple(sorted((u, v, w) for (u, v), w in canon.items())))
        if not _connected(g):
            raise GraphError("disconnected graph")
        return g


def _connected(g: WeightedGraph) -> bool:
    seen = bytearray(g.n)
    seen[0] = 1
    stack = [0]
    count = 1
    while stack:
        u = stack.pop()
        for v, _ in g.adj[u]:
            if not seen[v]:
                seen[v] = 1
                count += 1
                stack.append(v)
    return count == g.n


def load_edge_list(text: str | Iterable[str]) -> WeightedGraph:
    """Parse the one-edge-per-line ``u v w`` format.

    Node ids are compacted to 0..n-1 in order of first appearance; lines
    starting with '#' and blank lines are ignored.
    """
    if isinstance(text, str):
        lines: Iterable[str] = text.splitlines()
    else:
        lines = text
    ids: dict[int, int] = {}
    raw: list[tuple[int, int, int]] = []
    for lineno, line in enumerate(lines, start=1):
        body = line.strip()
        if not body or body.startswith("#"):
            continue
        parts = body.split()
        if len(parts) != 3:
            raise GraphError(f"line {lineno}: expected 'u v w', got {body!r}")
        try:
            u, v, w = (int(p) for p in parts)
        except ValueError:
            raise GraphError(f"line {lineno}: non-integer field in {body!r}") from None
        if u == v:
            raise GraphError(f"line {lineno}: self-loop at node {u}")
        if w < 0:
            raise GraphError(f"line {lineno}: negative weight")
        for raw_id in (u, v):
            if raw_id not in ids:
                ids[raw_id] = len(ids)
        raw.append((ids[u], ids[v], w))
    if len(ids) < 2:
        raise GraphError("edge list is empty")
    return WeightedGraph.from_edges(len(ids), raw)


def serialize(g: WeightedGraph) -> str:
    """Inverse of load_edge_list on canonicalized graphs."""
    return "".join(f"{u} {v} {w}\n" for u, v, w in g.edges)


def generate(kind: str, params: Mapping[str, object], rng: Rng) -> WeightedGraph:
    """Build a synthetic instance; pure function of (kind, params, seed)."""
    if kind == "path":
        return _gen_path(int(params["n"]), int(params.get("weight", 1)))
    if kind == "grid":
        return _gen_grid(
            int(params["rows"]), int(params["cols"]), int(params.get("weight", 1))
        )
    if kind == "erdos_renyi":
        return _gen_erdos_renyi(
            int(params["n"]),
            float(params["p"]),
            int(params.get("wmin", 1)),
            int(params.get("wmax", 1)),
            rng,
        )
    if kind == "random_weighted":
        return _gen_random_weighted(
            int(params["n"]),
            int(params.get("extra_edges", int(params["n"]))),
            int(params.get("wmax", 16)),
            rng,
        )
    raise GraphError(f"unknown generator kind {kind!r}")


def _gen_path(n: int, weight: int) -> WeightedGraph:
    return WeightedGraph.from_edges(n, [(i, i + 1, weight) for i in range(n - 1)])


def _gen_grid(rows: int, cols: int, weight: int) -> WeightedGraph:
    if rows < 1 or cols < 1 or rows * cols < 2:
        raise GraphError("grid must have at least 2 nodes")
    edges = []
    for r in range(rows):
        for c in range(cols):
            u = r * cols + c
            if c + 1 < cols:
                edges.append((u, u + 1, weight))
            if r + 1 < rows:
                edges.append((u, u + cols, weight))
    return WeightedGraph.from_edges(rows * cols, edges)


_GEN_RETRIES = 256


def _gen_erdos_renyi(
    n: int, p: float, wmin: int, wmax: int, rng: Rng
) -> WeightedGraph:
    if not 0.0 < p <= 1.0:
        raise GraphError("edge probability must lie in (0, 1]")
    if not 0 <= wmin <= wmax:
        raise GraphError("need 0 <= wmin <= wmax")
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    for attempt in range(_GEN_RETRIES):
        gen = rng.substream(attempt).generator()
        mask = gen.random(len(pairs)) < p
        chosen = [pairs[i] for i in range(len(pairs)) if mask[i]]
        if not chosen:
            continue
        weights = gen.integers(wmin, wmax + 1, size=len(chosen))
        try:
            return WeightedGraph.from_edges(
                n, [(u, v, int(w)) for (u, v), w in zip(chosen, weights)]
            )
        except GraphError:
            continue
    raise GenerationError(
        "could not generate connected graph within retry budget"
    )


def _gen_random_weighted(
    n: int, extra_edges: int, wmax: int, rng: Rng
) -> WeightedGraph:
    """Random spanning tree plus extra random edges; always connected."""
    if wmax < 1:
        raise GraphError("wmax must be >= 1")
    gen = rng.generator()
    present = set()
    edges = []
    for v in range(1, n):
        u = int(gen.integers(0, v))
        present.add((u, v))
        edges.append((u, v))
    budget = 16 * (extra_edges + 1)
    added = 0
    while added < extra_edges and budget > 0:
        budget -= 1
        u = int(gen.integers(0, n))
        v = int(gen.integers(0, n))
        if u == v:
            continue
        key = (u, v) if u < v else (v, u)
        if key in present:
            continue
        present.add(key)
        edges.append(key)
        added += 1
    weights = gen.integers(1, wmax + 1, size=len(edges))
    return WeightedGraph.from_edges(
        n, [(u, v, int(w)) for (u, v), w in zip(edges, weights)]
    )
