"""Exact reference computations used as ground truth by every test.

Everything here is a pure function over immutable graphs. The quadratic
all-pairs sweep is intentional: instances stay at desk scale and the
oracle must be boring and obviously correct.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction

from .graphs import WeightedGraph
from .sketches import TzLabel

INF = float("inf")


class EmptyLevelError(ValueError):
    """A sampled hierarchy has an empty stratum; the caller must resample."""


@dataclass(frozen=True)
class DistanceTable:
    source: int
    dist: tuple[int, ...]


@dataclass(frozen=True)
class LevelAssignment:
    """Per-node sampling levels; level -1 marks a non-participant.

    ``A(i)`` is the set of participants with level >= i. For plain runs
    every node participates; runs restricted to a net mark the rest -1.
    """

    k: int
    levels: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        for lv in self.levels:
            if lv >= self.k or lv < -1:
                raise ValueError(f"level {lv} outside [-1, {self.k - 1}]")

    def A(self, i: int) -> tuple[int, ...]:
        return tuple(u for u, lv in enumerate(self.levels) if lv >= i)

    def participants(self) -> tuple[int, ...]:
        return self.A(0)


def sssp_exact(g: WeightedGraph, s: int) -> DistanceTable:
    """Exact single-source distances (Dijkstra, nonnegative weights)."""
    dist = [None] * g.n
    heap = [(0, s)]
    adj = g.adj
    while heap:
        d, u = heapq.heappop(heap)
        if dist[u] is not None:
            continue
        dist[u] = d
        for v, w in adj[u]:
            if dist[v] is None:
                heapq.heappush(heap, (d + w, v))
    return DistanceTable(s, tuple(dist))


def all_pairs(g: WeightedGraph) -> list[tuple[int, ...]]:
    return [sssp_exact(g, s).dist for s in range(g.n)]


def hop_diameter(g: WeightedGraph) -> int:
    """Max over pairs of the unweighted hop distance."""
    best = 0
    for s in range(g.n):
        depth = [-1] * g.n
        depth[s] = 0
        frontier = [s]
        while frontier:
            nxt = []
            for u in frontier:
                for v, _ in g.adj[u]:
                    if depth[v] < 0:
                        depth[v] = depth[u] + 1
                        nxt.append(v)
            frontier = nxt
        best = max(best, max(depth))
    return best


def _min_hops_row(g: WeightedGraph, s: int) -> list[int]:
    """Per-target minimum hop count among minimum-weight paths from s."""
    best: list[tuple[float, float]] = [(INF, INF)] * g.n
    best[s] = (0, 0)
    heap = [(0, 0, s)]
    while heap:
        d, h, u = heapq.heappop(heap)
        if (d, h) > best[u]:
            continue
        for v, w in g.adj[u]:
            cand = (d + w, h + 1)
            if cand < best[v]:
                best[v] = cand
                heapq.heappush(heap, (d + w, h + 1, v))
    return [int(h) for _, h in best]


def shortest_path_diameter(g: WeightedGraph) -> int:
    """Max over pairs of min hops among min-weight paths (>= hop diameter)."""
    return max(max(_min_hops_row(g, s)) for s in range(g.n))


def centralized_tz(
    g: WeightedGraph,
    levels: LevelAssignment,
    dist: list[tuple[int, ...]] | None = None,
) -> dict[int, TzLabel]:
    """Reference sketch construction over exact distances.

    Shares the global (distance, id) tie-break with the message-passing
    construction so label equality tests are exact.
    """
    k = levels.k
    if not levels.A(k - 1):
        raise EmptyLevelError(f"empty level {k - 1}")
    if dist is None:
        dist = all_pairs(g)
    lv = levels.levels
    labels: dict[int, TzLabel] = {}
    for u in range(g.n):
        row = dist[u]
        order = sorted((row[v], v) for v in range(g.n) if lv[v] >= 0)
        # bound[i] = (distance, id)-minimal member of A(i); bound[k] = inf.
        bound: list[tuple[float, float] | tuple[int, int]] = [(INF, INF)] * (k + 1)
        for d, v in order:
            top = lv[v]
            for i in range(top, -1, -1):
                if bound[i] != (INF, INF):
                    break
                bound[i] = (d, v)
        bunch: dict[int, tuple[int, int]] = {}
        for d, v in order:
            if (d, v) < bound[lv[v] + 1]:
                bunch[v] = (lv[v], d)
        pivots = tuple((v, d) for d, v in (bound[i] for i in range(k)))
        labels[u] = TzLabel(u, k, pivots, bunch)
    return labels


def _rank_threshold(eps: Fraction, n: int) -> Fraction:
    return eps * n


def epsilon_far_pairs(
    g: WeightedGraph,
    eps: Fraction,
    dist: list[tuple[int, ...]] | None = None,
) -> set[tuple[int, int]]:
    """Ordered pairs (u, v) where at least eps*n nodes beat v for u.

    "Beats" is evaluated under the canonical (distance, id) tie-break and
    the eps*n threshold is compared exactly as a rational.
    """
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    if dist is None:
        dist = all_pairs(g)
    thresh = _rank_threshold(eps, g.n)
    out: set[tuple[int, int]] = set()
    for u in range(g.n):
        row = dist[u]
        order = sorted((row[v], v) for v in range(g.n))
        for rank, (_, v) in enumerate(order):
            if v != u and rank >= thresh:
                out.add((u, v))
    return out


def r_epsilon(
    g: WeightedGraph,
    u: int,
    eps: Fraction,
    dist_row: tuple[int, ...] | None = None,
) -> int:
    """Smallest attained radius whose ball around u holds >= eps*n nodes."""
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    if dist_row is None:
        dist_row = sssp_exact(g, u).dist
    m = math.ceil(eps * g.n)
    radii = sorted(dist_row)
    return radii[m - 1]
