"""Gracefully degrading sketches: one slack sketch per power-of-two
slack value, built back to back and queried by taking the minimum.

Levels use disjoint substreams of the caller's rng, so they are
independent, reproducible, and order-insensitive: building them in any
order yields identical sketches (only metric attribution is sequential).
"""

from __future__ import annotations

import math
from fractions import Fraction

from .graphs import WeightedGraph
from .oracle import all_pairs, shortest_path_diameter
from .protocol import FIXED, MODES
from .rng import Rng
from .sim import PhaseMetrics, RunMetrics
from .sketches import GdSketch
from .slack import build_cdg_sketches, net_size_cap


def gd_level_params(n: int) -> tuple[tuple[Fraction, int], ...]:
    """(eps_i, k_i) for i = 1..ceil(log2 n), eps_i = 2^-i."""
    out = []
    for i in range(1, math.ceil(math.log2(n)) + 1):
        eps = Fraction(1, 2**i)
        k = max(1, min(i, math.ceil(math.log2(net_size_cap(n, eps)))))
        out.append((eps, k))
    return tuple(out)


def build_gd_sketches(
    g: WeightedGraph,
    rng: Rng,
    mode: str = FIXED,
    S: int | None = None,
    root: int = 0,
) -> tuple[dict[int, GdSketch], RunMetrics]:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if S is None:
        S = shortest_path_diameter(g)
    dist = all_pairs(g)
    params = gd_level_params(g.n)
    metrics = RunMetrics()
    per_level: list[dict] = []
    for i, (eps, k) in enumerate(params, start=1):
        sketches, m = build_cdg_sketches(
            g, eps, k, rng.substream(i), mode, S, root, dist=dist
        )
        per_level.append(sketches)
        tagged = tuple(
            PhaseMetrics(f"eps=1/{2**i}|{p.phase}", p.rounds, p.data_msgs, p.control_msgs)
            for p in m.per_phase
        )
        metrics = metrics.merged_with(
            RunMetrics(
                m.rounds, m.data_msgs, m.control_msgs, tagged,
                m.max_nonempty_queues, m.by_kind,
            )
        )
    out = {
        u: GdSketch(
            u,
            tuple(
                (eps, k, per_level[j][u]) for j, (eps, k) in enumerate(params)
            ),
        )
        for u in range(g.n)
    }
    return out, metrics
