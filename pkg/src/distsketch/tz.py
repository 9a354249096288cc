"""Distributed construction of per-node distance labels.

Levels are drawn top-down with a fixed continuation probability; each
level's sources run the bounded multi-source relaxation pass, highest
level first, so every node ends up with exactly the bunch the reference
construction assigns it. The phase round budgets cover the analyzed
worst case with explicit constants; they are safety valves, not timers —
a pass ends as soon as the network is quiescent.
"""

from __future__ import annotations

import math

import numpy as np

from .graphs import WeightedGraph
from .oracle import LevelAssignment, shortest_path_diameter
from .protocol import (
    DETECT,
    FIXED,
    MODES,
    MULTI,
    PhaseSpec,
    SketchProcess,
    run_detect,
    run_fixed,
    termination_overlay,
)
from .rng import Rng
from .sim import RunMetrics
from .sketches import TzLabel

_RESAMPLE_BUDGET = 64


class ResampleError(RuntimeError):
    """Level sampling kept producing an empty stratum."""


def max_k(n: int) -> int:
    return max(1, math.ceil(math.log2(n)))


def sample_levels(
    ids: tuple[int, ...],
    k: int,
    prob: float,
    rng: Rng,
    n_total: int,
) -> LevelAssignment:
    """Independent geometric level draws over ``ids``, capped at k-1.

    Redraws the whole assignment from the next substream whenever the top
    stratum comes out empty, preserving independence between nodes.
    """
    if not ids:
        raise ValueError("no participants to sample")
    levels = [-1] * n_total
    if k == 1:
        for u in ids:
            levels[u] = 0
        return LevelAssignment(1, tuple(levels))
    for attempt in range(_RESAMPLE_BUDGET):
        gen = rng.substream(attempt).generator()
        heads = gen.random((len(ids), k - 1)) < prob
        drawn = np.cumprod(heads, axis=1).sum(axis=1)
        if not (drawn == k - 1).any():
            continue
        for u, lv in zip(ids, drawn):
            levels[u] = int(lv)
        return LevelAssignment(k, tuple(levels))
    raise ResampleError("resample budget exhausted")


def sample_hierarchy(n: int, k: int, rng: Rng) -> LevelAssignment:
    """Whole-graph hierarchy with continuation probability n^(-1/k)."""
    if not 1 <= k <= max_k(n):
        raise ValueError(f"k must lie in [1, {max_k(n)}] for n={n}")
    return sample_levels(tuple(range(n)), k, n ** (-1.0 / k), rng, n)


def phase_budget(n: int, k: int, S: int) -> int:
    return 4 * math.ceil(n ** (1.0 / k) * math.log(n)) * S + n


def detect_round_limit(plan, n: int, height: int) -> int:
    return 2 * sum(s.budget for s in plan) + (len(plan) + 2) * (2 * height + 8) + 4 * n


def tz_plan(n: int, k: int, S: int) -> tuple[PhaseSpec, ...]:
    budget = phase_budget(n, k, S)
    return tuple(
        PhaseSpec(f"phase-{i}", MULTI, level=i, bounded=(i < k - 1), budget=budget)
        for i in range(k - 1, -1, -1)
    )


def build_tz_from_levels(
    g: WeightedGraph,
    levels: LevelAssignment,
    mode: str = FIXED,
    S: int | None = None,
    root: int = 0,
) -> tuple[dict[int, TzLabel], RunMetrics]:
    """Run the phase plan for an already-sampled hierarchy."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    k = levels.k
    if S is None:
        S = shortest_path_diameter(g)
    plan = tz_plan(g.n, k, S)
    lv = levels.levels
    if mode == FIXED:
        procs, metrics = run_fixed(
            g, lambda u: SketchProcess(lv[u], False, plan, FIXED), plan
        )
    else:
        ov = termination_overlay(g, root)
        procs, metrics = run_detect(
            g,
            lambda u: SketchProcess(
                lv[u],
                False,
                plan,
                DETECT,
                ov.parent[u],
                ov.children[u],
                ov.height,
                u == root,
            ),
            plan,
            root,
            detect_round_limit(plan, g.n, ov.height),
        )
    labels = {u: procs[u].tz_label(k) for u in range(g.n)}
    return labels, metrics


def build_tz_sketches(
    g: WeightedGraph,
    k: int,
    rng: Rng,
    mode: str = FIXED,
    S: int | None = None,
    root: int = 0,
) -> tuple[dict[int, TzLabel], RunMetrics]:
    """Sample a hierarchy with ``rng`` and build every node's label.

    The same ``rng`` fed to :func:`sample_hierarchy` reproduces the coin
    flips, which is how tests compare against the reference construction.
    """
    levels = sample_hierarchy(g.n, k, rng)
    return build_tz_from_levels(g, levels, mode, S, root)
