"""Slack sketches: sampled density nets, net distance tables, and
composed sketches that run the label construction over the net only.

Net membership is a purely local coin flip; the accepted net is then
checked against the exact oracle for both net properties and redrawn
from the next substream on a miss, so every returned net satisfies the
properties outright rather than with high probability.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .graphs import WeightedGraph
from .oracle import LevelAssignment, all_pairs, r_epsilon, shortest_path_diameter
from .protocol import (
    ADOPT,
    DETECT,
    FIXED,
    MODES,
    MULTI,
    NEAREST,
    PhaseSpec,
    SketchProcess,
    run_detect,
    run_fixed,
    termination_overlay,
)
from .rng import Rng
from .sim import RunMetrics
from .sketches import CdgSketch, DensityNet, SlackSketch3
from .tz import detect_round_limit, sample_levels

_RETRY_BUDGET = 64

# Substream labels used inside build_cdg_sketches; exposed so tests can
# reproduce the exact coin flips of a build.
NET_STREAM = 0
LEVEL_STREAM = 1


class RetryBudgetError(RuntimeError):
    """Sampling kept violating a post-checked property."""


def net_size_cap(n: int, eps: Fraction) -> float:
    return float(10 / eps) * math.log(n)


def net_join_probability(n: int, eps: Fraction) -> float:
    return min(1.0, 5.0 * math.log(n) / float(eps * n))


def cdg_max_k(n: int, eps: Fraction) -> int:
    return max(1, math.ceil(math.log2(net_size_cap(n, eps))))


def build_density_net(
    g: WeightedGraph,
    eps: Fraction,
    rng: Rng,
    dist: list[tuple[int, ...]] | None = None,
) -> DensityNet:
    """Sample a net by local coin flips and verify both net properties.

    Property 1 (coverage) is checked against the oracle's smallest
    eps-mass radius for every node; property 2 bounds the member count.
    """
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    n = g.n
    p = net_join_probability(n, eps)
    cap = net_size_cap(n, eps)
    if dist is None:
        dist = all_pairs(g)
    reach = [r_epsilon(g, u, eps, dist[u]) for u in range(n)]
    for attempt in range(_RETRY_BUDGET):
        gen = rng.substream(attempt).generator()
        mask = gen.random(n) < p
        members = frozenset(int(i) for i in range(n) if mask[i])
        if not members or len(members) > cap:
            continue
        if all(
            min(dist[u][v] for v in members) <= reach[u] for u in range(n)
        ):
            return DensityNet(eps, members)
    raise RetryBudgetError("retry budget exhausted")


def build_slack3_sketches(
    g: WeightedGraph,
    net: DensityNet,
    mode: str = FIXED,
    S: int | None = None,
    root: int = 0,
) -> tuple[dict[int, SlackSketch3], RunMetrics]:
    """Exact distances from every node to every net member.

    A single unbounded multi-source pass: every net member announces and
    every node relays, so the table is exact at quiescence.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if S is None:
        S = shortest_path_diameter(g)
    members = net.members
    budget = 4 * (len(members) + 1) * S + g.n
    plan = (PhaseSpec("multi-source", MULTI, level=0, budget=budget),)
    lv = [0 if u in members else -1 for u in range(g.n)]
    if mode == FIXED:
        procs, metrics = run_fixed(
            g, lambda u: SketchProcess(lv[u], False, plan, FIXED), plan
        )
    else:
        ov = termination_overlay(g, root)
        procs, metrics = run_detect(
            g,
            lambda u: SketchProcess(
                lv[u], False, plan, DETECT,
                ov.parent[u], ov.children[u], ov.height, u == root,
            ),
            plan,
            root,
            detect_round_limit(plan, g.n, ov.height),
        )
    sketches = {}
    for u in range(g.n):
        table = {src: d for src, (_, d) in procs[u].bunch.items()}
        assert set(table) == members, f"incomplete table at node {u}"
        sketches[u] = SlackSketch3(u, table)
    return sketches, metrics


def sample_net_levels(
    net: DensityNet, k: int, rng: Rng, n_total: int
) -> LevelAssignment:
    """Hierarchy over net members with continuation prob |N|^(-1/k).

    Using the realized member count rather than the analytic size cap
    keeps every stratum populated for the whole admissible k range: the
    cap can exceed the attainable net size by orders of magnitude once
    the join probability saturates, which would starve the top levels.
    The cap still bounds |N|, so size and tail envelopes are unchanged.
    """
    members = net.sorted_members()
    prob = float(len(members)) ** (-1.0 / k)
    return sample_levels(members, k, prob, rng, n_total)


def cdg_plan(n: int, k: int, eps: Fraction, S: int) -> tuple[PhaseSpec, ...]:
    cap = net_size_cap(n, eps)
    per_phase = 4 * math.ceil(cap ** (1.0 / k) * math.log(n)) * S + n
    max_bunch = k * (3 * math.ceil(cap ** (1.0 / k) * math.log(n)) + 2)
    adopt_budget = 3 + 2 * k + 3 * max_bunch + 2 * n + 16
    phases = [PhaseSpec("nearest", NEAREST, budget=2 * S + n + 8)]
    phases.extend(
        PhaseSpec(
            f"net-phase-{i}", MULTI, level=i, bounded=(i < k - 1), budget=per_phase
        )
        for i in range(k - 1, -1, -1)
    )
    phases.append(PhaseSpec("adopt", ADOPT, budget=adopt_budget))
    return tuple(phases)


def build_cdg_sketches(
    g: WeightedGraph,
    eps: Fraction,
    k: int,
    rng: Rng,
    mode: str = FIXED,
    S: int | None = None,
    root: int = 0,
    dist: list[tuple[int, ...]] | None = None,
) -> tuple[dict[int, CdgSketch], RunMetrics]:
    """Nearest net member plus that member's label over the net metric.

    Three stages on the same simulation: a nearest pass from the whole
    net, the label construction restricted to net members (everyone else
    relays under the same rules), and a streaming pass in which each net
    member ships its finished label word by word down its nearest-tree.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if not 1 <= k <= cdg_max_k(g.n, eps):
        raise ValueError(f"k must lie in [1, {cdg_max_k(g.n, eps)}] for this eps")
    net = build_density_net(g, eps, rng.substream(NET_STREAM), dist=dist)
    levels = sample_net_levels(net, k, rng.substream(LEVEL_STREAM), g.n)
    if S is None:
        S = shortest_path_diameter(g)
    plan = cdg_plan(g.n, k, eps, S)
    lv = levels.levels
    members = net.members

    def factory_fixed(u: int) -> SketchProcess:
        return SketchProcess(lv[u], u in members, plan, FIXED)

    if mode == FIXED:
        procs, metrics = run_fixed(g, factory_fixed, plan)
    else:
        ov = termination_overlay(g, root)
        procs, metrics = run_detect(
            g,
            lambda u: SketchProcess(
                lv[u], u in members, plan, DETECT,
                ov.parent[u], ov.children[u], ov.height, u == root,
            ),
            plan,
            root,
            detect_round_limit(plan, g.n, ov.height),
        )
    sketches = {}
    for u in range(g.n):
        proc = procs[u]
        label = proc.finalize_label()
        assert label is not None, f"node {u} never adopted a label"
        sketches[u] = CdgSketch(
            u, proc.nearest_origin, int(proc.nearest_dist), label
        )
    return sketches, metrics
