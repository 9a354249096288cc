"""Distance estimates from sketch pairs and stretch reporting.

Estimators are pure functions of the two sketches; they never consult
the graph, so lower-boundedness (estimate >= true distance) is a
property being tested, not an adjustment being applied. All stretch
statistics are exact rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .graphs import WeightedGraph
from .oracle import all_pairs, epsilon_far_pairs
from .rng import Rng
from .sketches import (
    CdgSketch,
    GdSketch,
    IncompatibleSketchError,
    SlackSketch3,
    TzLabel,
)


def tz_estimate(lu: TzLabel, lv: TzLabel) -> int:
    """Smallest-level pivot membership probe; O(k) bunch lookups.

    At the first level where either side's pivot sits in the other's
    bunch at that level, returns the two-leg distance through it (the
    smaller leg pair if both directions hit).
    """
    if lu.k != lv.k:
        raise IncompatibleSketchError("incompatible labels: k differs")
    for i in range(lu.k):
        best = None
        pu, du = lu.pivots[i]
        hit = lv.bunch.get(pu)
        if hit is not None and hit[0] == i:
            best = du + hit[1]
        pv, dv = lv.pivots[i]
        hit = lu.bunch.get(pv)
        if hit is not None and hit[0] == i:
            cand = dv + hit[1]
            if best is None or cand < best:
                best = cand
        if best is not None:
            return best
    raise IncompatibleSketchError("labels share no pivot level")


def slack3_estimate(su: SlackSketch3, sv: SlackSketch3) -> int:
    if su.table.keys() != sv.table.keys():
        raise IncompatibleSketchError("net mismatch")
    ta, tb = su.table, sv.table
    return min(ta[w] + tb[w] for w in ta)


def cdg_estimate(cu: CdgSketch, cv: CdgSketch) -> int:
    return cu.nearest_dist + tz_estimate(cu.net_label, cv.net_label) + cv.nearest_dist


def gd_estimate(gu: GdSketch, gv: GdSketch) -> int:
    if len(gu.levels) != len(gv.levels):
        raise IncompatibleSketchError("incompatible levels")
    best = None
    for (e1, k1, c1), (e2, k2, c2) in zip(gu.levels, gv.levels):
        if e1 != e2 or k1 != k2:
            raise IncompatibleSketchError("incompatible levels")
        est = cdg_estimate(c1, c2)
        if best is None or est < best:
            best = est
    return best


ESTIMATORS: dict[str, Callable] = {
    "tz": tz_estimate,
    "slack3": slack3_estimate,
    "cdg": cdg_estimate,
    "gd": gd_estimate,
}


@dataclass(frozen=True)
class StretchReport:
    per_pair: tuple[tuple[int, int, int, int, Fraction], ...]
    max_stretch: Fraction
    avg_stretch: Fraction
    slack_view: dict[Fraction, tuple[Fraction, int]]


def stretch_report(
    g: WeightedGraph,
    estimate: Callable[[int, int], int],
    pairs: Iterable[tuple[int, int]] | None = None,
    sample: int | None = None,
    rng: Rng | None = None,
    slack_eps: Mapping[Fraction, Fraction | None] | Iterable[Fraction] = (),
    dist: list[tuple[int, ...]] | None = None,
) -> StretchReport:
    """Exact per-pair stretch over all unordered pairs (or a sample).

    ``slack_eps`` maps each slack value to the ceiling violations are
    counted against (None counts nothing); for every listed eps the
    report also records the max stretch over that eps's far pairs.
    """
    if dist is None:
        dist = all_pairs(g)
    if pairs is None:
        pairs = [(u, v) for u in range(g.n) for v in range(u + 1, g.n)]
        if sample is not None and sample < len(pairs):
            if rng is None:
                raise ValueError("sampling pairs requires an rng")
            gen = rng.generator()
            idx = gen.choice(len(pairs), size=sample, replace=False)
            pairs = [pairs[i] for i in sorted(idx)]
    else:
        pairs = list(pairs)
    rows = []
    total = Fraction(0)
    worst = Fraction(0)
    for u, v in pairs:
        d = dist[u][v]
        est = estimate(u, v)
        if d == 0:
            if est != 0:
                raise ValueError(f"zero-distance pair ({u}, {v}) estimated {est}")
            ratio = Fraction(1)
        else:
            ratio = Fraction(est, d)
        rows.append((u, v, d, est, ratio))
        total += ratio
        if ratio > worst:
            worst = ratio
    if isinstance(slack_eps, Mapping):
        ceilings = dict(slack_eps)
    else:
        ceilings = {eps: None for eps in slack_eps}
    slack_view: dict[Fraction, tuple[Fraction, int]] = {}
    for eps, ceiling in ceilings.items():
        far = epsilon_far_pairs(g, eps, dist)
        far_max = Fraction(0)
        violations = 0
        for u, v, d, est, ratio in rows:
            if (u, v) in far or (v, u) in far:
                if ratio > far_max:
                    far_max = ratio
                if ceiling is not None and ratio > ceiling:
                    violations += 1
        slack_view[eps] = (far_max, violations)
    avg = total / len(rows) if rows else Fraction(0)
    return StretchReport(tuple(rows), worst, avg, slack_view)
