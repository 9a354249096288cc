import math
from fractions import Fraction

import pytest

from distsketch import (
    IncompatibleSketchError,
    LevelAssignment,
    Rng,
    all_pairs,
    build_tz_sketches,
    centralized_tz,
    stretch_report,
    tz_estimate,
)
from distsketch.tz import sample_hierarchy


def independent_estimate(g, dist, levels: LevelAssignment, u: int, v: int) -> int:
    """Re-derive the query procedure from exact distances and levels only."""
    n = g.n
    lv = levels.levels
    k = levels.k

    def pivot(x, i):
        return min((dist[x][w], w) for w in range(n) if lv[w] >= i)

    def bound(x, i):
        cands = [(dist[x][w], w) for w in range(n) if lv[w] >= i]
        return min(cands) if cands else (math.inf, math.inf)

    def in_bunch(w, i, x):
        return lv[w] == i and (dist[x][w], w) < bound(x, i + 1)

    for i in range(k):
        cands = []
        du, pu = pivot(u, i)
        if in_bunch(pu, i, v):
            cands.append(du + dist[v][pu])
        dv, pv = pivot(v, i)
        if in_bunch(pv, i, u):
            cands.append(dv + dist[u][pv])
        if cands:
            return min(cands)
    raise AssertionError("no witnessing level")


def test_self_query_is_zero(er32):
    labels, _ = build_tz_sketches(er32, 2, Rng(1))
    for u in range(er32.n):
        assert tz_estimate(labels[u], labels[u]) == 0


def test_k1_query_exact_on_p3(p3):
    labels, _ = build_tz_sketches(p3, 1, Rng(1))
    assert tz_estimate(labels[0], labels[2]) == 2


def test_p4_query_matches_independent_procedure(p4):
    rng = Rng(11)
    levels = sample_hierarchy(p4.n, 2, rng)
    labels, _ = build_tz_sketches(p4, 2, rng)
    dist = all_pairs(p4)
    est = tz_estimate(labels[0], labels[3])
    assert dist[0][3] <= est <= 3 * dist[0][3]
    assert est == independent_estimate(p4, dist, levels, 0, 3)


def test_query_matches_independent_procedure_er32(er32, er32_dist):
    levels = sample_hierarchy(er32.n, 3, Rng(17))
    labels = centralized_tz(er32, levels, er32_dist)
    for u in range(0, er32.n, 3):
        for v in range(u + 1, er32.n, 2):
            want = independent_estimate(er32, er32_dist, levels, u, v)
            assert tz_estimate(labels[u], labels[v]) == want


def test_query_symmetric_exhaustive(er64, er64_dist):
    labels, _ = build_tz_sketches(er64, 2, Rng(23))
    for u in range(er64.n):
        for v in range(u + 1, er64.n):
            assert tz_estimate(labels[u], labels[v]) == tz_estimate(
                labels[v], labels[u]
            )


def test_query_rejects_mismatched_k(er32):
    l1, _ = build_tz_sketches(er32, 1, Rng(1))
    l2, _ = build_tz_sketches(er32, 2, Rng(1))
    with pytest.raises(IncompatibleSketchError):
        tz_estimate(l1[0], l2[1])


def test_stretch_report_exact_estimator(p4):
    dist = all_pairs(p4)
    rep = stretch_report(p4, lambda u, v: dist[u][v], dist=dist)
    assert rep.max_stretch == 1
    assert rep.avg_stretch == 1
    assert len(rep.per_pair) == 6


def test_stretch_report_doubling_estimator(p4):
    dist = all_pairs(p4)
    rep = stretch_report(p4, lambda u, v: 2 * dist[u][v], dist=dist)
    assert rep.max_stretch == 2
    assert rep.avg_stretch == 2


def test_stretch_report_tz_k2_within_ceiling(er32, er32_dist):
    labels, _ = build_tz_sketches(er32, 2, Rng(2))
    rep = stretch_report(
        er32,
        lambda u, v: tz_estimate(labels[u], labels[v]),
        slack_eps={Fraction(1, 4): Fraction(3)},
        dist=er32_dist,
    )
    assert all(r >= 1 for *_, r in rep.per_pair)
    assert rep.max_stretch <= 3
    far_max, violations = rep.slack_view[Fraction(1, 4)]
    assert violations == 0
    assert far_max <= rep.max_stretch


def test_stretch_report_counts_violations(p4):
    dist = all_pairs(p4)
    eps = Fraction(1, 4)
    rep = stretch_report(
        p4,
        lambda u, v: 5 * dist[u][v],
        slack_eps={eps: Fraction(3)},
        dist=dist,
    )
    far_max, violations = rep.slack_view[eps]
    assert far_max == 5
    assert violations > 0


def test_stretch_report_sampling_deterministic(er32, er32_dist):
    labels, _ = build_tz_sketches(er32, 2, Rng(2))
    est = lambda u, v: tz_estimate(labels[u], labels[v])
    r1 = stretch_report(er32, est, sample=40, rng=Rng(77), dist=er32_dist)
    r2 = stretch_report(er32, est, sample=40, rng=Rng(77), dist=er32_dist)
    assert r1 == r2
    assert len(r1.per_pair) == 40
