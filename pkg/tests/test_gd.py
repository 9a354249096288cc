import math
from fractions import Fraction

from distsketch import Rng, all_pairs, build_gd_sketches, epsilon_far_pairs
from distsketch.gd import gd_level_params
from distsketch.query import cdg_estimate, gd_estimate


def test_level_parameters_cover_all_powers_of_two():
    params = gd_level_params(256)
    assert len(params) == 8
    assert [eps for eps, _ in params] == [Fraction(1, 2**i) for i in range(1, 9)]
    for i, (eps, k) in enumerate(params, start=1):
        assert 1 <= k <= i


def test_gd_on_p3_is_exact(p3):
    sketches, _ = build_gd_sketches(p3, Rng(1))
    assert len(sketches[0].levels) == 2
    dist = all_pairs(p3)
    for u in range(3):
        for v in range(3):
            assert gd_estimate(sketches[u], sketches[v]) == dist[u][v]


def test_gd_estimate_is_min_over_levels_and_lower_bounded(er32, er32_dist):
    sketches, _ = build_gd_sketches(er32, Rng(2))
    for u in range(er32.n):
        for v in range(u + 1, er32.n):
            per_level = [
                cdg_estimate(cu, cv)
                for (_, _, cu), (_, _, cv) in zip(
                    sketches[u].levels, sketches[v].levels
                )
            ]
            est = gd_estimate(sketches[u], sketches[v])
            assert est == min(per_level)
            assert est >= er32_dist[u][v]


def test_gd_graceful_degradation_per_level(er64, er64_dist):
    sketches, _ = build_gd_sketches(er64, Rng(3))
    for eps, k in gd_level_params(er64.n):
        ceiling = 8 * k - 1
        for u, v in epsilon_far_pairs(er64, eps, er64_dist):
            est = gd_estimate(sketches[u], sketches[v])
            assert est <= ceiling * er64_dist[u][v]


def test_gd_worst_and_average_stretch(er64, er64_dist):
    from distsketch import bounds

    sketches, _ = build_gd_sketches(er64, Rng(4))
    k_max = gd_level_params(er64.n)[-1][1]
    ratios = [
        Fraction(gd_estimate(sketches[u], sketches[v]), er64_dist[u][v])
        for u in range(er64.n)
        for v in range(u + 1, er64.n)
    ]
    assert max(ratios) <= 8 * k_max - 1
    assert sum(ratios) / len(ratios) <= bounds.GD_AVG_STRETCH_A


def test_gd_deterministic_and_metrics_accumulate(er32):
    s1, m1 = build_gd_sketches(er32, Rng(5))
    s2, m2 = build_gd_sketches(er32, Rng(5))
    assert s1 == s2
    assert m1 == m2
    m1.check_totals()
    assert len(m1.per_phase) >= len(gd_level_params(er32.n)) * 3


def test_gd_cost_envelope(er64):
    from distsketch import bounds
    from distsketch import shortest_path_diameter

    _, m = build_gd_sketches(er64, Rng(6))
    S = shortest_path_diameter(er64)
    ln4 = math.log(er64.n) ** 4
    assert m.rounds <= bounds.GD_ROUNDS_C * S * ln4
    assert m.data_msgs <= bounds.GD_MSGS_C * S * er64.m * ln4


def test_gd_sketch_words_envelope(er64):
    from distsketch import bounds

    sketches, _ = build_gd_sketches(er64, Rng(7))
    ceiling = bounds.GD_WORDS_C * math.log(er64.n) ** 4
    assert all(s.words() <= ceiling for s in sketches.values())
