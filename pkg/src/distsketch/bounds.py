"""Frozen regression ceilings for measured cost and size.

Each constant is a single corpus-wide ceiling: the measured quantity
divided by its analytic shape must stay below it on every instance.
They were recorded from a calibration sweep over the full test corpus
(paths, grids, Erdos-Renyi n in {32..256}, 20 seeds per configuration)
with roughly 2x headroom over the observed maxima, and are updated only
by hand; tests treat them as hard ceilings, never as tunables to loosen
when a run regresses.

Shapes (n nodes, m edges, S shortest-path diameter, D hop diameter,
natural logs):

    tz rounds      <= C * k * n^(1/k) * S * ln n        (observed 0.28)
    tz messages    <= C * k * n^(1/k) * S * m * ln n    (observed 0.16)
    tz label words <= C * k * n^(1/k) * ln n            (observed 2.60)
    slack3 rounds  <= C * S * (1/eps) * ln n            (observed 1.48)
    cdg words      <= C * k * ((1/eps) ln n)^(1/k) * ln n  (observed 5.20)
    gd rounds      <= C * S * ln^4 n                     (observed 0.44)
    gd messages    <= C * S * m * ln^4 n                 (observed 0.33)
    gd words       <= C * ln^4 n                         (observed 4.87)
    gd avg stretch <= A                                  (observed 1.05)
    detect lag     <= C * (D + 1) rounds per pass beyond quiescence
                                                         (observed 10.9)
"""

TZ_ROUNDS_C = 0.5
TZ_MSGS_C = 0.3
TZ_LABEL_WORDS_C = 4.0
SLACK3_ROUNDS_C = 2.5
CDG_WORDS_C = 8.0
GD_ROUNDS_C = 0.8
GD_MSGS_C = 0.6
GD_WORDS_C = 8.0
GD_AVG_STRETCH_A = 2.0
DETECT_LAG_C = 16.0
