"""Sketch record types shared by the builders, query engine, and codecs.

Word accounting treats every stored node id, level index, count, or
distance as one word, matching the message-size accounting of the
simulator.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


class IncompatibleSketchError(ValueError):
    """Two sketches cannot be combined into a distance estimate."""


@dataclass(frozen=True)
class TzLabel:
    """Per-node sketch: one pivot per level plus the stored-node table.

    ``pivots[i]`` is the (node, distance) pair of the closest level-i
    sampled node under the global (distance, id) tie-break. ``bunch`` maps
    a stored node to its (level, exact distance).
    """

    owner: int
    k: int
    pivots: tuple[tuple[int, int], ...]
    bunch: dict[int, tuple[int, int]]

    def words(self) -> int:
        return 2 + 2 * self.k + 3 * len(self.bunch)


@dataclass(frozen=True)
class DensityNet:
    eps: Fraction
    members: frozenset[int]

    def sorted_members(self) -> tuple[int, ...]:
        return tuple(sorted(self.members))


@dataclass(frozen=True)
class SlackSketch3:
    """Exact distances from the owner to every net member."""

    owner: int
    table: dict[int, int]

    def words(self) -> int:
        return 2 + 2 * len(self.table)


@dataclass(frozen=True)
class CdgSketch:
    """Nearest net member plus that member's label over the net metric."""

    owner: int
    nearest: int
    nearest_dist: int
    net_label: TzLabel

    def words(self) -> int:
        return 3 + self.net_label.words()


@dataclass(frozen=True)
class GdSketch:
    """Stack of slack sketches, one per power-of-two slack level."""

    owner: int
    levels: tuple[tuple[Fraction, int, CdgSketch], ...]

    def words(self) -> int:
        return 1 + sum(1 + c.words() for _, _, c in self.levels)
