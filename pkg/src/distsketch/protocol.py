"""Message-passing machinery shared by every sketch construction.

One process class covers the three pass kinds that the builders compose:

* ``multi``   — multi-source distance relaxation with a per-source send
  queue served round-robin, optionally cut off by the running
  nearest-sampled-node bound carried over from earlier passes;
* ``nearest`` — single-slot relaxation that finds each node's closest
  member of a designated set, together with the relaxation-tree parent;
* ``adopt``   — word-by-word streaming of each set member's finished
  label down its relaxation tree.

Pass progression is driven either externally (the harness knows a round
budget and restarts everyone together) or internally over a BFS overlay:
every received announcement is eventually answered by an echo, a node
whose announcement tree has fully echoed is complete, completions
converge up the overlay, and the root rebroadcasts the next start round.

All comparisons between distances use the global (distance, node id)
lexicographic tie-break so results match the exact reference
construction entry for entry.
"""

from __future__ import annotations

from bisect import bisect_right, insort
from collections import deque
from dataclasses import dataclass
from typing import Callable

from .graphs import WeightedGraph
from .sim import (
    ANNOUNCE,
    ATTACH,
    COMPLETE,
    ECHO,
    PIECE,
    START,
    Envelope,
    NodeProcess,
    PhaseMetrics,
    RunMetrics,
    Simulator,
)
from .sketches import TzLabel

INF = float("inf")

MULTI = "multi"
NEAREST = "nearest"
ADOPT = "adopt"

FIXED = "fixed_S"
DETECT = "detect"
MODES = (FIXED, DETECT)


@dataclass(frozen=True)
class PhaseSpec:
    label: str
    kind: str
    level: int = -1
    bounded: bool = False
    budget: int = 0


@dataclass(frozen=True)
class BfsOverlay:
    """Breadth-first spanning tree with ascending-id tie-break."""

    root: int
    parent: tuple[int, ...]
    children: tuple[tuple[int, ...], ...]
    depth: tuple[int, ...]
    height: int


def termination_overlay(g: WeightedGraph, root: int) -> BfsOverlay:
    """Unweighted BFS tree used to route COMPLETE up and START down."""
    if not 0 <= root < g.n:
        raise ValueError("root not in graph")
    parent = [-1] * g.n
    depth = [-1] * g.n
    depth[root] = 0
    frontier = [root]
    while frontier:
        nxt = []
        for u in frontier:
            for v, _ in g.adj[u]:
                if depth[v] < 0:
                    depth[v] = depth[u] + 1
                    parent[v] = u
                    nxt.append(v)
        frontier = sorted(nxt)
    children: list[list[int]] = [[] for _ in range(g.n)]
    for v, p in enumerate(parent):
        if p >= 0:
            children[p].append(v)
    return BfsOverlay(
        root,
        tuple(parent),
        tuple(tuple(sorted(cs)) for cs in children),
        tuple(depth),
        max(depth),
    )


def encode_label_words(label: TzLabel) -> list[int]:
    """Flat word list streamed during adoption passes."""
    words = [label.k]
    for node, d in label.pivots:
        words.append(node)
        words.append(d)
    words.append(len(label.bunch))
    for node in sorted(label.bunch):
        lv, d = label.bunch[node]
        words.extend((node, lv, d))
    return words


def decode_label_words(owner: int, words: list[int]) -> TzLabel:
    k = words[0]
    pos = 1
    pivots = []
    for _ in range(k):
        pivots.append((words[pos], words[pos + 1]))
        pos += 2
    count = words[pos]
    pos += 1
    bunch: dict[int, tuple[int, int]] = {}
    for _ in range(count):
        bunch[words[pos]] = (words[pos + 1], words[pos + 2])
        pos += 3
    if pos != len(words):
        raise ValueError("trailing words in label stream")
    return TzLabel(owner, k, tuple(pivots), bunch)


class SketchProcess(NodeProcess):
    """Per-node protocol state machine over a fixed pass plan."""

    def __init__(
        self,
        level: int,
        in_net: bool,
        plan: tuple[PhaseSpec, ...],
        mode: str,
        parent: int = -1,
        children: tuple[int, ...] = (),
        height: int = 0,
        is_root: bool = False,
    ):
        self.level = level
        self.in_net = in_net
        self._plan = plan
        self._detect = mode == DETECT
        self._parent = parent
        self._children = children
        self._height = height
        self._is_root = is_root
        self.done = False
        self.idle = True
        self.wake_round: int | None = None
        self.queue_load = 0

    # -- simulator interface -------------------------------------------------

    def on_init(self, uid, edges, params):
        self.uid = uid
        self._nbrs = tuple(v for v, _ in edges)
        self._w = {v: w for v, w in edges}
        self._deg = len(edges)
        # accumulated results
        self.bunch: dict[int, tuple[int, int]] = {}
        self.nearest_origin = uid if self.in_net else -1
        self.nearest_dist: int | float = 0 if self.in_net else INF
        self.cell_parent: int = -1
        self.adopted_words: list[int] = []
        # phase machinery
        self._phase_idx = -1
        self._spec: PhaseSpec | None = None
        self._phase_start = 0
        self._announced = -1
        self._wake: int | None = None
        self._ctrlq: dict[int, deque[Envelope]] = {}
        self._ctrl_count = 0
        self._reset_pass_state()
        if self._detect and self._is_root:
            self._wake = 1
            self.wake_round = 1

    def _reset_pass_state(self) -> None:
        self._dp: dict[int, int] = {}
        self._queued: set[int] = set()
        self._pending: list[int] = []
        self._cursor = 0
        self._announce_self = False
        self._bound_d: int | float = INF
        self._bound_id: int | float = INF
        self._trigger: dict[int, tuple[int, int, int]] = {}
        self._near_queued = False
        self._near_trigger: tuple[int, int, int] | None = None
        self._inst: dict[tuple[int, int], list] = {}
        self._cluster_done = True
        self._complete_sent = False
        self._child_complete = 0
        self._stream: list[int] = []
        self._stream_pos = 0
        self._cells: list[int] = []
        self._cells_ready = False
        self._expected = -1
        self._recv_words: list[int] = []
        self._fwd: Envelope | None = None

    # -- phase control ---------------------------------------------------------

    def force_enter(self, phase: int, start_round: int) -> None:
        """Harness-driven transition used when budgets are known."""
        self._enter(phase, start_round)

    @property
    def announced_phase(self) -> int:
        return self._announced

    def _enter(self, phase: int, rnd: int) -> None:
        self._fold()
        self._phase_idx = phase
        if phase >= len(self._plan):
            self._spec = None
            self.done = True
            return
        spec = self._plan[phase]
        self._spec = spec
        self._phase_start = rnd
        if spec.kind == MULTI:
            if spec.bounded:
                bd, bi = INF, INF
                for src, (_, d) in self.bunch.items():
                    if d < bd or (d == bd and src < bi):
                        bd, bi = d, src
                self._bound_d, self._bound_id = bd, bi
            if self.level == spec.level:
                self._announce_self = True
                if (0, self.uid) < (self._bound_d, self._bound_id):
                    self.bunch[self.uid] = (spec.level, 0)
                self._cluster_done = False
        elif spec.kind == NEAREST:
            if self.in_net:
                self._announce_self = True
                self._cluster_done = False
        else:  # ADOPT
            if self.in_net:
                words = encode_label_words(self.tz_label(self._net_k()))
                self._stream = [len(words)] + words
                self._cluster_done = False
            else:
                if self.cell_parent >= 0:
                    self._push_ctrl(self.cell_parent, Envelope(ATTACH))
                self._cluster_done = False
            self._wake = rnd + 1
            self.wake_round = rnd + 1

    def _net_k(self) -> int:
        return 1 + max(s.level for s in self._plan if s.kind == MULTI)

    def _fold(self) -> None:
        spec = self._spec
        if spec is None:
            return
        assert not self._inst, "outstanding echoes at pass end"
        if spec.kind == MULTI:
            lv = spec.level
            bunch = self.bunch
            for src, d in self._dp.items():
                bunch[src] = (lv, d)
        self._reset_pass_state()

    def finalize_label(self) -> TzLabel | None:
        """Label adopted from (or owned by) the nearest set member."""
        if self.in_net:
            return self.tz_label(self._net_k())
        if not self.adopted_words:
            return None
        return decode_label_words(self.nearest_origin, self.adopted_words)

    def tz_label(self, k: int) -> TzLabel:
        per_level: dict[int, tuple[int, int]] = {}
        for src, (lv, d) in self.bunch.items():
            cur = per_level.get(lv)
            if cur is None or (d, src) < cur:
                per_level[lv] = (d, src)
        pivots: list[tuple[int, int]] = [(-1, -1)] * k
        best: tuple[int, int] | None = None
        for i in range(k - 1, -1, -1):
            cand = per_level.get(i)
            if cand is not None and (best is None or cand < best):
                best = cand
            assert best is not None, f"no pivot at level {i}"
            pivots[i] = (best[1], best[0])
        return TzLabel(self.uid, k, tuple(pivots), dict(self.bunch))

    # -- control helpers ---------------------------------------------------------

    def _push_ctrl(self, to: int, env: Envelope) -> None:
        q = self._ctrlq.get(to)
        if q is None:
            q = self._ctrlq[to] = deque()
        q.append(env)
        self._ctrl_count += 1

    def _resolve_instance(self, key: tuple[int, int]) -> None:
        rec = self._inst[key]
        rec[0] -= 1
        if rec[0] == 0:
            del self._inst[key]
            trig = rec[1]
            if trig is None:
                self._cluster_done = True
            else:
                self._push_ctrl(trig[0], Envelope(ECHO, trig[1], trig[2]))

    def _transition(self, phase: int, rnd: int) -> None:
        self._announced = phase
        r0 = rnd + self._height + 2
        env = Envelope(START, phase, r0)
        for c in self._children:
            self._push_ctrl(c, env)
        self._wake = r0
        self.wake_round = r0

    # -- round handler ------------------------------------------------------------

    def on_round(self, rnd, inbox):
        if self._wake is not None and rnd >= self._wake:
            self._wake = None
            self.wake_round = None
            if self._detect and self._is_root and self._announced < 0:
                self._transition(0, rnd)
            elif self._announced > self._phase_idx:
                self._enter(self._announced, rnd)
        spec = self._spec
        detect = self._detect
        nearest = spec is not None and spec.kind == NEAREST
        if inbox:
            for w, env in inbox:
                kind = env.kind
                if kind == ANNOUNCE:
                    if nearest:
                        self._recv_nearest(w, env)
                    else:
                        self._recv_announce(w, env)
                elif kind == PIECE:
                    self._recv_piece(w, env)
                elif kind == ECHO:
                    self._resolve_instance((env.a, env.b))
                elif kind == COMPLETE:
                    self._child_complete += 1
                elif kind == START:
                    self._announced = env.a
                    for c in self._children:
                        self._push_ctrl(c, env)
                    self._wake = env.b
                    self.wake_round = env.b
                else:  # ATTACH
                    self._cells.append(w)

        out: dict[int, tuple[Envelope, ...]] | None = None
        busy = False
        if spec is not None:
            if spec.kind == ADOPT:
                out, busy = self._send_adopt(rnd)
            else:
                env = None
                if self._announce_self:
                    self._announce_self = False
                    env = Envelope(ANNOUNCE, self.uid, 0)
                    if detect:
                        self._inst[(self.uid, 0)] = [self._deg, None]
                elif nearest:
                    if self._near_queued:
                        self._near_queued = False
                        env = Envelope(
                            ANNOUNCE, self.nearest_origin, self.nearest_dist
                        )
                        if detect:
                            self._inst[(env.a, env.b)] = [
                                self._deg,
                                self._near_trigger,
                            ]
                            self._near_trigger = None
                elif self._pending:
                    pending = self._pending
                    idx = bisect_right(pending, self._cursor)
                    if idx == len(pending):
                        idx = 0
                    src = pending.pop(idx)
                    self._queued.discard(src)
                    self._cursor = src
                    env = Envelope(ANNOUNCE, src, self._dp[src])
                    if detect:
                        self._inst[(env.a, env.b)] = [
                            self._deg,
                            self._trigger.pop(src, None),
                        ]
                if env is not None:
                    out = dict.fromkeys(self._nbrs, (env,))
                busy = bool(
                    self._pending or self._announce_self or self._near_queued
                )

        if self._ctrl_count:
            if out is None:
                out = {}
            drained = []
            for v, q in self._ctrlq.items():
                c = q.popleft()
                self._ctrl_count -= 1
                if not q:
                    drained.append(v)
                prev = out.get(v)
                out[v] = (prev[0], c) if prev else (c,)
            for v in drained:
                del self._ctrlq[v]

        if detect and self._spec is not None and not self._complete_sent:
            if self._cluster_done and self._child_complete == len(self._children):
                self._complete_sent = True
                if self._is_root:
                    self._transition(self._phase_idx + 1, rnd)
                else:
                    self._push_ctrl(self._parent, Envelope(COMPLETE))

        self.queue_load = len(self._pending) + (1 if self._near_queued else 0)
        self.idle = not (busy or self._ctrl_count)
        return out

    # -- receive paths -----------------------------------------------------------

    def _recv_announce(self, w: int, env: Envelope) -> None:
        src = env.a
        if src == self.uid:
            if self._detect:
                self._push_ctrl(w, Envelope(ECHO, env.a, env.b))
            return
        a = env.b + self._w[w]
        dp = self._dp
        cur = dp.get(src, INF)
        if a < cur and (
            a < self._bound_d or (a == self._bound_d and src < self._bound_id)
        ):
            if self._detect:
                if src in self._queued:
                    old = self._trigger[src]
                    self._push_ctrl(old[0], Envelope(ECHO, old[1], old[2]))
                self._trigger[src] = (w, env.a, env.b)
            dp[src] = a
            if src not in self._queued:
                self._queued.add(src)
                insort(self._pending, src)
        elif self._detect:
            self._push_ctrl(w, Envelope(ECHO, env.a, env.b))

    def _recv_nearest(self, w: int, env: Envelope) -> None:
        origin = env.a
        a = env.b + self._w[w]
        if (a, origin) < (self.nearest_dist, self.nearest_origin):
            if self._detect:
                if self._near_queued and self._near_trigger is not None:
                    old = self._near_trigger
                    self._push_ctrl(old[0], Envelope(ECHO, old[1], old[2]))
                self._near_trigger = (w, env.a, env.b)
            self.nearest_dist = a
            self.nearest_origin = origin
            self.cell_parent = w
            self._near_queued = True
        elif self._detect:
            self._push_ctrl(w, Envelope(ECHO, env.a, env.b))

    def _recv_piece(self, w: int, env: Envelope) -> None:
        words = self._recv_words
        words.append(env.a)
        if self._expected < 0:
            self._expected = env.a
        self._fwd = env
        if len(words) == self._expected + 1:
            self.adopted_words = words[1:]
            self._cluster_done = True

    # -- adoption pass -------------------------------------------------------------

    def _send_adopt(self, rnd: int):
        out: dict[int, tuple[Envelope, ...]] | None = None
        busy = False
        if not self._cells_ready:
            if rnd - self._phase_start >= 1:
                self._cells_ready = True
                self._cells.sort()
            else:
                return None, True
        if self.in_net:
            if not self._cells:
                self._stream_pos = len(self._stream)
                self._cluster_done = True
            elif self._stream_pos < len(self._stream):
                env = Envelope(PIECE, self._stream[self._stream_pos])
                self._stream_pos += 1
                out = dict.fromkeys(self._cells, (env,))
                busy = self._stream_pos < len(self._stream)
                if not busy:
                    self._cluster_done = True
        elif self._fwd is not None:
            env = self._fwd
            self._fwd = None
            if self._cells:
                out = dict.fromkeys(self._cells, (env,))
        return out, busy


# -- build drivers ------------------------------------------------------------------


def run_fixed(
    graph: WeightedGraph,
    factory: Callable[[int], SketchProcess],
    plan: tuple[PhaseSpec, ...],
) -> tuple[list[SketchProcess], RunMetrics]:
    """Run one pass at a time: start everyone together, wait for quiescence.

    Each pass carries its own round budget; exceeding it raises with the
    partial metrics attached.
    """
    sim = Simulator(graph, factory)
    phases = []
    last = sim.counters()
    for idx, spec in enumerate(plan):
        for p in sim.procs:
            p.force_enter(idx, sim.round + 1)
        sim.activate_all()
        sim.run_until_quiescent(last[0] + spec.budget)
        now = sim.counters()
        phases.append(
            PhaseMetrics(spec.label, now[0] - last[0], now[1] - last[1], now[2] - last[2])
        )
        last = now
    for p in sim.procs:
        p.force_enter(len(plan), sim.round + 1)
    return sim.procs, sim.metrics(tuple(phases))


def run_detect(
    graph: WeightedGraph,
    factory: Callable[[int], SketchProcess],
    plan: tuple[PhaseSpec, ...],
    root: int,
    round_limit: int,
) -> tuple[list[SketchProcess], RunMetrics]:
    """Run with in-protocol phase transitions; attribute metrics per pass.

    Pass boundaries are cut where the overlay root announces each start,
    so a pass's span includes its start broadcast and completion lag.
    """
    sim = Simulator(graph, factory)
    root_proc = sim.procs[root]
    marks: dict[int, tuple[int, int, int]] = {}
    seen = -1
    while not (sim.quiescent and sim.all_done):
        if sim.round >= round_limit:
            raise RoundLimitError(f"round limit exceeded ({round_limit})", sim.metrics())
        sim.step()
        if root_proc.announced_phase != seen:
            seen = root_proc.announced_phase
            marks[seen] = sim.counters()
    phases = []
    prev = (0, 0, 0)
    for idx, spec in enumerate(plan):
        cut = marks.get(idx + 1, sim.counters()) if idx + 1 < len(plan) else None
        if cut is None:
            cut = sim.counters()
        phases.append(
            PhaseMetrics(
                spec.label, cut[0] - prev[0], cut[1] - prev[1], cut[2] - prev[2]
            )
        )
        prev = cut
    return sim.procs, sim.metrics(tuple(phases))
