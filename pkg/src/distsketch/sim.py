"""Deterministic synchronous round executor with per-edge message budgets.

Each round every stepped process consumes its inbox (messages sent in the
previous round) and emits at most one data envelope and one control
envelope per incident edge. Node iteration is in ascending id order and
all state is confined to the processes, so runs are bit-reproducible.

The executor skips processes that declared themselves idle and have no
incoming traffic; a process that needs to act in a silent future round
announces it through ``wake_round``. Because handlers receive the current
round number (which a node in a synchronous network can always count
locally), the skipping is invisible to protocol logic.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

from .graphs import WeightedGraph

# Envelope kinds. ANNOUNCE and PIECE ride the data channel, the rest ride
# the control channel; an edge carries at most one of each per round.
ANNOUNCE = 0
PIECE = 1
ECHO = 2
COMPLETE = 3
START = 4
ATTACH = 5

_KIND_NAMES = ("announce", "piece", "echo", "complete", "start", "attach")
_FIRST_CONTROL = ECHO


class Envelope(NamedTuple):
    """One per-edge message; at most three words including the tag.

    Field use by kind: ANNOUNCE/ECHO -> (source, distance);
    PIECE -> (payload word, unused); START -> (phase, start round);
    COMPLETE/ATTACH -> no payload.
    """

    kind: int
    a: int = 0
    b: int = 0

    @property
    def is_control(self) -> bool:
        return self.kind >= _FIRST_CONTROL


def announce(source: int, dist: int) -> Envelope:
    return Envelope(ANNOUNCE, source, dist)


def echo_of(env: Envelope) -> Envelope:
    """Echo carrying a copy of the announce it answers."""
    return Envelope(ECHO, env.a, env.b)


class RoundLimitError(RuntimeError):
    """The run hit its round limit before quiescence; metrics attached."""

    def __init__(self, message: str, metrics: "RunMetrics"):
        super().__init__(message)
        self.metrics = metrics


class PhaseMetrics(NamedTuple):
    phase: str
    rounds: int
    data_msgs: int
    control_msgs: int


@dataclass
class RunMetrics:
    rounds: int = 0
    data_msgs: int = 0
    control_msgs: int = 0
    per_phase: tuple[PhaseMetrics, ...] = ()
    max_nonempty_queues: int = 0
    by_kind: dict[str, int] = field(default_factory=dict)

    def check_totals(self) -> None:
        assert self.rounds == sum(p.rounds for p in self.per_phase)
        assert self.data_msgs == sum(p.data_msgs for p in self.per_phase)
        assert self.control_msgs == sum(p.control_msgs for p in self.per_phase)

    def merged_with(self, other: "RunMetrics") -> "RunMetrics":
        by_kind = dict(self.by_kind)
        for name, c in other.by_kind.items():
            by_kind[name] = by_kind.get(name, 0) + c
        return RunMetrics(
            self.rounds + other.rounds,
            self.data_msgs + other.data_msgs,
            self.control_msgs + other.control_msgs,
            self.per_phase + other.per_phase,
            max(self.max_nonempty_queues, other.max_nonempty_queues),
            by_kind,
        )


class NodeProcess:
    """Per-node handler pair; state must stay local to the node.

    ``on_round`` returns a map neighbor -> tuple of envelopes (at most one
    data plus one control). ``idle`` tells the executor the process has
    nothing queued; ``done`` marks the protocol finished at this node;
    ``wake_round`` requests a step in a specific future round.
    """

    idle: bool = True
    done: bool = True
    wake_round: int | None = None
    queue_load: int = 0

    def on_init(
        self,
        uid: int,
        edges: tuple[tuple[int, int], ...],
        params: dict | None,
    ) -> None:
        raise NotImplementedError

    def on_round(
        self, rnd: int, inbox: list[tuple[int, Envelope]]
    ) -> dict[int, tuple[Envelope, ...]] | None:
        raise NotImplementedError


_EMPTY_INBOX: list[tuple[int, Envelope]] = []


class Simulator:
    """Drives a factory-built process per node round by round."""

    def __init__(
        self,
        graph: WeightedGraph,
        factory: Callable[[int], NodeProcess],
        params: dict | None = None,
    ):
        self.graph = graph
        base = {"n": graph.n}
        if params:
            base.update(params)
        self.procs: list[NodeProcess] = []
        for u in range(graph.n):
            p = factory(u)
            p.on_init(u, graph.adj[u], base)
            self.procs.append(p)
        self._nbr_sets = [frozenset(v for v, _ in es) for es in graph.adj]
        self.round = 0
        self._inbox: dict[int, list[tuple[int, Envelope]]] = {}
        self._active: set[int] = set(range(graph.n))
        self._wakes: list[tuple[int, int]] = []
        for u, p in enumerate(self.procs):
            if p.wake_round is not None:
                heapq.heappush(self._wakes, (p.wake_round, u))
        self._kind_counts = [0] * len(_KIND_NAMES)
        self.max_nonempty_queues = 0

    # -- counters ----------------------------------------------------------

    @property
    def data_msgs(self) -> int:
        return self._kind_counts[ANNOUNCE] + self._kind_counts[PIECE]

    @property
    def control_msgs(self) -> int:
        return sum(self._kind_counts[_FIRST_CONTROL:])

    def counters(self) -> tuple[int, int, int]:
        return (self.round, self.data_msgs, self.control_msgs)

    @property
    def quiescent(self) -> bool:
        return not self._inbox and not self._active and not self._wakes

    @property
    def all_done(self) -> bool:
        return all(p.done for p in self.procs)

    def activate_all(self) -> None:
        self._active = set(range(self.graph.n))

    # -- stepping ----------------------------------------------------------

    def step(self) -> None:
        self.round += 1
        rnd = self.round
        inboxes = self._inbox
        self._inbox = {}
        run_ids = self._active.union(inboxes)
        while self._wakes and self._wakes[0][0] <= rnd:
            run_ids.add(heapq.heappop(self._wakes)[1])
        procs = self.procs
        counts = self._kind_counts
        nxt = self._inbox
        maxq = self.max_nonempty_queues
        for u in sorted(run_ids):
            p = procs[u]
            out = p.on_round(rnd, inboxes.get(u, _EMPTY_INBOX))
            if out:
                nbrs = self._nbr_sets[u]
                for v, envs in out.items():
                    if v not in nbrs:
                        raise AssertionError(f"{u} sent to non-neighbor {v}")
                    if len(envs) > 1:
                        assert len(envs) == 2 and (
                            envs[0].is_control != envs[1].is_control
                        ), "edge capacity exceeded"
                    for env in envs:
                        counts[env.kind] += 1
                        box = nxt.get(v)
                        if box is None:
                            nxt[v] = [(u, env)]
                        else:
                            box.append((u, env))
            if p.idle:
                self._active.discard(u)
            else:
                self._active.add(u)
            w = p.wake_round
            if w is not None and w > rnd:
                heapq.heappush(self._wakes, (w, u))
            q = p.queue_load
            if q > maxq:
                maxq = q
        self.max_nonempty_queues = maxq

    def run_until_quiescent(self, limit: int) -> None:
        """Step until nothing is pending anywhere, or fail at ``limit``."""
        while not self.quiescent:
            if self.round >= limit:
                raise RoundLimitError(
                    f"round limit exceeded ({limit})", self.metrics()
                )
            self.step()

    def metrics(self, per_phase: tuple[PhaseMetrics, ...] | None = None) -> RunMetrics:
        echoes = self._kind_counts[ECHO]
        assert echoes <= self._kind_counts[ANNOUNCE], "echo/announce imbalance"
        if per_phase is None:
            per_phase = (
                PhaseMetrics("run", self.round, self.data_msgs, self.control_msgs),
            )
        by_kind = {
            name: c for name, c in zip(_KIND_NAMES, self._kind_counts) if c
        }
        return RunMetrics(
            self.round,
            self.data_msgs,
            self.control_msgs,
            per_phase,
            self.max_nonempty_queues,
            by_kind,
        )


def run(
    graph: WeightedGraph,
    factory: Callable[[int], NodeProcess],
    round_limit: int,
    params: dict | None = None,
) -> tuple[list[NodeProcess], RunMetrics]:
    """Execute to quiescence of all processes within ``round_limit``.

    Messages sent in round t are delivered at the start of round t+1; the
    run ends once no messages are in flight and every process is idle and
    reports done.
    """
    if round_limit <= 0:
        raise ValueError("round_limit must be positive")
    sim = Simulator(graph, factory, params)
    while True:
        if sim.round >= round_limit:
            raise RoundLimitError(
                f"round limit exceeded ({round_limit})", sim.metrics()
            )
        sim.step()
        if sim.quiescent and sim.all_done:
            break
    return sim.procs, sim.metrics()
