"""Agent-level broadcast simulation on an arbitrary :class:`RoadGraph`.

Random draw policy, shared by the compiled kernel and the step-by-step
reference path so both consume the generator identically:

* placement: one ``rng.random()`` per agent, vertex ``floor(u * n)``;
* each round: one ``rng.random()`` per agent in agent order, neighbour slot
  ``floor(u * deg)``. Agents whose move is forced (yellow vertex with a
  known previous vertex) still consume their draw.

Transmission never consumes randomness, so runs with and without jump-over
that share a seed follow identical trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numba import njit

from .graph import RoadGraph, VertexKind


class Status(str, Enum):
    FINISHED = "Finished"
    ROUND_CAP = "RoundCapReached"


@dataclass
class AgentState:
    cur: int
    prev: int | None = None
    informed: bool = False


@dataclass(frozen=True)
class ProcessConfig:
    k: int
    jump_over: bool = False
    max_rounds: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"need k >= 2 agents, got {self.k}")
        if self.max_rounds is not None and self.max_rounds < 1:
            raise ValueError(f"max_rounds must be >= 1, got {self.max_rounds}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def round_cap(self, n: int) -> int:
        return self.max_rounds if self.max_rounds is not None else default_max_rounds(n, self.k)


@dataclass(frozen=True)
class BroadcastOutcome:
    status: Status
    rounds: int
    informed_trace: np.ndarray

    @property
    def finished(self) -> bool:
        return self.status is Status.FINISHED

    def as_dict(self, trace=False) -> dict:
        d = {"status": self.status.value, "rounds": self.rounds,
             "informed_final": int(self.informed_trace[-1])}
        if trace:
            d["trace"] = [int(x) for x in self.informed_trace]
        return d


@dataclass(frozen=True)
class StepReport:
    positions: np.ndarray
    newly_informed: list[int]


def default_max_rounds(n: int, k: int) -> int:
    return int(math.ceil(max(10 * n * math.log(max(k, 3)) / k, 10 * n, 1000)))


# --- reference path ----------------------------------------------------------

def init_agents(g: RoadGraph, cfg: ProcessConfig, rng=None) -> tuple[list[AgentState], int]:
    """Place ``cfg.k`` agents uniformly; agent 0 and everyone sharing its vertex start informed."""
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    pos = np.minimum((rng.random(cfg.k) * g.n).astype(np.int64), g.n - 1)
    agents = [AgentState(int(p), None, bool(p == pos[0])) for p in pos]
    return agents, sum(a.informed for a in agents)


def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def transmission_closure(positions, swaps, informed) -> np.ndarray:
    """Spread the message over the interaction relation of one round.

    Agents sharing a vertex interact, as do the agent pairs in ``swaps``.
    Every connected component that contains an informed agent ends up fully
    informed. Returns a new boolean array.
    """
    positions = np.asarray(positions)
    informed = np.asarray(informed, dtype=bool)
    k = len(positions)
    parent = list(range(k))
    first_at = {}
    for a, v in enumerate(positions.tolist()):
        if v in first_at:
            parent[_find(parent, a)] = _find(parent, first_at[v])
        else:
            first_at[v] = a
    for a, b in swaps:
        ra, rb = _find(parent, a), _find(parent, b)
        if ra != rb:
            parent[ra] = rb
    hot = {_find(parent, a) for a in np.flatnonzero(informed).tolist()}
    return np.array([_find(parent, a) in hot for a in range(k)], dtype=bool)


def step(g: RoadGraph, agents: list[AgentState], cfg: ProcessConfig, rng) -> StepReport:
    """Move every agent once (simultaneously), then run transmission. Updates ``agents`` in place."""
    u = rng.random(len(agents))
    moved_along = []
    for a, ag in enumerate(agents):
        c = ag.cur
        s, deg = g.indptr[c], g.indptr[c + 1] - g.indptr[c]
        if g.kinds[c] == VertexKind.YELLOW and ag.prev is not None:
            slot = s if g.nbr[s] != ag.prev else s + 1
        else:
            slot = s + min(int(u[a] * deg), deg - 1)
        ag.prev, ag.cur = c, int(g.nbr[slot])
        moved_along.append((c, ag.cur))
    swaps = []
    if cfg.jump_over:
        by_move = {}
        for a, mv in enumerate(moved_along):
            by_move.setdefault(mv, []).append(a)
        for (x, y), movers in by_move.items():
            if x < y:
                for b in by_move.get((y, x), ()):
                    swaps.extend((a, b) for a in movers)
    positions = np.array([ag.cur for ag in agents], dtype=np.int64)
    before = np.array([ag.informed for ag in agents], dtype=bool)
    after = transmission_closure(positions, swaps, before)
    newly = np.flatnonzero(after & ~before).tolist()
    for a in newly:
        agents[a].informed = True
    return StepReport(positions, newly)


def run_reference(g: RoadGraph, cfg: ProcessConfig) -> BroadcastOutcome:
    """Slow pure-Python run built from :func:`init_agents` and :func:`step`."""
    rng = np.random.default_rng(cfg.seed)
    agents, count = init_agents(g, cfg, rng)
    trace = [count]
    cap = cfg.round_cap(g.n)
    t = 0
    while count < cfg.k and t < cap:
        t += 1
        count += len(step(g, agents, cfg, rng).newly_informed)
        trace.append(count)
    status = Status.FINISHED if count == cfg.k else Status.ROUND_CAP
    return BroadcastOutcome(status, t, np.array(trace, dtype=np.int64))


# --- compiled engine ---------------------------------------------------------

@njit(cache=True, nogil=True)
def _uf_find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True, nogil=True)
def _run_kernel(indptr, nbr, rev, yellow, k, jump_over, max_rounds, rng, trace):
    n = indptr.shape[0] - 1
    pos = np.empty(k, np.int64)
    prev = np.full(k, -1, np.int64)
    slot = np.empty(k, np.int64)
    informed = np.zeros(k, np.bool_)
    for a in range(k):
        pos[a] = min(int(rng.random() * n), n - 1)
    count = 0
    for a in range(k):
        if pos[a] == pos[0]:
            informed[a] = True
            count += 1
    trace[0] = count
    if count == k:
        return 0
    hot = np.full(n, -1, np.int64)
    root_hot = np.full(n, -1, np.int64)
    slot_mark = np.full(nbr.shape[0], -1, np.int64)
    parent = np.arange(n)
    touched = np.empty(2 * k, np.int64)
    for t in range(1, max_rounds + 1):
        for a in range(k):
            u = rng.random()
            c = pos[a]
            s = indptr[c]
            if yellow[c] and prev[a] >= 0:
                j = s if nbr[s] != prev[a] else s + 1
            else:
                deg = indptr[c + 1] - s
                j = s + min(int(u * deg), deg - 1)
            slot[a] = j
            prev[a] = c
            pos[a] = nbr[j]
        for a in range(k):
            if informed[a]:
                hot[pos[a]] = t
        if jump_over:
            for a in range(k):
                slot_mark[slot[a]] = t
            nt = 0
            for a in range(k):
                if slot_mark[rev[slot[a]]] == t:
                    x = _uf_find(parent, pos[a])
                    y = _uf_find(parent, prev[a])
                    touched[nt] = pos[a]
                    touched[nt + 1] = prev[a]
                    nt += 2
                    if x != y:
                        parent[x] = y
            if nt > 0:
                for i in range(nt):
                    v = touched[i]
                    if hot[v] == t:
                        root_hot[_uf_find(parent, v)] = t
                for i in range(nt):
                    v = touched[i]
                    if root_hot[_uf_find(parent, v)] == t:
                        hot[v] = t
                for i in range(nt):
                    parent[touched[i]] = touched[i]
        for a in range(k):
            if not informed[a] and hot[pos[a]] == t:
                informed[a] = True
                count += 1
        trace[t] = count
        if count == k:
            return t
    return max_rounds


def run_arrays(g: RoadGraph, k: int, jump_over: bool, max_rounds: int, rng) -> BroadcastOutcome:
    trace = np.zeros(max_rounds + 1, dtype=np.int64)
    yellow = g.kinds == VertexKind.YELLOW
    t = _run_kernel(g.indptr, g.nbr, g.rev, yellow, k, jump_over, max_rounds, rng, trace)
    trace = trace[: t + 1].copy()
    status = Status.FINISHED if trace[-1] == k else Status.ROUND_CAP
    return BroadcastOutcome(status, int(t), trace)


def run(g: RoadGraph, cfg: ProcessConfig) -> BroadcastOutcome:
    """Simulate until every agent is informed or the round cap is hit."""
    if g.n == 1:
        # a single vertex: every agent is co-located at placement
        return BroadcastOutcome(Status.FINISHED, 0, np.array([cfg.k], dtype=np.int64))
    rng = np.random.default_rng(cfg.seed)
    return run_arrays(g, cfg.k, cfg.jump_over, cfg.round_cap(g.n), rng)
