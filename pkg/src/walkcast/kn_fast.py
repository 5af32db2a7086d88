"""Fast exact simulation on the complete graph, and the phase-chain models.

On ``K_n`` a move is a uniform draw over the ``n - 1`` other vertices, so
positions never need an adjacency structure: draw ``v`` in ``[0, n-1)`` and
shift it past the current vertex. With the same seed this reproduces
``process.run`` on ``build_complete(n)`` draw for draw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numba import njit

from .process import BroadcastOutcome, Status, default_max_rounds


class SuccessModel(str, Enum):
    SINGLE_STEP = "single_step"
    BINOMIAL_BATCH = "binomial_batch"


@njit(cache=True, nogil=True)
def _kn_kernel(n, k, max_rounds, rng, pos, trace):
    # pos is either pre-filled (len k) or empty, in which case we place agents
    if pos.shape[0] == 0:
        pos = np.empty(k, np.int64)
        for a in range(k):
            pos[a] = min(int(rng.random() * n), n - 1)
    informed = np.zeros(k, np.bool_)
    count = 0
    for a in range(k):
        if pos[a] == pos[0]:
            informed[a] = True
            count += 1
    trace[0] = count
    if count == k:
        return 0
    # stamp array: O(k) work per round, no clearing between rounds
    hot = np.full(n, -1, np.int64)
    for t in range(1, max_rounds + 1):
        for a in range(k):
            v = min(int(rng.random() * (n - 1)), n - 2)
            if v >= pos[a]:
                v += 1
            pos[a] = v
        for a in range(k):
            if informed[a]:
                hot[pos[a]] = t
        for a in range(k):
            if not informed[a] and hot[pos[a]] == t:
                informed[a] = True
                count += 1
        trace[t] = count
        if count == k:
            return t
    return max_rounds


def simulate_kn(n: int, k: int, seed: int = 0, max_rounds: int | None = None,
                positions=None) -> BroadcastOutcome:
    """One broadcast run on ``K_n``; ``positions`` optionally fixes the start."""
    if n < 3:
        raise ValueError(f"simulate_kn needs n >= 3, got {n}; use process.run for K_2")
    if k < 2:
        raise ValueError(f"need k >= 2 agents, got {k}")
    cap = default_max_rounds(n, k) if max_rounds is None else max_rounds
    if cap < 1:
        raise ValueError("max_rounds must be >= 1")
    if positions is None:
        pos = np.empty(0, np.int64)
    else:
        pos = np.array(positions, dtype=np.int64)
        if pos.shape != (k,) or pos.min() < 0 or pos.max() >= n:
            raise ValueError("positions must be k vertex ids in [0, n)")
    trace = np.zeros(cap + 1, dtype=np.int64)
    t = _kn_kernel(n, k, cap, np.random.default_rng(seed), pos, trace)
    trace = trace[: t + 1].copy()
    status = Status.FINISHED if trace[-1] == k else Status.ROUND_CAP
    return BroadcastOutcome(status, int(t), trace)


@dataclass
class KnState:
    """Inspectable round-by-round state of the ``K_n`` process (numpy, not compiled)."""

    n: int
    positions: np.ndarray
    informed: np.ndarray

    @classmethod
    def start(cls, n: int, k: int, rng) -> "KnState":
        pos = np.minimum((rng.random(k) * n).astype(np.int64), n - 1)
        return cls(n, pos, pos == pos[0])

    def advance(self, rng) -> None:
        v = np.minimum((rng.random(len(self.positions)) * (self.n - 1)).astype(np.int64), self.n - 2)
        v += v >= self.positions
        self.positions = v
        hot = np.zeros(self.n, dtype=bool)
        hot[v[self.informed]] = True
        self.informed = self.informed | hot[v]


# --- phase chain ---------------------------------------------------------------

def phase_probability(n: int, k: int, ell: int) -> float:
    """P(Bin(k-l, l/(n-1)) = 1 | Bin(k-l, l/(n-1)) <= 1).

    With ``m = k - l`` and ``q = l/(n-1)`` the common factor ``(1-q)^(m-1)``
    cancels, leaving ``m q / (m q + 1 - q)``; no powers are formed, so this is
    stable for any ``m``.
    """
    if not 1 <= ell <= k - 1:
        raise ValueError(f"phase must satisfy 1 <= l <= k-1, got l={ell}, k={k}")
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    q = ell / (n - 1)
    if q > 1:
        raise ValueError(f"l/(n-1) = {q} exceeds 1; phase undefined for l >= n")
    m = k - ell
    return m * q / (m * q + (1.0 - q))


def phase_chain_expectation(n: int, k: int) -> float:
    """Expected length of the single-step phase chain, sum of 1/p_l."""
    if not 2 <= k < n:
        raise ValueError(f"need 2 <= k < n, got n={n}, k={k}")
    return math.fsum(1.0 / phase_probability(n, k, ell) for ell in range(1, k))


@njit(cache=True, nogil=True)
def _batch_kernel(n, k, rng):
    ell = 1
    rounds = 0
    while ell < k:
        q = min(ell / (n - 1), 1.0)
        ell += rng.binomial(k - ell, q)
        rounds += 1
    return rounds


def phase_chain_sample(n: int, k: int, seed=0, model=SuccessModel.SINGLE_STEP, size=None):
    """Draw chain lengths. Returns an int, or an array when ``size`` is given.

    ``SINGLE_STEP`` sums one ``Geom(p_l)`` per phase, never skipping a phase.
    ``BINOMIAL_BATCH`` adds ``Bin(k-l, l/(n-1))`` newly informed agents per
    round (a mean-field approximation ignoring agent collisions).
    """
    if k < 2:
        raise ValueError(f"need k >= 2, got {k}")
    model = SuccessModel(model)
    rng = np.random.default_rng(seed)
    count = 1 if size is None else size
    if model is SuccessModel.SINGLE_STEP:
        if k >= n:
            raise ValueError("single-step chain needs k < n")
        p = np.array([phase_probability(n, k, ell) for ell in range(1, k)])
        out = rng.geometric(p, size=(count, len(p))).sum(axis=1)
    else:
        if n < 3:
            raise ValueError(f"need n >= 3, got {n}")
        out = np.array([_batch_kernel(n, k, rng) for _ in range(count)], dtype=np.int64)
    return int(out[0]) if size is None else out
