"""Road-style graphs: builders, the plain-text network format, and edge discretization.

A :class:`RoadGraph` is immutable once built. Internally the adjacency is
kept in CSR form (``indptr``/``nbr``) so the simulation kernels can walk it
without touching Python objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components


class VertexKind(IntEnum):
    ORANGE = 0
    YELLOW = 1


class GraphError(ValueError):
    """A graph violates one of the RoadGraph invariants."""


class NetworkFormatError(ValueError):
    """Malformed network file; ``line`` is 1-based (0 when unknown)."""

    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True, eq=False)
class RoadGraph:
    """Weighted undirected simple graph with orange/yellow vertex kinds.

    Use :meth:`from_edges` rather than the raw constructor; it builds the CSR
    arrays and validates. Edge ``i`` is ``(edge_u[i], edge_v[i])`` with length
    ``edge_len[i]`` metres.
    """

    n: int
    edge_u: np.ndarray
    edge_v: np.ndarray
    edge_len: np.ndarray
    kinds: np.ndarray
    coords: np.ndarray | None = None
    indptr: np.ndarray = field(init=False, repr=False)
    nbr: np.ndarray = field(init=False, repr=False)
    nbr_len: np.ndarray = field(init=False, repr=False)
    nbr_eid: np.ndarray = field(init=False, repr=False)
    rev: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n, m = self.n, len(self.edge_u)
        src = np.concatenate([self.edge_u, self.edge_v])
        dst = np.concatenate([self.edge_v, self.edge_u])
        eid = np.concatenate([np.arange(m), np.arange(m)])
        order = np.lexsort((dst, src))
        src, dst, eid = src[order], dst[order], eid[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        # rev[s] is the slot holding the opposite direction of slot s
        slot_of = np.empty(2 * m, dtype=np.int64)
        slot_of[order] = np.arange(2 * m)
        rev = np.empty(2 * m, dtype=np.int64)
        rev[slot_of[:m]] = slot_of[m:]
        rev[slot_of[m:]] = slot_of[:m]
        for name, value in (
            ("indptr", indptr),
            ("nbr", dst.astype(np.int64)),
            ("nbr_len", self.edge_len[eid]),
            ("nbr_eid", eid.astype(np.int64)),
            ("rev", rev),
        ):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @classmethod
    def from_edges(cls, n, edges, kinds=None, coords=None, validate=True) -> "RoadGraph":
        """Build from ``(u, v, length)`` triples. Kinds default to all orange."""
        if n < 1:
            raise GraphError(f"vertex count must be positive, got {n}")
        arr = np.asarray(list(edges), dtype=np.float64).reshape(-1, 3)
        eu = arr[:, 0].astype(np.int64)
        ev = arr[:, 1].astype(np.int64)
        if len(arr) and (not np.array_equal(eu, arr[:, 0]) or not np.array_equal(ev, arr[:, 1])):
            raise GraphError("edge endpoints must be integers")
        if len(arr) and (eu.min() < 0 or ev.min() < 0 or max(eu.max(), ev.max()) >= n):
            raise GraphError(f"edge endpoint out of range [0, {n})")
        if kinds is None:
            kinds = np.zeros(n, dtype=np.uint8)
        kinds = np.asarray(kinds, dtype=np.uint8)
        if kinds.shape != (n,):
            raise GraphError(f"expected {n} vertex kinds, got {kinds.shape[0]}")
        if coords is not None:
            coords = np.asarray(coords, dtype=np.float64)
            if coords.shape != (n, 2):
                raise GraphError(f"coords must have shape ({n}, 2)")
            coords.setflags(write=False)
        g = cls(n, eu, ev, arr[:, 2].copy(), kinds, coords)
        for a in (g.edge_u, g.edge_v, g.edge_len, g.kinds):
            a.setflags(write=False)
        if validate:
            g.validate()
        return g

    @property
    def m(self) -> int:
        return len(self.edge_u)

    @property
    def degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def total_length(self) -> float:
        return float(math.fsum(self.edge_len))

    def adjacency(self, v: int) -> list[tuple[int, float, int]]:
        """``(neighbor, length, edge id)`` for each edge at ``v``."""
        s, e = self.indptr[v], self.indptr[v + 1]
        return [
            (int(a), float(b), int(c))
            for a, b, c in zip(self.nbr[s:e], self.nbr_len[s:e], self.nbr_eid[s:e])
        ]

    def neighbors(self, v: int) -> np.ndarray:
        return self.nbr[self.indptr[v]:self.indptr[v + 1]]

    def validate(self) -> None:
        if np.any(~np.isfinite(self.edge_len)) or np.any(self.edge_len <= 0):
            raise GraphError("edge lengths must be strictly positive and finite")
        if np.any(self.edge_u == self.edge_v):
            bad = int(np.flatnonzero(self.edge_u == self.edge_v)[0])
            raise GraphError(f"self-loop at vertex {int(self.edge_u[bad])} (edge {bad})")
        lo = np.minimum(self.edge_u, self.edge_v)
        hi = np.maximum(self.edge_u, self.edge_v)
        keys = lo * self.n + hi
        uniq, counts = np.unique(keys, return_counts=True)
        if np.any(counts > 1):
            k = int(uniq[np.argmax(counts > 1)])
            raise GraphError(f"multi-edge between {k // self.n} and {k % self.n}")
        if np.any(self.kinds > VertexKind.YELLOW):
            raise GraphError("unknown vertex kind")
        deg = self.degree
        bad = np.flatnonzero((self.kinds == VertexKind.YELLOW) & (deg != 2))
        if len(bad):
            v = int(bad[0])
            raise GraphError(f"yellow vertex {v} has degree {int(deg[v])}, must be 2")
        if self.n > 1 and np.any(deg == 0):
            raise GraphError(f"graph is disconnected (vertex {int(np.argmin(deg))} is isolated)")
        adj = coo_matrix(
            (np.ones(self.m), (self.edge_u, self.edge_v)), shape=(self.n, self.n)
        )
        ncomp, _ = connected_components(adj, directed=False)
        if ncomp != 1:
            raise GraphError(f"graph is disconnected ({ncomp} components)")

    def edges(self):
        """Iterate ``(u, v, length)`` in edge-id order."""
        for u, v, ln in zip(self.edge_u, self.edge_v, self.edge_len):
            yield int(u), int(v), float(ln)


def build_complete(n: int) -> RoadGraph:
    if n < 2:
        raise ValueError(f"complete graph needs n >= 2, got {n}")
    iu, iv = np.triu_indices(n, k=1)
    edges = np.column_stack([iu, iv, np.ones(len(iu))])
    return RoadGraph.from_edges(n, edges)


def build_cycle(n: int) -> RoadGraph:
    if n < 3:
        raise ValueError(f"cycle needs n >= 3, got {n}")
    return RoadGraph.from_edges(n, [(i, (i + 1) % n, 1.0) for i in range(n)])


def build_torus_grid(w: int, h: int) -> RoadGraph:
    """Wrap-around ``w x h`` grid, 4-regular.

    Sides of length 2 would produce doubled edges, so both sides must be >= 3.
    """
    if w < 3 or h < 3:
        raise ValueError(f"torus sides must be >= 3 to stay simple, got {w}x{h}")
    edges = []
    for y in range(h):
        for x in range(w):
            v = y * w + x
            edges.append((v, y * w + (x + 1) % w, 1.0))
            edges.append((v, ((y + 1) % h) * w + x, 1.0))
    return RoadGraph.from_edges(w * h, edges)


def build_path(kinds_or_n, lengths=None) -> RoadGraph:
    """Path 0-1-...-(n-1); ``kinds_or_n`` is a vertex count or a kinds sequence."""
    if isinstance(kinds_or_n, int):
        kinds = [VertexKind.ORANGE] * kinds_or_n
    else:
        kinds = list(kinds_or_n)
    n = len(kinds)
    lengths = [1.0] * (n - 1) if lengths is None else list(lengths)
    return RoadGraph.from_edges(n, [(i, i + 1, lengths[i]) for i in range(n - 1)], kinds=kinds)


# --- text interchange format -------------------------------------------------

_KIND_NAMES = {"orange": VertexKind.ORANGE, "yellow": VertexKind.YELLOW}


def _content_lines(text: str):
    for no, raw in enumerate(text.splitlines(), start=1):
        parts = raw.split("#", 1)[0].split()
        if parts:
            yield no, parts


def parse_network(text: str) -> RoadGraph:
    lines = list(_content_lines(text))
    pos = 0

    def take(what):
        nonlocal pos
        if pos >= len(lines):
            raise NetworkFormatError(f"unexpected end of file, expected {what}")
        item = lines[pos]
        pos += 1
        return item

    def header(word):
        no, parts = take(f"'{word} <count>'")
        if len(parts) != 2 or parts[0] != word:
            raise NetworkFormatError(f"expected '{word} <count>'", no)
        try:
            count = int(parts[1])
        except ValueError:
            raise NetworkFormatError(f"bad {word} count {parts[1]!r}", no) from None
        if count < 0:
            raise NetworkFormatError(f"negative {word} count", no)
        return count

    n = header("nodes")
    if n < 1:
        raise NetworkFormatError("network must have at least one node")
    kinds = np.zeros(n, dtype=np.uint8)
    coords = np.full((n, 2), np.nan)
    with_coords = None
    for expected in range(n):
        no, parts = take(f"node line {expected}")
        if len(parts) not in (2, 4):
            raise NetworkFormatError("node line must be 'id kind [x y]'", no)
        try:
            vid = int(parts[0])
        except ValueError:
            raise NetworkFormatError(f"bad node id {parts[0]!r}", no) from None
        if vid != expected:
            raise NetworkFormatError(f"node ids must be consecutive from 0; expected {expected}, got {vid}", no)
        kind = _KIND_NAMES.get(parts[1].lower())
        if kind is None:
            raise NetworkFormatError(f"unknown kind {parts[1]!r} (orange|yellow)", no)
        kinds[vid] = kind
        has = len(parts) == 4
        if with_coords is None:
            with_coords = has
        elif with_coords != has:
            raise NetworkFormatError("coordinates must be given for all nodes or none", no)
        if has:
            try:
                coords[vid] = float(parts[2]), float(parts[3])
            except ValueError:
                raise NetworkFormatError("bad coordinate", no) from None
    m = header("edges")
    edges = []
    for _ in range(m):
        no, parts = take("edge line 'u v length_m'")
        if len(parts) != 3:
            raise NetworkFormatError("edge line must be 'u v length_m'", no)
        try:
            u, v, ln = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise NetworkFormatError("bad edge field", no) from None
        if not (0 <= u < n and 0 <= v < n):
            raise NetworkFormatError(f"edge endpoint out of range [0, {n})", no)
        edges.append((u, v, ln))
    if pos != len(lines):
        raise NetworkFormatError("trailing content after edge list", lines[pos][0])
    return RoadGraph.from_edges(n, edges, kinds=kinds, coords=coords if with_coords else None)


def load_network(path) -> RoadGraph:
    return parse_network(Path(path).read_text())


def format_network(g: RoadGraph) -> str:
    out = [f"nodes {g.n}"]
    for v in range(g.n):
        kind = "yellow" if g.kinds[v] == VertexKind.YELLOW else "orange"
        if g.coords is not None:
            out.append(f"{v} {kind} {float(g.coords[v, 0])!r} {float(g.coords[v, 1])!r}")
        else:
            out.append(f"{v} {kind}")
    out.append(f"edges {g.m}")
    out.extend(f"{u} {v} {ln!r}" for u, v, ln in g.edges())
    return "\n".join(out) + "\n"


def save_network(g: RoadGraph, path) -> None:
    Path(path).write_text(format_network(g))


# --- discretization ----------------------------------------------------------

@dataclass(frozen=True)
class DiscretizationReport:
    d: float
    vertices_before: int
    vertices_after: int
    edges_before: int
    edges_after: int
    added_per_edge: list[tuple[int, int]]

    def as_dict(self) -> dict:
        return {
            "d": self.d,
            "vertices_before": self.vertices_before,
            "vertices_after": self.vertices_after,
            "edges_before": self.edges_before,
            "edges_after": self.edges_after,
            "edges_split": len(self.added_per_edge),
            "yellow_added": self.vertices_after - self.vertices_before,
        }


def parts_needed(length: float, d: float) -> int:
    """Smallest j with length / j <= d."""
    j = max(1, math.ceil(length / d))
    # ceil of a rounded quotient can be off by one either way
    while j > 1 and length / (j - 1) <= d:
        j -= 1
    while length / j > d:
        j += 1
    return j


def discretize(g: RoadGraph, d: float) -> tuple[RoadGraph, DiscretizationReport]:
    """Split every edge longer than ``d`` into equal sub-edges via new yellow vertices.

    New vertices get ids ``n, n+1, ...`` in edge order; sub-edges of an edge are
    emitted consecutively from ``u`` towards ``v``.
    """
    if not (d > 0 and math.isfinite(d)):
        raise ValueError(f"discretization length must be positive, got {d}")
    kinds = list(g.kinds)
    coords = None if g.coords is None else [tuple(c) for c in g.coords]
    edges = []
    split = []
    nxt = g.n
    for eid, (u, v, ln) in enumerate(g.edges()):
        j = parts_needed(ln, d)
        if j == 1:
            edges.append((u, v, ln))
            continue
        split.append((eid, j))
        sub = ln / j
        chain = [u] + list(range(nxt, nxt + j - 1)) + [v]
        for i in range(1, j):
            kinds.append(VertexKind.YELLOW)
            if coords is not None:
                t = i / j
                (x0, y0), (x1, y1) = coords[u], coords[v]
                coords.append((x0 + t * (x1 - x0), y0 + t * (y1 - y0)))
        nxt += j - 1
        edges.extend((a, b, sub) for a, b in zip(chain, chain[1:]))
    out = RoadGraph.from_edges(nxt, edges, kinds=kinds, coords=coords)
    report = DiscretizationReport(
        d=float(d),
        vertices_before=g.n,
        vertices_after=out.n,
        edges_before=g.m,
        edges_after=out.m,
        added_per_edge=split,
    )
    return out, report
