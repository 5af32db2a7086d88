"""Monte Carlo sweeps: seeding, parallel runs, summaries, correlation, result files.

Seed derivation
---------------
``derive_seed(master, i)`` is one SplitMix64 step applied to
``master XOR (i * 0x9E3779B97F4A7C15 mod 2**64)``. In a sweep, ``i`` is the
*seed index*: the flattened position over (graph variant, k, replication),
deliberately leaving out jump-over so the jump-over Yes/No runs of one
replication share their movement randomness. ``run_index`` in the records is
the fully flattened position (variant, k, jump_over, replication).
"""

from __future__ import annotations

import csv
import io
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from enum import Enum
from pathlib import Path

import numpy as np
import yaml

from . import graph as G
from .kn_fast import simulate_kn
from .process import ProcessConfig, Status, run

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

RESULT_COLUMNS = ["graph", "n", "m", "d", "k", "jump_over", "engine", "run_index",
                  "seed", "status", "rounds", "wall_ms"]
SUMMARY_COLUMNS = ["graph", "n", "m", "d", "k", "jump_over", "engine", "count", "mean",
                   "std", "min", "max", "q05", "q95", "cap_hits", "valid", "n_lnk_over_k"]


class Engine(str, Enum):
    GENERAL = "general"
    KN_FAST = "kn_fast"


class SweepError(ValueError):
    pass


class CorrelationError(ValueError):
    pass


def splitmix64(x: int) -> int:
    z = (x + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, run_index: int) -> int:
    return splitmix64((master_seed ^ (run_index * GOLDEN_GAMMA)) & MASK64)


# --- graph sources -------------------------------------------------------------

def build_graph(spec: str) -> G.RoadGraph:
    """``complete:N``, ``cycle:N``, ``torus:WxH`` or ``file:PATH``."""
    kind, sep, arg = spec.partition(":")
    if not sep or not arg:
        raise SweepError(f"graph spec {spec!r} must look like kind:arg")
    try:
        if kind == "complete":
            return G.build_complete(int(arg))
        if kind == "cycle":
            return G.build_cycle(int(arg))
        if kind == "torus":
            w, _, h = arg.lower().partition("x")
            return G.build_torus_grid(int(w), int(h))
    except ValueError as exc:
        raise SweepError(f"graph spec {spec!r}: {exc}") from None
    if kind == "file":
        return G.load_network(arg)
    raise SweepError(f"unknown graph kind {kind!r} (complete|cycle|torus|file)")


def complete_order(spec: str) -> int | None:
    kind, _, arg = spec.partition(":")
    return int(arg) if kind == "complete" else None


@dataclass(frozen=True)
class SweepSpec:
    graph: str
    k_values: list[int]
    jump_over: list[bool] = field(default_factory=lambda: [False])
    replications: int = 1
    master_seed: int = 0
    engine: Engine = Engine.GENERAL
    discretize: list[float] = field(default_factory=list)
    max_rounds: int | None = None
    record_wall_time: bool = False

    def __post_init__(self):
        if not self.k_values:
            raise SweepError("k list must be non-empty")
        if any(k < 2 for k in self.k_values):
            raise SweepError("every k must be >= 2")
        if not self.jump_over:
            raise SweepError("jump_over list must be non-empty")
        if self.replications < 1:
            raise SweepError("replications must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise SweepError("master_seed must be an unsigned 64-bit integer")
        if any(d <= 0 for d in self.discretize):
            raise SweepError("discretization lengths must be positive")
        if self.max_rounds is not None and self.max_rounds < 1:
            raise SweepError("max_rounds must be >= 1")
        object.__setattr__(self, "engine", Engine(self.engine))
        if self.engine is Engine.KN_FAST:
            if complete_order(self.graph) is None:
                raise SweepError("kn_fast engine requires a complete:N graph")
            if any(self.jump_over) or self.discretize:
                raise SweepError("kn_fast engine supports neither jump-over nor discretization")

    @property
    def total_runs(self) -> int:
        return (max(1, len(self.discretize)) * len(self.k_values) * len(self.jump_over)
                * self.replications)


_SPEC_KEYS = {"graph", "k", "jump_over", "replications", "master_seed", "engine",
              "discretize", "max_rounds", "record_wall_time"}


def parse_sweep_spec(text: str, base_dir=None) -> SweepSpec:
    """Parse the YAML sweep spec. Relative ``file:`` paths resolve against ``base_dir``."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SweepError(f"sweep spec is not valid YAML: {exc}") from None
    if not isinstance(data, dict):
        raise SweepError("sweep spec must be a mapping")
    unknown = set(data) - _SPEC_KEYS
    if unknown:
        raise SweepError(f"unknown sweep spec keys: {sorted(unknown)}")
    for key in ("graph", "k"):
        if key not in data:
            raise SweepError(f"sweep spec is missing {key!r}")

    def as_list(v):
        return list(v) if isinstance(v, (list, tuple)) else [v]

    graph = str(data["graph"])
    if graph.startswith("file:") and base_dir is not None:
        p = Path(graph[5:])
        if not p.is_absolute():
            graph = "file:" + str(Path(base_dir) / p)
    try:
        return SweepSpec(
            graph=graph,
            k_values=[int(k) for k in as_list(data["k"])],
            jump_over=[bool(j) for j in as_list(data.get("jump_over", [False]))],
            replications=int(data.get("replications", 1)),
            master_seed=int(data.get("master_seed", 0)),
            engine=Engine(data.get("engine", "general")),
            discretize=[float(d) for d in as_list(data.get("discretize") or [])],
            max_rounds=None if data.get("max_rounds") is None else int(data["max_rounds"]),
            record_wall_time=bool(data.get("record_wall_time", False)),
        )
    except (TypeError, ValueError) as exc:
        raise SweepError(f"bad sweep spec value: {exc}") from None


def load_sweep_spec(path) -> SweepSpec:
    path = Path(path)
    return parse_sweep_spec(path.read_text(), base_dir=path.parent)


# --- running -------------------------------------------------------------------

@dataclass(frozen=True)
class RunRecord:
    graph: str
    n: int
    m: int
    d: float | None
    k: int
    jump_over: bool
    engine: str
    run_index: int
    seed: int
    status: str
    rounds: int
    wall_ms: float = 0.0

    @property
    def cap_hit(self) -> bool:
        return self.status == Status.ROUND_CAP.value

    @property
    def config_key(self) -> tuple:
        return (self.graph, self.n, self.m, self.d, self.k, self.jump_over, self.engine)


def graph_variants(spec: SweepSpec) -> list[tuple[float | None, G.RoadGraph]]:
    """Load the base graph once and discretize it per ``d``; fails before any run."""
    if spec.engine is Engine.KN_FAST:
        n = complete_order(spec.graph)
        if n < 3:
            raise SweepError("kn_fast engine needs n >= 3")
        return [(None, None)]
    base = build_graph(spec.graph)
    if not spec.discretize:
        return [(None, base)]
    return [(d, G.discretize(base, d)[0]) for d in spec.discretize]


def run_sweep(spec: SweepSpec, threads: int | None = None) -> list[RunRecord]:
    """Run every (variant, k, jump_over, replication); records come back in index order."""
    variants = graph_variants(spec)
    tasks = []
    for vi, (d, g) in enumerate(variants):
        for ki, k in enumerate(spec.k_values):
            for ji, jump in enumerate(spec.jump_over):
                for rep in range(spec.replications):
                    run_index = len(tasks)
                    seed_index = (vi * len(spec.k_values) + ki) * spec.replications + rep
                    tasks.append((run_index, derive_seed(spec.master_seed, seed_index),
                                  d, g, k, jump))
    n_kn = complete_order(spec.graph)

    def one(task):
        run_index, seed, d, g, k, jump = task
        t0 = time.perf_counter()
        if spec.engine is Engine.KN_FAST:
            out = simulate_kn(n_kn, k, seed=seed, max_rounds=spec.max_rounds)
            n, m = n_kn, n_kn * (n_kn - 1) // 2
        else:
            out = run(g, ProcessConfig(k=k, jump_over=jump, max_rounds=spec.max_rounds, seed=seed))
            n, m = g.n, g.m
        wall = (time.perf_counter() - t0) * 1000 if spec.record_wall_time else 0.0
        return RunRecord(spec.graph, n, m, d, k, jump, spec.engine.value, run_index, seed,
                         out.status.value, out.rounds, wall)

    threads = resolve_threads(threads)
    if threads == 1:
        return [one(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, tasks, chunksize=16))


def resolve_threads(threads: int | None) -> int:
    if threads is None:
        env = os.environ.get("WALKCAST_THREADS")
        threads = int(env) if env else (os.cpu_count() or 1)
    if threads < 1:
        raise ValueError(f"thread count must be >= 1, got {threads}")
    return threads


# --- statistics ----------------------------------------------------------------

@dataclass(frozen=True)
class SummaryStats:
    count: int
    mean: float
    std: float
    min: float
    max: float
    q05: float
    q95: float
    cap_hits: int
    valid: bool = True


def nearest_rank(sorted_values, p: float):
    """Smallest value with at least ``p`` of the sample at or below it."""
    n = len(sorted_values)
    rank = max(1, math.ceil(round(p * n, 9)))
    return sorted_values[rank - 1]


def summarize_rounds(rounds, cap_hits: int = 0) -> SummaryStats:
    vals = sorted(rounds)
    if not vals:
        nan = float("nan")
        return SummaryStats(0, nan, nan, nan, nan, nan, nan, cap_hits, valid=False)
    arr = np.asarray(vals, dtype=np.float64)
    std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
    return SummaryStats(len(vals), float(arr.mean()), std, float(arr[0]), float(arr[-1]),
                        float(nearest_rank(vals, 0.05)), float(nearest_rank(vals, 0.95)),
                        cap_hits)


def summarize(records) -> dict[tuple, SummaryStats]:
    """Group by configuration; runs that hit the round cap are counted, not averaged."""
    groups: dict[tuple, list[RunRecord]] = {}
    for r in records:
        groups.setdefault(r.config_key, []).append(r)
    out = {}
    for key, recs in groups.items():
        out[key] = summarize_rounds([r.rounds for r in recs if not r.cap_hit],
                                    sum(r.cap_hit for r in recs))
    return out


def trace_band(traces, lo=0.05, hi=0.95):
    """Per-round mean and nearest-rank quantiles of informed counts.

    Finished traces are padded with their final value up to the longest trace.
    Returns ``(mean, q_lo, q_hi)`` arrays.
    """
    if not traces:
        raise ValueError("need at least one trace")
    width = max(len(t) for t in traces)
    mat = np.array([np.pad(t, (0, width - len(t)), mode="edge") for t in traces])
    mat.sort(axis=0)
    n = len(traces)
    ilo = max(1, math.ceil(round(lo * n, 9))) - 1
    ihi = max(1, math.ceil(round(hi * n, 9))) - 1
    return mat.mean(axis=0), mat[ilo], mat[ihi]


@dataclass(frozen=True)
class CorrelationReport:
    x: list[float]
    y: list[float]
    r: float
    slope: float
    intercept: float

    def as_dict(self) -> dict:
        return asdict(self)


def predictor(n: int, k: int) -> float:
    return n * math.log(k) / k


def pearson(x, y) -> tuple[float, float, float]:
    """Pearson r and the least-squares line ``y = slope * x + intercept``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy, sxy = float(dx @ dx), float(dy @ dy), float(dx @ dy)
    if sxx == 0 or syy == 0:
        raise CorrelationError("correlation undefined: zero variance in x or y")
    r = max(-1.0, min(1.0, sxy / math.sqrt(sxx * syy)))
    slope = sxy / sxx
    return r, slope, float(y.mean() - slope * x.mean())


def correlate(groups, n: int | None = None) -> CorrelationReport:
    """Correlate group mean rounds with ``n ln k / k``.

    ``groups`` maps config keys (as produced by :func:`summarize`) to stats;
    ``n`` overrides the vertex count taken from the keys.
    """
    pts = []
    for key, st in groups.items():
        if not st.valid:
            continue
        nn = key[1] if n is None else n
        pts.append((predictor(nn, key[4]), st.mean))
    if len(pts) < 3:
        raise CorrelationError(f"need at least 3 valid groups, got {len(pts)}")
    pts.sort()
    x, y = [p[0] for p in pts], [p[1] for p in pts]
    r, slope, intercept = pearson(x, y)
    return CorrelationReport(x, y, r, slope, intercept)


# --- files ---------------------------------------------------------------------

def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return repr(int(v)) if v.is_integer() and abs(v) < 2**53 else repr(v)
    return str(v)


def format_results(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for r in records:
        w.writerow([_fmt(r.graph), r.n, r.m, _fmt(r.d), r.k, _fmt(r.jump_over), r.engine,
                    r.run_index, r.seed, r.status, r.rounds,
                    f"{r.wall_ms:.3f}" if r.wall_ms else "0"])
    return buf.getvalue()


def write_results(records, path) -> None:
    Path(path).write_text(format_results(records))


def read_results(path) -> list[RunRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RESULT_COLUMNS:
            raise SweepError(f"{path}: unexpected header {header}")
        out = []
        for row in reader:
            g, n, m, d, k, j, e, i, s, st, rd, w = row
            out.append(RunRecord(g, int(n), int(m), float(d) if d else None, int(k),
                                 j == "true", e, int(i), int(s), st, int(rd), float(w)))
    return out


def format_summary(stats: dict[tuple, SummaryStats]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for key in sorted(stats, key=lambda t: (t[0], t[3] or 0.0, t[4], t[5], t[6])):
        graph, n, m, d, k, jump, engine = key
        st = stats[key]
        w.writerow([graph, n, m, _fmt(d), k, _fmt(jump), engine, st.count, _fmt(st.mean),
                    _fmt(st.std), _fmt(st.min), _fmt(st.max), _fmt(st.q05), _fmt(st.q95),
                    st.cap_hits, _fmt(st.valid), _fmt(predictor(n, k))])
    return buf.getvalue()


def write_summary(stats, path) -> None:
    Path(path).write_text(format_summary(stats))
