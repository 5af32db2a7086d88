import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from walkcast import experiment as X
from walkcast.graph import build_cycle, save_network


# published first output of SplitMix64 seeded with 0
SPLITMIX64_ZERO = 0xE220A8397B1DCDAF


def test_derive_seed_golden():
    assert X.derive_seed(0, 0) == SPLITMIX64_ZERO
    assert X.splitmix64(0) == SPLITMIX64_ZERO


def test_derive_seed_stable():
    assert X.derive_seed(12345, 678) == X.derive_seed(12345, 678)
    assert 0 <= X.derive_seed(2**64 - 1, 2**40) < 2**64


def test_derive_seed_no_collisions():
    seeds = {X.derive_seed(99, i) for i in range(10**6)}
    assert len(seeds) == 10**6


def small_spec(**kw):
    base = dict(graph="torus:5x5", k_values=[2, 4], jump_over=[False, True], replications=3,
                master_seed=7, max_rounds=5000)
    base.update(kw)
    return X.SweepSpec(**base)


def test_three_records_distinct_seeds():
    recs = X.run_sweep(X.SweepSpec(graph="complete:20", k_values=[2], replications=3), threads=1)
    assert len(recs) == 3
    assert len({r.seed for r in recs}) == 3
    assert [r.run_index for r in recs] == [0, 1, 2]


def test_seed_derivation_documented():
    spec = small_spec()
    recs = X.run_sweep(spec, threads=1)
    for r in recs:
        ki = spec.k_values.index(r.k)
        rep = r.run_index % spec.replications
        assert r.seed == X.derive_seed(spec.master_seed, ki * spec.replications + rep)
    # jump-over yes/no of one replication share a seed
    pairs = {}
    for r in recs:
        pairs.setdefault((r.k, r.run_index % 3), set()).add(r.seed)
    assert all(len(s) == 1 for s in pairs.values())


def test_sweep_deterministic_and_thread_independent():
    spec = small_spec()
    a = X.format_results(X.run_sweep(spec, threads=1))
    b = X.format_results(X.run_sweep(spec, threads=1))
    c = X.format_results(X.run_sweep(spec, threads=4))
    assert a == b == c


def test_table3_shape_count():
    spec = X.SweepSpec(graph="torus:3x3", k_values=list(range(2, 28)), jump_over=[True, False],
                       replications=10, discretize=[25, 50, 75])
    assert spec.total_runs == 3 * 2 * 26 * 10 == 1560


def test_discretized_variants(tmp_path):
    # cycle with long edges; d splits them
    from walkcast.graph import RoadGraph
    g = RoadGraph.from_edges(4, [(0, 1, 100), (1, 2, 100), (2, 3, 100), (3, 0, 150)])
    save_network(g, tmp_path / "c.net")
    spec = X.SweepSpec(graph=f"file:{tmp_path / 'c.net'}", k_values=[3], jump_over=[True],
                       replications=2, discretize=[50, 100])
    recs = X.run_sweep(spec, threads=1)
    assert [(r.d, r.n, r.m) for r in recs] == [(50, 9, 9), (50, 9, 9), (100, 5, 5), (100, 5, 5)]


def test_graph_errors_before_runs(tmp_path):
    bad = tmp_path / "bad.net"
    bad.write_text("nodes 2\n0 yellow\n1 orange\nedges 1\n0 1 1\n")
    with pytest.raises(ValueError):
        X.run_sweep(X.SweepSpec(graph=f"file:{bad}", k_values=[2]))


@pytest.mark.parametrize("kw", [dict(k_values=[]), dict(replications=0), dict(k_values=[1]),
                                dict(engine="kn_fast"), dict(discretize=[0])])
def test_spec_validation(kw):
    with pytest.raises(X.SweepError):
        small_spec(**kw)


def test_kn_fast_engine_sweep():
    spec = X.SweepSpec(graph="complete:50", k_values=[3], engine="kn_fast", replications=4)
    recs = X.run_sweep(spec, threads=1)
    assert all(r.engine == "kn_fast" and r.m == 1225 for r in recs)


def test_parse_sweep_spec(tmp_path):
    text = """
graph: file:net.txt
discretize: [25, 50]
k: [10, 20]
jump_over: [true, false]
replications: 5
master_seed: 42
engine: general
"""
    spec = X.parse_sweep_spec(text, base_dir=tmp_path)
    assert spec.graph == f"file:{tmp_path / 'net.txt'}"
    assert spec.k_values == [10, 20] and spec.discretize == [25.0, 50.0]
    assert spec.jump_over == [True, False] and spec.replications == 5
    with pytest.raises(X.SweepError, match="unknown"):
        X.parse_sweep_spec("graph: cycle:5\nk: 2\nbogus: 1\n")
    with pytest.raises(X.SweepError, match="missing"):
        X.parse_sweep_spec("graph: cycle:5\n")


# --- statistics ---------------------------------------------------------------------

def test_summary_constant():
    s = X.summarize_rounds([10, 10, 10])
    assert (s.mean, s.std, s.q05, s.q95) == (10, 0, 10, 10)


def test_summary_nearest_rank_1_to_100():
    s = X.summarize_rounds(list(range(1, 101)))
    assert (s.q05, s.q95) == (5, 95)
    assert (s.min, s.max) == (1, 100)


def record(k, rounds, status="Finished", jump=False):
    return X.RunRecord("g", 10, 10, None, k, jump, "general", 0, 0, status, rounds)


def test_summary_excludes_caps():
    recs = [record(2, r) for r in range(1, 10)] + [record(2, 999, "RoundCapReached")]
    (st_,) = X.summarize(recs).values()
    assert st_.count == 9 and st_.cap_hits == 1 and st_.mean == 5
    assert st_.valid


def test_summary_all_caps_invalid():
    (st_,) = X.summarize([record(2, 5, "RoundCapReached")] * 3).values()
    assert not st_.valid and st_.count == 0 and st_.cap_hits == 3


@given(st.lists(st.integers(0, 10**6), min_size=1, max_size=200))
def test_summary_ordering(values):
    s = X.summarize_rounds(values)
    assert s.min <= s.q05 <= s.q95 <= s.max
    assert s.min <= s.mean <= s.max
    srt = sorted(values)
    # nearest rank: at least 5% of the sample is <= q05, fewer than 5% strictly below
    assert sum(v <= s.q05 for v in srt) >= 0.05 * len(srt)
    assert sum(v < s.q05 for v in srt) < 0.05 * len(srt) or s.q05 == srt[0]


def test_trace_band():
    traces = [np.array([1, 2, 3]), np.array([1, 3]), np.array([1, 1, 2, 3])]
    mean, lo, hi = X.trace_band(traces)
    assert len(mean) == 4
    assert lo.tolist() == [1, 1, 2, 3]
    assert hi.tolist() == [1, 3, 3, 3]
    assert mean[-1] == 3


def test_pearson_perfect():
    r, slope, icpt = X.pearson([1, 2, 3, 4], [2, 4, 6, 8])
    assert r == pytest.approx(1.0) and slope == pytest.approx(2) and icpt == pytest.approx(0)


def test_pearson_hand_value():
    assert X.pearson([1, 2, 3], [6, 4, 5])[0] == pytest.approx(-0.5)


def test_pearson_constant_undefined():
    with pytest.raises(X.CorrelationError):
        X.pearson([1, 2, 3], [5, 5, 5])


@given(st.lists(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), min_size=3, max_size=30))
def test_pearson_bounded(pts):
    x, y = zip(*pts)
    try:
        r = X.pearson(x, y)[0]
    except X.CorrelationError:
        return
    assert -1 <= r <= 1


def test_pearson_matches_numpy():
    rng = np.random.default_rng(0)
    x, y = rng.random(50), rng.random(50)
    assert X.pearson(x, y)[0] == pytest.approx(np.corrcoef(x, y)[0, 1])


def test_correlate_groups():
    n = 100
    groups = {("g", n, 0, None, k, False, "general"): X.summarize_rounds([2 * n * math.log(k) / k])
              for k in (5, 10, 20, 40)}
    rep = X.correlate(groups)
    assert rep.r == pytest.approx(1.0)
    assert rep.slope == pytest.approx(2.0)
    assert rep.x == sorted(rep.x)
    with pytest.raises(X.CorrelationError, match="at least 3"):
        X.correlate(dict(list(groups.items())[:2]))


# --- files ------------------------------------------------------------------------

def test_results_roundtrip(tmp_path):
    recs = X.run_sweep(small_spec(), threads=1)
    X.write_results(recs, tmp_path / "r.csv")
    assert (tmp_path / "r.csv").read_text().splitlines()[0] == \
        "graph,n,m,d,k,jump_over,engine,run_index,seed,status,rounds,wall_ms"
    back = X.read_results(tmp_path / "r.csv")
    assert back == recs


def test_summary_file_has_predictor(tmp_path):
    recs = X.run_sweep(small_spec(), threads=1)
    X.write_summary(X.summarize(recs), tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0].endswith("valid,n_lnk_over_k")
    assert len(lines) == 1 + 4
    last = lines[1].split(",")
    assert float(last[-1]) == pytest.approx(25 * math.log(2) / 2)


def test_wall_time_opt_in():
    recs = X.run_sweep(small_spec(record_wall_time=True, replications=1), threads=1)
    assert all(r.wall_ms > 0 for r in recs)
    recs = X.run_sweep(small_spec(replications=1), threads=1)
    assert all(r.wall_ms == 0 for r in recs)


def test_build_graph_specs():
    assert X.build_graph("cycle:7").n == 7
    assert X.build_graph("torus:4x5").n == 20
    assert X.build_graph("complete:6").m == 15
    for bad in ("cycle", "hex:5", "torus:2x9", "complete:abc"):
        with pytest.raises(X.SweepError):
            X.build_graph(bad)


def test_resolve_threads_env(monkeypatch):
    monkeypatch.setenv("WALKCAST_THREADS", "3")
    assert X.resolve_threads(None) == 3
    assert X.resolve_threads(2) == 2
    with pytest.raises(ValueError):
        X.resolve_threads(0)
