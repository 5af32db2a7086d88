"""``walkcast`` command line: predict, simulate, sweep, report, discretize.

Exit codes: 0 success, 1 validation error (bad flags, bad input files,
violated preconditions), 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import experiment as X
from .graph import GraphError, NetworkFormatError, discretize, load_network, save_network
from .kn_fast import simulate_kn
from .process import ProcessConfig, Status, run
from .theory import classify_and_predict


class ValidationError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _emit(args, doc: dict, human: str) -> None:
    if args.format == "json":
        print(json.dumps(doc, sort_keys=True))
    else:
        print(human)


def cmd_predict(args) -> int:
    try:
        p = classify_and_predict(args.n, args.k, c_low=args.c_low, omega=args.omega)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    doc = {"n": args.n, "k": args.k, **p.as_dict()}
    lines = [f"case {p.case_label.value} ({p.regime}), estimate {p.estimate:.2f} rounds"]
    if p.lower is not None and p.case_label.value == "A":
        lines.append(f"interval [{p.lower:.2f}, {p.upper:.2f}]")
    if p.values:
        lines.append(f"values {{{', '.join(map(str, p.values))}}}, "
                     f"(k/n)^i / (n ln n) = {p.ratio:.4g}")
    if p.note:
        lines.append(p.note)
    _emit(args, doc, "\n".join(lines))
    return 0


def _load_graph(args):
    try:
        g = X.build_graph(args.graph)
    except (X.SweepError, GraphError, NetworkFormatError, OSError) as exc:
        raise ValidationError(str(exc)) from None
    if args.discretize is not None:
        try:
            g, _ = discretize(g, args.discretize)
        except ValueError as exc:
            raise ValidationError(str(exc)) from None
    return g


def cmd_simulate(args) -> int:
    g = _load_graph(args)
    n_kn = X.complete_order(args.graph)
    use_kn = args.engine == "kn_fast"
    if use_kn and (n_kn is None or n_kn < 3 or args.jump_over or args.discretize is not None):
        raise ValidationError("--engine kn_fast needs complete:N with N >= 3 and no jump-over/discretization")
    try:
        if use_kn:
            out = simulate_kn(n_kn, args.k, seed=args.seed, max_rounds=args.max_rounds)
        else:
            cfg = ProcessConfig(k=args.k, jump_over=args.jump_over,
                                max_rounds=args.max_rounds, seed=args.seed)
            out = run(g, cfg)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    doc = {"graph": args.graph, "n": g.n, "m": g.m, "k": args.k, "seed": args.seed,
           "jump_over": args.jump_over, "engine": args.engine, **out.as_dict(trace=args.trace)}
    if out.status is Status.FINISHED:
        human = f"Finished: all {args.k} agents informed after {out.rounds} rounds"
    else:
        human = (f"RoundCapReached: {int(out.informed_trace[-1])}/{args.k} agents informed "
                 f"after {out.rounds} rounds; no broadcast time is reported")
    if args.trace:
        human += "\ntrace " + " ".join(str(int(x)) for x in out.informed_trace)
    _emit(args, doc, f"graph {args.graph}: n={g.n} m={g.m}\n{human}")
    return 0


def cmd_discretize(args) -> int:
    try:
        g = load_network(args.inp)
        out, rep = discretize(g, args.d)
    except (GraphError, NetworkFormatError, OSError, ValueError) as exc:
        raise ValidationError(str(exc)) from None
    if args.out:
        save_network(out, args.out)
    doc = rep.as_dict()
    doc["m_minus_n"] = rep.edges_after - rep.vertices_after
    human = (f"d={rep.d:g}: vertices {rep.vertices_before} -> {rep.vertices_after}, "
             f"edges {rep.edges_before} -> {rep.edges_after}, "
             f"{len(rep.added_per_edge)} edges split, m-n = {doc['m_minus_n']}")
    _emit(args, doc, human)
    return 0


def cmd_sweep(args) -> int:
    try:
        spec = X.load_sweep_spec(args.spec)
        X.graph_variants(spec)  # surface graph errors before any run
        threads = X.resolve_threads(args.threads)
    except (X.SweepError, GraphError, NetworkFormatError, OSError, ValueError) as exc:
        raise ValidationError(str(exc)) from None
    records = X.run_sweep(spec, threads=threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    X.write_results(records, out / "results.csv")
    stats = X.summarize(records)
    X.write_summary(stats, out / "summary.csv")
    caps = sum(r.cap_hit for r in records)
    doc = {"runs": len(records), "groups": len(stats), "cap_hits": caps,
           "results": str(out / "results.csv"), "summary": str(out / "summary.csv")}
    _emit(args, doc, f"{len(records)} runs in {len(stats)} configurations "
                     f"({caps} hit the round cap) -> {out}")
    return 0


def cmd_report(args) -> int:
    path = Path(args.inp) / "results.csv"
    if not path.is_file():
        raise ValidationError(f"no results.csv in {args.inp}")
    try:
        records = X.read_results(path)
    except (X.SweepError, ValueError) as exc:
        raise ValidationError(str(exc)) from None
    if not records:
        raise ValidationError(f"{path} holds no runs")
    stats = X.summarize(records)
    X.write_summary(stats, Path(args.inp) / "summary.csv")
    doc = {"groups": []}
    lines = [f"{'d':>6} {'k':>7} {'jump':>5} {'count':>6} {'mean':>10} {'q05':>8} {'q95':>8} {'caps':>5}"]
    for key in sorted(stats, key=lambda t: (t[3] or 0.0, t[4], t[5])):
        st = stats[key]
        doc["groups"].append({"graph": key[0], "n": key[1], "m": key[2], "d": key[3],
                              "k": key[4], "jump_over": key[5], "engine": key[6],
                              "count": st.count, "mean": st.mean, "std": st.std,
                              "q05": st.q05, "q95": st.q95, "cap_hits": st.cap_hits,
                              "valid": st.valid})
        lines.append(f"{X._fmt(key[3]) or '-':>6} {key[4]:>7} {X._fmt(key[5]):>5} {st.count:>6} "
                     f"{st.mean:>10.2f} {st.q05:>8g} {st.q95:>8g} {st.cap_hits:>5}")
    if args.correlate:
        doc["correlation"] = []
        by_series: dict[tuple, dict] = {}
        for key, st in stats.items():
            by_series.setdefault((key[0], key[1], key[3], key[5], key[6]), {})[key] = st
        for series, groups in sorted(by_series.items(), key=lambda s: (s[0][2] or 0.0, s[0][3])):
            try:
                rep = X.correlate(groups)
            except X.CorrelationError as exc:
                lines.append(f"correlation d={X._fmt(series[2]) or '-'} jump={X._fmt(series[3])}: {exc}")
                continue
            doc["correlation"].append({"graph": series[0], "n": series[1], "d": series[2],
                                       "jump_over": series[3], **rep.as_dict()})
            lines.append(f"correlation vs n ln k / k (d={X._fmt(series[2]) or '-'}, "
                         f"jump={X._fmt(series[3])}): r = {rep.r:.5f}, "
                         f"rounds ~ {rep.slope:.4g} x + {rep.intercept:.4g}")
    _emit(args, doc, "\n".join(lines))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="walkcast", description="Random-walk message broadcasting simulator")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def fmt(sp):
        sp.add_argument("--format", choices=["text", "json"], default="text")

    sp = sub.add_parser("predict", help="classify (n, k) and predict the broadcast time on K_n")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--c-low", type=float, default=0.05)
    sp.add_argument("--omega", type=float, default=None)
    fmt(sp)
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("simulate", help="run one broadcast simulation")
    sp.add_argument("--graph", required=True, help="complete:N | cycle:N | torus:WxH | file:PATH")
    sp.add_argument("--discretize", type=float, default=None, metavar="D")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--jump-over", action="store_true")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--max-rounds", type=int, default=None)
    sp.add_argument("--engine", choices=["general", "kn_fast"], default="general")
    sp.add_argument("--trace", action="store_true")
    fmt(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep", help="run a parameter sweep from a YAML spec")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--threads", type=int, default=None)
    fmt(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("report", help="summarize a sweep output directory")
    sp.add_argument("--in", dest="inp", required=True)
    sp.add_argument("--correlate", action="store_true")
    fmt(sp)
    sp.set_defaults(func=cmd_report)

    sp = sub.add_parser("discretize", help="split long edges of a network file")
    sp.add_argument("--in", dest="inp", required=True)
    sp.add_argument("--d", type=float, required=True)
    sp.add_argument("--out", default=None)
    fmt(sp)
    sp.set_defaults(func=cmd_discretize)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"walkcast {args.command}: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - top-level runtime failure
        print(f"walkcast {args.command}: runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
