"""Command line entry point: ``pcosync <subcommand> ...``.

Times given on the command line are multiples of the period T unless
``--seconds`` is passed.  The default seed is a fixed constant, overridable by
``--seed`` or the ``PCO_SEED`` environment variable.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .digraph import FAMILIES, Digraph, GraphError, ParseError, generate, load_graph
from .experiments import (
    SUITES, ExperimentSpec, format_value, run_counterexample_suite, run_histogram_experiment,
    run_scaling_experiment, run_theorem_suite, trials_csv, write_csv,
)
from .hybrid import (
    COUNTEREXAMPLES, FiringOrder, SyncConfig, TiePolicy, ZenoDetected, policy_rng, simulate,
)
from .stochastic import BadParams, RandomGraphModel, rho_details, window_length

DEFAULT_SEED = 0
TRAJECTORY_COLUMNS = ("t", "j", "event_kind", "firing_agent", "V", "phases")


def default_seed() -> int:
    raw = os.environ.get("PCO_SEED")
    if raw is None or raw == "":
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"error: PCO_SEED must be an integer, got {raw!r}")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


# -- guarantee table ---------------------------------------------------------------------

def verdicts(g: Digraph, r: Sequence[float] | None = None, p: float | None = None,
             T: float = 1.0) -> list[dict]:
    """Which synchronization guarantees cover ``(g, r, p)`` and the time bound each implies.

    ``applies`` is None when ``r`` (or ``p``) was not supplied and only the
    structural condition was checked.
    """
    a = g.analysis
    n = g.n
    rows = []
    if not a.is_rooted:
        return [{"guarantee": "none", "applies": False, "bound": None,
                 "note": "not rooted: synchronization impossible"}]
    depth_note = "" if a.depth_kind.value == "exact" else " (depth is a lower bound)"

    def check(cond_struct: bool, cond_r) -> bool | None:
        if not cond_struct:
            return False
        if r is None:
            return None
        return bool(cond_r(r))

    strong = a.num_components == 1
    rows.append({"guarantee": "acyclic, thresholds in (0,1]",
                 "applies": check(a.is_acyclic, lambda r: all(0 < x <= 1 for x in r)),
                 "bound": (a.depth + 1) * T, "note": "needs a rooted acyclic graph" + depth_note})
    zero = check(a.is_acyclic, lambda r: all(x == 0 for x in r))
    note = "needs a rooted acyclic graph"
    if r is not None and all(x == 0 for x in r) and not a.is_acyclic:
        note = "zero thresholds on a graph with a cycle admit endless jump cascades"
    rows.append({"guarantee": "acyclic, all thresholds 0", "applies": zero, "bound": T, "note": note})
    rows.append({"guarantee": "strongly connected, thresholds < 1/N",
                 "applies": check(strong, lambda r: all(0 < x < 1.0 / n for x in r)),
                 "bound": T, "note": "stated bound; sampled runs exceeding it are documented"})
    rows.append({"guarantee": "strongly connected, thresholds < 1/(N-1)",
                 "applies": check(strong and n > 1, lambda r: all(0 < x < 1.0 / (n - 1) for x in r)),
                 "bound": 2 * T, "note": ""})
    k = a.root_component_size
    cap = 1.0 / (k - 1) if k > 1 else math.inf
    depth_c = a.condensed.analysis.depth if a.condensed is not None else a.depth
    rows.append({"guarantee": f"quasi-acyclic, root thresholds < 1/(|roots|-1) = {cap:.6g}",
                 "applies": check(a.is_quasi_acyclic,
                                  lambda r: all(0 < x <= 1 for x in r)
                                  and all(r[v] < cap for v in a.root_set)),
                 "bound": (depth_c + 1) * T,
                 "note": "bound is in units of the condensed depth; sampled runs exceeding it are documented"})
    row = {"guarantee": "random delivery, p in (0,1), thresholds in (0,1]",
           "applies": None if (r is None or p is None) else
           bool(0 < p < 1 and all(0 < x <= 1 for x in r)),
           "bound": window_length(a.depth, T), "note": "almost sure; bound is the window length"}
    if r is not None and p is not None and row["applies"]:
        rho = rho_details(g, p, r, a.depth)
        row["rho"] = rho.rho
        row["log_one_minus_rho"] = rho.log_one_minus_rho
        row["note"] += "; rho saturates at 1 in double precision" if rho.saturated else ""
    if r is None or p is None:
        row["note"] += "; applies for any p in (0,1) and thresholds in (0,1]"
    rows.append(row)
    return rows


# -- subcommands ---------------------------------------------------------------------------

def _graph(args) -> Digraph:
    if args.graph:
        return load_graph(args.graph)
    if args.n is None:
        raise SystemExit("error: --family needs --n")
    return generate(args.family, args.n, seed=args.graph_seed)


def _config(args, n: int) -> SyncConfig:
    doc = {}
    if getattr(args, "config", None):
        doc = json.loads(Path(args.config).read_text())
    if args.r is not None:
        doc["r"] = args.r
    if "r" not in doc:
        raise SystemExit("error: supply a partition vector with --r or --config")
    r = list(doc["r"])
    if len(r) == 1:
        r = r * n
    if len(r) != n:
        raise SystemExit(f"error: partition vector has {len(r)} entries, graph has {n} vertices")
    doc["r"] = r
    for key in ("T", "tie_policy", "firing_order", "tie_eps"):
        val = getattr(args, key, None)
        if val is not None:
            doc[key] = val
    doc["seed"] = args.seed if args.seed is not None else doc.get("seed", default_seed())
    return SyncConfig.from_dict(doc)


def _horizon(args, T: float) -> float:
    return args.horizon if args.seconds else args.horizon * T


def cmd_analyze(args) -> int:
    g = _graph(args)
    a = g.analysis
    r = args.r
    if r is not None and len(r) == 1:
        r = r * g.n
    if r is not None and len(r) != g.n:
        raise SystemExit(f"error: partition vector has {len(r)} entries, graph has {g.n} vertices")
    rows = verdicts(g, r, args.p, args.T or 1.0)
    info = {"n": g.n, "edges": g.num_edges, "rooted": a.is_rooted, "acyclic": a.is_acyclic,
            "quasi_acyclic": a.is_quasi_acyclic, "root_set": sorted(a.root_set),
            "root_component_size": a.root_component_size if a.is_rooted else None,
            "depth": a.depth, "depth_kind": a.depth_kind.value if a.depth_kind else None,
            "components": a.num_components}
    if args.format == "json":
        print(json.dumps({"graph": info, "verdicts": rows}, sort_keys=True, indent=2))
    else:
        for key, val in info.items():
            print(f"{key:>20}: {val}")
        print()
        for row in rows:
            mark = {True: "applies", False: "no", None: "structure ok"}[row["applies"]]
            bound = "" if row["bound"] is None else f"T* = {format_value(float(row['bound']))}"
            extra = f" rho = {format_value(row['rho'])}" if "rho" in row else ""
            note = row["note"] if row["applies"] is not False or not a.is_rooted else ""
            print(f"[{mark:>12}] {row['guarantee']}: {bound}{extra}  {note}".rstrip())
    return 0 if a.is_rooted else 1


def _trajectory_rows(rec):
    for e in rec.events:
        yield (e.t, e.j, e.label, e.agent, e.V, ";".join("%.15g" % x for x in e.phases))


def cmd_simulate(args) -> int:
    g = _graph(args)
    cfg = _config(args, g.n)
    if args.init is not None:
        init = args.init
    else:
        init = [float(x) for x in np.random.default_rng([cfg.seed, 5]).uniform(0, 1, g.n)]
    horizon = _horizon(args, cfg.T)
    pulse_filter = None
    rng = policy_rng(cfg.seed)
    if args.p is not None:
        model = RandomGraphModel(g, args.p, seed=cfg.seed, utility=True)
        pulse_filter = model.sampler(0)
        rng = policy_rng(cfg.seed, 0)
    status = 0
    try:
        rec = simulate(g, cfg, init, horizon, pulse_filter=pulse_filter, rng=rng,
                       detect_recurrence=args.recurrence)
    except ZenoDetected as exc:
        rec = exc.record
        print(f"zeno: {exc}", file=sys.stderr)
        status = 1
    meta = {"command": "simulate", "config": cfg.to_dict(), "graph": g.to_json(), "init": list(init),
            "horizon": horizon, "p": args.p, "version": __version__}
    out = Path(args.out) if args.out else None
    if args.format == "json":
        lines = [json.dumps({"meta": meta}, sort_keys=True)]
        for row in _trajectory_rows(rec):
            lines.append(json.dumps(dict(zip(TRAJECTORY_COLUMNS, row))))
        text = "\n".join(lines) + "\n"
        if out:
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_text(text)
    else:
        text = write_csv(out, meta, TRAJECTORY_COLUMNS, _trajectory_rows(rec))
    if not out:
        sys.stdout.write(text)
    if args.figures:
        from .plotting import trajectory_figure
        trajectory_figure(rec, Path(args.figures) / "trajectory.png")
    hit = "none" if rec.hit_time is None else format_value(rec.hit_time)
    print(f"hit_time={hit} jumps={rec.jumps} final_V={format_value(rec.events[-1].V)}"
          + (f" recurrence={rec.recurrence}" if rec.recurrence else ""), file=sys.stderr)
    return status


def cmd_montecarlo(args) -> int:
    g = _graph(args)
    r_fixed = args.r * g.n if args.r is not None and len(args.r) == 1 else args.r
    spec = ExperimentSpec(name=args.name, family=args.family,
                          sizes=[g.n] if args.family else [], r_low=args.r_low,
                          r_high=args.r_high, r_fixed=r_fixed, p=args.p, T=args.T or 1.0,
                          trials=args.trials, horizon_windows=args.horizon_windows,
                          seed=_seed(args), tie_policy=args.tie_policy or "to_zero",
                          firing_order=args.firing_order or "ascending", out_dir=args.out)
    res = run_histogram_experiment(spec, graph=g, jobs=args.jobs)
    if not args.out:
        sys.stdout.write(trials_csv(None, res.trials, {"spec": spec.to_dict()}))
    elif args.figures:
        from .plotting import histogram_figure
        histogram_figure(res, Path(args.figures) / f"{spec.name}_histogram.png")
    print(f"trials={len(res.trials)} censored={res.censored} T_window={format_value(res.T_window)} "
          f"rho={format_value(res.rho['rho'])}", file=sys.stderr)
    return 1 if res.censored else 0


def _seed(args) -> int:
    return args.seed if args.seed is not None else default_seed()


def cmd_experiment(args) -> int:
    seed = _seed(args)
    out = args.out
    figures = Path(args.figures) if args.figures else None
    if args.spec:
        spec = ExperimentSpec.load(args.spec)
        if args.out:
            spec.out_dir = args.out
    else:
        spec = None
    if args.kind == "histogram":
        spec = spec or ExperimentSpec(name="histogram", trials=args.trials or 1000, seed=seed,
                                      out_dir=out)
        res = run_histogram_experiment(spec, jobs=args.jobs)
        for n, freq, surv, bound in res.rows():
            print(f"n={n} frequency={freq} survival={format_value(surv)} bound={format_value(bound)}")
        print(f"censored={res.censored} T_window={format_value(res.T_window)}")
        if figures:
            from .plotting import histogram_figure
            histogram_figure(res, figures / f"{spec.name}_histogram.png")
        return 0
    if spec is not None and spec.family:
        families = [spec.family]
    else:
        families = args.family or ["complete", "cycle", "path"]
    if args.sizes:
        sizes = args.sizes
    elif spec is not None and spec.sizes:
        sizes = spec.sizes
    else:
        sizes = list(range(10, (251 if args.full_scale else 101), 10))
    status = 0
    for fam in families:
        if fam not in FAMILIES:
            raise SystemExit(f"error: unknown family {fam!r}")
        doc = spec.to_dict() if spec else {"seed": seed, "trials": 100}
        doc.update(name=f"scaling_{fam}", family=fam, sizes=sizes,
                   trials=args.trials or doc["trials"], out_dir=out or doc.get("out_dir"))
        fs = ExperimentSpec.from_dict(doc)
        res = run_scaling_experiment(fam, sizes, fs, jobs=args.jobs)
        print(f"{fam}: slope={res.slope:.4g} +/- {res.slope_se:.2g} intercept={res.intercept:.4g} "
              f"top_half_ratio={res.top_half_ratio():.4g} censored={sum(c.censored for c in res.cells)}")
        if figures:
            from .plotting import scaling_figure
            scaling_figure(res, figures / f"scaling_{fam}.png")
        if any(c.censored for c in res.cells):
            status = 1
    return status


def cmd_verify(args) -> int:
    suites = list(SUITES) if args.suite == "all" else [args.suite]
    seed = _seed(args)
    failed = False
    for name in suites:
        out = None
        if args.out:
            out = Path(args.out) / f"verify_{name}.json"
        rep = run_theorem_suite(name, args.instances, seed, paths=args.paths, jobs=args.jobs,
                                out_path=out)
        verdict = "pass" if rep.passed else "FAIL"
        print(f"{name}: {verdict} instances={rep.instances} runs={rep.runs} "
              f"violations={len(rep.violations)} jump_window_excess={len(rep.jump_bound_violations)}")
        for v in rep.violations[:3]:
            print("  " + json.dumps(v, sort_keys=True))
        failed = failed or not rep.passed
    return 1 if failed else 0


def cmd_counterexample(args) -> int:
    which = COUNTEREXAMPLES if args.which == "all" else (args.which,)
    out = Path(args.out) / "counterexamples.json" if args.out else None
    rep = run_counterexample_suite(_seed(args), paths=args.paths, which=which, out_path=out)
    for name, doc in rep.fixtures.items():
        state = "periodic" if doc["periodic"] else "aperiodic"
        hit = "no hit" if doc["hit_time"] is None else f"hit at {format_value(doc['hit_time'])}"
        line = f"{name}: {state}, V = {format_value(doc['V_after_first_cascade'])}, {hit}"
        if "stochastic_hits" in doc:
            line += f"; random delivery hit {doc['stochastic_hits']}/{doc['stochastic_paths']}"
        print(line)
    return 0 if rep.passed else 1


# -- parser -------------------------------------------------------------------------------------

def _add_graph(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph", help="graph file (JSON or edge list)")
    src.add_argument("--family", choices=FAMILIES, help="generated graph family")
    p.add_argument("--n", type=int, help="number of vertices for --family")
    p.add_argument("--graph-seed", type=int, default=0, help="seed for random families")


def _add_config(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="config JSON (r, T, tie_policy, firing_order, seed)")
    p.add_argument("--r", type=_floats, help="partition vector, comma separated (one value broadcasts)")
    p.add_argument("--T", type=float, help="period (default 1)")
    p.add_argument("--tie-policy", choices=[x.value for x in TiePolicy])
    p.add_argument("--firing-order", choices=[x.value for x in FiringOrder])
    p.add_argument("--seed", type=int, help="seed (default: PCO_SEED or a fixed constant)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pcosync",
                                 description="Pulse-coupled oscillators with binary resets.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="graph structure and applicable guarantees")
    _add_graph(p)
    p.add_argument("--r", type=_floats)
    p.add_argument("--p", type=float)
    p.add_argument("--T", type=float)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="one trajectory as CSV or JSON lines")
    _add_graph(p)
    _add_config(p)
    p.add_argument("--init", type=_floats, help="initial phases (default: seeded uniform)")
    p.add_argument("--horizon", type=float, default=10.0, help="horizon in periods")
    p.add_argument("--seconds", action="store_true", help="read --horizon in seconds")
    p.add_argument("--p", type=float, help="random delivery probability (0 and 1 allowed)")
    p.add_argument("--recurrence", action="store_true", help="detect periodic orbits")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--figures", help="directory for a trajectory figure")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("montecarlo", help="seeded hitting-time trials under random delivery")
    _add_graph(p)
    p.add_argument("--name", default="montecarlo")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--horizon-windows", type=float, default=500.0)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--r", type=_floats, help="fixed partition vector (default: uniform per trial)")
    p.add_argument("--r-low", type=float, default=0.0)
    p.add_argument("--r-high", type=float, default=1.0)
    p.add_argument("--T", type=float)
    p.add_argument("--tie-policy", choices=[x.value for x in TiePolicy])
    p.add_argument("--firing-order", choices=[x.value for x in FiringOrder])
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="output directory (default: hits CSV to stdout)")
    p.add_argument("--figures", help="directory for figures (needs --out)")
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("experiment", help="hitting-time histogram or size scaling")
    p.add_argument("kind", choices=("histogram", "scaling"))
    p.add_argument("--spec", help="experiment spec JSON")
    p.add_argument("--family", action="append", choices=("complete", "cycle", "path"),
                   help="scaling family (repeatable; default all three)")
    p.add_argument("--sizes", type=_ints)
    p.add_argument("--full-scale", action="store_true", help="sizes 10..250")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="output directory")
    p.add_argument("--figures", help="directory for PNG figures")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("verify", help="randomized guarantee harnesses")
    p.add_argument("--suite", choices=SUITES + ("all",), default="all")
    p.add_argument("--instances", type=int)
    p.add_argument("--paths", type=int, default=200, help="paths per graph for random delivery")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="directory for JSON reports")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("counterexample", help="non-synchronizing scenarios")
    p.add_argument("--which", choices=COUNTEREXAMPLES + ("all",), default="all")
    p.add_argument("--paths", type=int, default=1000)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="directory for the JSON report")
    p.set_defaults(func=cmd_counterexample)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, GraphError, BadParams, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
