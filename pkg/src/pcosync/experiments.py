"""Named, seeded experiments on top of the simulators, plus randomized guarantee checks.

Every experiment is a pure function of its spec and seed.  Result files are
CSV with a one-line ``# {json}`` metadata header carrying the resolved
configuration, so identical runs give identical bytes.
"""
from __future__ import annotations

import csv
import io
import json
import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .digraph import (
    Digraph, NotRooted, generate, histogram_standin_graph, load_graph, feeder_pair_graph,
)
from .hybrid import (
    TIME_EPS, Disturbance, FiringOrder, SyncConfig, TiePolicy, ZenoDetected,
    COUNTEREXAMPLES, counterexample_fixture, explore_selections, first_hitting_time, policy_rng, simulate,
)
from .stochastic import (
    HittingTimeSample, RandomGraphModel, empirical_survival, rho_details, simulate_stochastic,
    survival_check, window_length,
)

__all__ = [
    "ExperimentSpec", "TrialResult", "ScalingCell", "ScalingResult", "HistogramResult",
    "SuiteReport", "CounterexampleReport", "SUITES",
    "run_trials", "run_histogram_experiment", "run_scaling_experiment",
    "run_theorem_suite", "run_counterexample_suite", "fit_line",
    "write_csv", "format_value", "trials_csv", "jump_bound",
]

HIT_COLUMNS = ("trial_id", "seed", "n_agents", "graph_family", "depth", "p", "r_min",
               "hit_time", "window_index", "censored")
MONITOR_ALL_BELOW = 30


# -- output helpers ---------------------------------------------------------------------

def format_value(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return "%.15g" % x
    return str(x)


def write_csv(path: str | Path | None, meta: dict, columns: Sequence[str],
              rows: Iterable[Sequence]) -> str:
    """Render (and optionally write) a CSV whose first line is ``# <json metadata>``."""
    buf = io.StringIO()
    buf.write("# " + json.dumps(meta, sort_keys=True, default=_json_default) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format_value(x) for x in row])
    text = buf.getvalue()
    if path is not None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)
    return text


def _json_default(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if hasattr(x, "value"):
        return x.value
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _dump_json(path: str | Path | None, doc: dict) -> str:
    text = json.dumps(doc, sort_keys=True, indent=2, default=_json_default) + "\n"
    if path is not None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)
    return text


def _rng(*key: int) -> np.random.Generator:
    return np.random.default_rng([int(k) for k in key])


def _tag(name: str) -> int:
    return zlib.crc32(name.encode())


def _open_uniform(rng: np.random.Generator, n: int, lo: float, hi: float) -> tuple[float, ...]:
    """Uniform draws strictly inside ``(lo, hi)``."""
    x = rng.uniform(lo, hi, n)
    x = np.clip(x, np.nextafter(lo, hi), np.nextafter(hi, lo))
    return tuple(float(v) for v in x)


def _map(fn: Callable, items: Sequence, jobs: int) -> list:
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def jump_bound(r: Sequence[float]) -> tuple[float, int]:
    """Window fire-count bounds: ``N / r_min`` and ``sum(ceil(1 / r_i))``.

    Consecutive fires of agent ``i`` are at least ``r_i * T`` apart (it must
    flow past ``r_i`` before a pulse can push it to 1), which gives the second
    one.
    """
    r_min = min(r)
    if r_min <= 0:
        return math.inf, 0
    return len(r) / r_min, sum(math.ceil(1.0 / x - 1e-12) for x in r)


# -- specs and Monte Carlo ---------------------------------------------------------------

@dataclass
class ExperimentSpec:
    name: str = "experiment"
    family: str | None = None
    sizes: list[int] = field(default_factory=list)
    graph_path: str | None = None
    r_low: float = 0.0
    r_high: float = 1.0
    r_fixed: list[float] | None = None
    p: float = 0.5
    T: float = 1.0
    trials: int = 100
    horizon_windows: float = 500.0
    seed: int = 0
    tie_policy: str = "to_zero"
    firing_order: str = "ascending"
    out_dir: str | None = None

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.family is not None and not self.sizes:
            raise ValueError("a graph family needs a non-empty size list")
        if list(self.sizes) != sorted(self.sizes):
            raise ValueError("sizes must be ascending")
        if not 0.0 <= self.r_low < self.r_high <= 1.0:
            raise ValueError("need 0 <= r_low < r_high <= 1")
        if self.r_fixed is not None and any(not 0.0 <= x <= 1.0 for x in self.r_fixed):
            raise ValueError("fixed partition entries must lie in [0, 1]")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentSpec":
        known = set(cls.__dataclass_fields__)
        extra = set(doc) - known
        if extra:
            raise ValueError(f"unknown spec keys: {sorted(extra)}")
        return cls(**doc)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class TrialResult:
    trial_id: int
    seed: int
    n_agents: int
    graph_family: str
    depth: int
    p: float
    r_min: float
    hit_time: float | None
    window_index: int | None
    jumps: int
    v_violations: int = 0
    max_window_fires: int = 0
    jump_bound: float = math.inf
    monitored: bool = False

    @property
    def censored(self) -> bool:
        return self.hit_time is None

    def row(self) -> tuple:
        return (self.trial_id, self.seed, self.n_agents, self.graph_family, self.depth, self.p,
                self.r_min, self.hit_time, self.window_index, self.censored)


@dataclass(frozen=True)
class _TrialJob:
    g: Digraph
    family: str
    depth: int
    p: float
    r_low: float
    r_high: float
    r_fixed: tuple[float, ...] | None
    T: float
    horizon: float
    seed: int
    cell: int
    trial_id: int
    tie_policy: str
    firing_order: str
    monitor: bool


def _run_trial(job: _TrialJob) -> TrialResult:
    n = job.g.n
    rng = _rng(job.seed, job.cell, job.trial_id, 2)
    r = _open_uniform(rng, n, job.r_low, job.r_high)
    if job.r_fixed is not None:
        r = job.r_fixed
    init = _open_uniform(rng, n, 0.0, 1.0)
    cfg = SyncConfig(r, T=job.T, tie_policy=job.tie_policy, firing_order=job.firing_order,
                     seed=job.seed)
    model = RandomGraphModel(job.g, job.p, seed=job.seed)
    res = first_hitting_time(job.g, cfg, init, job.horizon, pulse_filter=model.sampler(job.trial_id),
                             rng=policy_rng(job.seed, job.trial_id), monitor=job.monitor,
                             track_windows=job.monitor)
    sample = HittingTimeSample.from_hit(res.hit_time, res.jumps, window_length(job.depth, job.T))
    return TrialResult(job.trial_id, job.seed, n, job.family, job.depth, job.p, min(r),
                       sample.hit_time, sample.window_index, res.jumps, res.v_violations,
                       res.max_window_fires, jump_bound(r)[0], job.monitor)


def run_trials(g: Digraph, family: str, spec: ExperimentSpec, cell: int = 0,
               jobs: int = 1, monitor: str = "auto") -> list[TrialResult]:
    """Independent random-delivery trials on one graph, each redrawing r and the init.

    Trial ids are ``cell * trials + k``; every trial owns its random streams.
    ``monitor="auto"`` checks the Lyapunov value and window fire counts on
    every trial for small graphs and on the first trial of each cell above.
    """
    depth = g.analysis.depth
    horizon = spec.horizon_windows * window_length(depth, spec.T)
    items = []
    for k in range(spec.trials):
        tid = cell * spec.trials + k
        if monitor == "auto":
            mon = g.n <= MONITOR_ALL_BELOW or k == 0
        else:
            mon = monitor == "all"
        fixed = tuple(float(x) for x in spec.r_fixed) if spec.r_fixed is not None else None
        items.append(_TrialJob(g, family, depth, spec.p, spec.r_low, spec.r_high, fixed, spec.T, horizon,
                               spec.seed, cell, tid, spec.tie_policy, spec.firing_order, mon))
    return _map(_run_trial, items, jobs)


def trials_csv(path, trials: Sequence[TrialResult], meta: dict) -> str:
    return write_csv(path, meta, HIT_COLUMNS, (t.row() for t in trials))


# -- histogram -------------------------------------------------------------------------------

@dataclass
class HistogramResult:
    graph: Digraph
    T_window: float
    frequencies: dict[int, int]
    censored: int
    trials: list[TrialResult]
    rho: dict
    survival_empirical: list[float]
    survival_bound: list[float]

    def rows(self) -> list[tuple]:
        top = max(self.frequencies, default=0)
        out = []
        for n in range(1, top + 1):
            emp = self.survival_empirical[n - 1] if n <= len(self.survival_empirical) else 0.0
            b = self.survival_bound[n - 1] if n <= len(self.survival_bound) else None
            out.append((n, self.frequencies.get(n, 0), emp, b))
        return out

    def bound_report(self) -> dict:
        return {"rho": self.rho["rho"], "T_window": self.T_window,
                "survival_empirical": self.survival_empirical,
                "survival_bound": self.survival_bound, "rho_details": self.rho,
                "censored": self.censored}


def run_histogram_experiment(spec: ExperimentSpec | None = None, graph: Digraph | None = None,
                             jobs: int = 1) -> HistogramResult:
    """Window index of the first hitting time over many seeded trials.

    Defaults: the shipped 12-vertex depth-8 rooted digraph, T = 1 (window 9),
    p = 0.5, r uniform in (0, 1) redrawn per trial, 1000 trials.
    """
    spec = spec or ExperimentSpec(name="histogram", trials=1000)
    if graph is None:
        graph = load_graph(spec.graph_path) if spec.graph_path else histogram_standin_graph()
    a = graph.analysis
    if not a.is_rooted:
        raise NotRooted("the histogram experiment needs a rooted graph")
    family = spec.family or ("file" if spec.graph_path else "standin12")
    trials = run_trials(graph, family, spec, jobs=jobs)
    tw = window_length(a.depth, spec.T)
    freq: dict[int, int] = {}
    for t in trials:
        if t.window_index is not None:
            freq[t.window_index] = freq.get(t.window_index, 0) + 1
    censored = sum(t.censored for t in trials)
    samples = [HittingTimeSample(t.hit_time, t.window_index, t.jumps, tw) for t in trials]
    top = max(freq, default=1)
    # the bound uses the smallest sampled r over all trials, the weakest guarantee in the batch
    r_floor = min(t.r_min for t in trials)
    rho = rho_details(graph, spec.p, [r_floor] * graph.n, a.depth).to_dict()
    surv = empirical_survival(samples, top)
    bound = [rho["rho"] ** n for n in range(1, top + 1)]
    res = HistogramResult(graph, tw, dict(sorted(freq.items())), censored, trials, rho, surv, bound)
    if spec.out_dir:
        out = Path(spec.out_dir)
        meta = _meta(spec, graph, note="r redrawn uniformly per trial")
        write_csv(out / f"{spec.name}_histogram.csv", meta, ("x", "y", "survival", "bound"), res.rows())
        trials_csv(out / f"{spec.name}_hits.csv", trials, meta)
        _dump_json(out / f"{spec.name}_bound.json", res.bound_report())
    return res


def _meta(spec: ExperimentSpec, graph: Digraph | None = None, **extra) -> dict:
    resolved = spec.to_dict()
    resolved.pop("out_dir", None)
    doc = {"spec": resolved}
    if graph is not None:
        a = graph.analysis
        doc["graph"] = {"n": graph.n, "edges": [list(e) for e in graph.edges],
                        "depth": a.depth, "depth_kind": a.depth_kind.value}
    doc.update(extra)
    return doc


# -- scaling -------------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalingCell:
    n: int
    mean: float | None
    std: float | None
    se: float | None
    count: int
    censored: int


@dataclass
class ScalingResult:
    family: str
    cells: list[ScalingCell]
    slope: float
    intercept: float
    slope_se: float
    trials: list[TrialResult]

    def top_half_ratio(self) -> float:
        """max / min of the cell means over the upper half of the size range."""
        lo, hi = self.cells[0].n, self.cells[-1].n
        mid = (lo + hi) / 2
        means = [c.mean for c in self.cells if c.n >= mid and c.mean is not None]
        return max(means) / min(means)

    def rows(self) -> list[tuple]:
        return [(c.n, c.mean, c.se, c.std, c.count, c.censored,
                 self.slope * c.n + self.intercept) for c in self.cells]

    def summary(self) -> dict:
        return {"family": self.family, "slope": self.slope, "intercept": self.intercept,
                "slope_se": self.slope_se, "top_half_ratio": self.top_half_ratio(),
                "cells": [asdict(c) for c in self.cells]}


def fit_line(x: Sequence[float], y: Sequence[float], se: Sequence[float] | None = None
             ) -> tuple[float, float, float]:
    """Least-squares line through the cell means; slope SE propagated from per-cell SEs."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if len(x) < 2:
        raise ValueError("need at least two points for a fit")
    slope, intercept = np.polyfit(x, y, 1)
    if se is None:
        return float(slope), float(intercept), math.nan
    w = (x - x.mean()) / ((x - x.mean()) ** 2).sum()
    return float(slope), float(intercept), float(math.sqrt((w ** 2 * np.asarray(se, float) ** 2).sum()))


def run_scaling_experiment(family: str, sizes: Sequence[int] | None = None,
                           spec: ExperimentSpec | None = None, jobs: int = 1) -> ScalingResult:
    """Mean first hitting time versus network size for one graph family.

    Defaults: N = 10, 20, ..., 100, 100 trials per size, p = 0.5, r uniform in
    (0, 1) redrawn per trial.
    """
    spec = spec or ExperimentSpec(name=f"scaling_{family}", family=family,
                                  sizes=list(range(10, 101, 10)))
    sizes = list(sizes) if sizes is not None else list(spec.sizes)
    if not sizes or sizes != sorted(sizes):
        raise ValueError("sizes must be a non-empty ascending list")
    cells = []
    trials_all: list[TrialResult] = []
    for ci, n in enumerate(sizes):
        g = generate(family, n, seed=spec.seed)
        trials = run_trials(g, family, spec, cell=ci, jobs=jobs)
        trials_all.extend(trials)
        hits = [t.hit_time for t in trials if t.hit_time is not None]
        cen = len(trials) - len(hits)
        if hits:
            arr = np.asarray(hits)
            std = float(arr.std(ddof=1)) if len(hits) > 1 else 0.0
            cells.append(ScalingCell(n, float(arr.mean()), std, std / math.sqrt(len(hits)),
                                     len(hits), cen))
        else:
            cells.append(ScalingCell(n, None, None, None, 0, cen))
    fit_cells = [c for c in cells if c.mean is not None]
    slope, intercept, slope_se = fit_line([c.n for c in fit_cells], [c.mean for c in fit_cells],
                                          [c.se for c in fit_cells])
    res = ScalingResult(family, cells, slope, intercept, slope_se, trials_all)
    if spec.out_dir:
        out = Path(spec.out_dir)
        meta = _meta(spec, note="r redrawn uniformly per trial", sizes=sizes, family=family)
        write_csv(out / f"{spec.name}_cells.csv", meta,
                  ("x", "y", "yerr", "std", "count", "censored", "fit"), res.rows())
        trials_csv(out / f"{spec.name}_hits.csv", trials_all, meta)
        _dump_json(out / f"{spec.name}_summary.json", res.summary())
    return res


# -- theorem harnesses -----------------------------------------------------------------------

SUITES = ("dag_bound", "dag_zero", "strong_tight", "strong_relaxed", "quasi_acyclic",
          "random_delivery", "jump_window", "robustness", "exhaustive")


@dataclass
class SuiteReport:
    name: str
    instances: int = 0
    runs: int = 0
    violations: list[dict] = field(default_factory=list)
    zeno: int = 0
    v_violations: int = 0
    jump_bound_violations: list[dict] = field(default_factory=list)
    corrected_jump_bound_violations: int = 0
    worst_ratio: float = 0.0
    stats: dict = field(default_factory=dict)
    records: list = field(default_factory=list, repr=False)

    @property
    def passed(self) -> bool:
        if self.name == "jump_window":
            return not self.jump_bound_violations
        return not self.violations

    def to_dict(self) -> dict:
        return {"suite": self.name, "passed": self.passed, "instances": self.instances,
                "runs": self.runs, "violations": self.violations, "zeno": self.zeno,
                "v_violations": self.v_violations,
                "jump_bound_violations": self.jump_bound_violations,
                "corrected_jump_bound_violations": self.corrected_jump_bound_violations,
                "worst_ratio": self.worst_ratio, "stats": self.stats}


def _policies(k: int) -> tuple[TiePolicy, FiringOrder]:
    return list(TiePolicy)[k % 3], list(FiringOrder)[(k // 3) % 3]


def _init(rng: np.random.Generator, r: Sequence[float], k: int) -> tuple[float, ...]:
    """Uniform inits, with every fifth instance on the thresholds and every fifth duplicated."""
    n = len(r)
    kind = k % 5
    if kind == 3:
        return tuple(float(x) for x in r)
    if kind == 4:
        vals = rng.uniform(0, 1, max(1, n // 2))
        x = [float(vals[int(i)]) for i in rng.integers(0, len(vals), n)]
        x[int(rng.integers(n))] = 1.0
        return tuple(x)
    return tuple(float(v) for v in rng.uniform(0, 1, n))


def _bundle(suite: str, k: int, seed: int, g: Digraph, cfg: SyncConfig, init, **extra) -> dict:
    doc = {"suite": suite, "instance": k, "seed": seed, "n": g.n,
           "edges": [list(e) for e in g.edges], "config": cfg.to_dict(), "init": list(init)}
    doc.update(extra)
    return doc


def _check_run(rep: SuiteReport, suite: str, k: int, seed: int, g: Digraph, cfg: SyncConfig,
               init, bound: float, keep: bool) -> None:
    rep.runs += 1
    try:
        rec = simulate(g, cfg, init, bound + cfg.T)
    except ZenoDetected as exc:
        rep.zeno += 1
        rep.violations.append(_bundle(suite, k, seed, g, cfg, init, kind="zeno", t=exc.t))
        return
    if keep:
        rep.records.append(rec)
    hit = rec.hit_time
    if hit is None or hit > bound + TIME_EPS:
        rep.violations.append(_bundle(suite, k, seed, g, cfg, init, kind="late",
                                      hit_time=hit, bound=bound))
    elif bound > 0:
        rep.worst_ratio = max(rep.worst_ratio, hit / bound)
    if rec.left_sync_set:
        rep.violations.append(_bundle(suite, k, seed, g, cfg, init, kind="left_sync_set"))
    bad_v = rec.lyapunov_violations()
    if bad_v:
        rep.v_violations += len(bad_v)
        rep.violations.append(_bundle(suite, k, seed, g, cfg, init, kind="lyapunov_increase",
                                      events=bad_v[:5]))
    stated, corrected = jump_bound(cfg.r)
    if cfg.r_min > 0:
        m = rec.max_window_fires()
        if m > stated + 1e-9:
            rep.jump_bound_violations.append(_bundle(suite, k, seed, g, cfg, init, kind="jump_window",
                                                     fires=m, bound=stated))
        if m > corrected:
            rep.corrected_jump_bound_violations += 1


def _deterministic_suite(name: str, instances: int, seed: int, keep: bool,
                         make: Callable[[int, np.random.Generator], tuple]) -> SuiteReport:
    rep = SuiteReport(name)
    for k in range(instances):
        rng = _rng(seed, _tag(name), k)
        g, r, bound = make(k, rng)
        tie, order = _policies(k)
        cfg = SyncConfig(r, tie_policy=tie, firing_order=order, seed=seed + k)
        init = _init(rng, r, k)
        rep.instances += 1
        _check_run(rep, name, k, seed, g, cfg, init, bound, keep)
    return rep


def _dag_bound(k, rng):
    n = int(rng.integers(2, 13))
    g = generate("random_dag", n, seed=int(rng.integers(2**31)))
    r = tuple(float(x) for x in 1.0 - rng.uniform(0, 1, n))  # (0, 1]
    return g, r, (g.analysis.depth + 1) * 1.0


def _dag_zero(k, rng):
    n = int(rng.integers(2, 13))
    g = generate("random_dag", n, seed=int(rng.integers(2**31)))
    return g, (0.0,) * n, 1.0


def _strong_tight(k, rng):
    n = int(rng.integers(2, 11))
    g = generate("strongly_connected", n, seed=int(rng.integers(2**31)))
    return g, _open_uniform(rng, n, 0.0, 1.0 / n), 1.0


def _strong_relaxed(k, rng):
    n = int(rng.integers(2, 11))
    g = generate("strongly_connected", n, seed=int(rng.integers(2**31)))
    return g, _open_uniform(rng, n, 0.0, 1.0 / (n - 1)), 2.0


def _quasi_acyclic(k, rng):
    n = int(rng.integers(2, 13))
    g = generate("quasi_acyclic", n, seed=int(rng.integers(2**31)))
    a = g.analysis
    size = a.root_component_size
    cap = 1.0 / (size - 1) if size > 1 else 1.0
    r = [float(x) for x in 1.0 - rng.uniform(0, 1, n)]
    for v in a.root_set:
        r[v] = _open_uniform(rng, 1, 0.0, cap)[0] if size > 1 else r[v]
    depth_c = a.condensed.analysis.depth if a.condensed is not None else a.depth
    return g, tuple(r), (depth_c + 1) * 1.0


def _zero_threshold_cycles(rep: SuiteReport, instances: int, seed: int) -> None:
    """r = 0 with ToOne ties on graphs with a cycle: an agent on a cycle starting at 1 never stops."""
    fams = ("cycle", "strongly_connected", "random_rooted", "complete")
    for k in range(instances):
        rng = _rng(seed, _tag("dag_zero-cycles"), k)
        n = int(rng.integers(2, 9))
        g = generate(fams[k % len(fams)], n, seed=int(rng.integers(2**31)), back_prob=0.4)
        a = g.analysis
        if a.is_acyclic:
            continue
        on_cycle = [v for v in range(n) if sum(1 for u in range(n) if a.scc_assignment[u] == a.scc_assignment[v]) > 1]
        start = on_cycle[int(rng.integers(len(on_cycle)))]
        init = [float(x) for x in rng.uniform(0, 1, n)]
        init[start] = 1.0
        cfg = SyncConfig((0.0,) * n, tie_policy=TiePolicy.TO_ONE,
                         firing_order=list(FiringOrder)[k % 3], seed=seed + k)
        rep.runs += 1
        try:
            simulate(g, cfg, init, 2.0, record_events=False)
        except ZenoDetected:
            rep.stats["necessity_zeno"] = rep.stats.get("necessity_zeno", 0) + 1
            continue
        rep.violations.append(_bundle("dag_zero-cycles", k, seed, g, cfg, init, kind="no_zeno"))


def _random_delivery_suite(instances: int, seed: int, paths: int, p: float, horizon_windows: float,
                jobs: int) -> SuiteReport:
    rep = SuiteReport("random_delivery")
    per_graph = []
    for k in range(instances):
        rng = _rng(seed, _tag("random_delivery"), k)
        if k == 0:
            g, family = feeder_pair_graph(), "feeder_pair"
        else:
            g, family = generate("random_rooted", int(rng.integers(2, 11)),
                                 seed=int(rng.integers(2**31))), "random_rooted"
        r_lo_hi = 1.0 - rng.uniform(0, 1, g.n)
        r = tuple(float(x) for x in r_lo_hi)
        a = g.analysis
        tw = window_length(a.depth, 1.0)
        cfg = SyncConfig(r, seed=seed)
        model = RandomGraphModel(g, p, seed=int(rng.integers(2**31)))
        samples = []
        rep.instances += 1
        for path in range(paths):
            init = tuple(float(x) for x in rng.uniform(0, 1, g.n))
            _, s = simulate_stochastic(model, cfg, init, horizon_windows * tw, path,
                                       depth=a.depth, record=False)
            samples.append(s)
            rep.runs += 1
        # window fire counts and the Lyapunov monitor on the first path of every graph
        init0 = tuple(float(x) for x in _rng(seed, k, 99).uniform(0, 1, g.n))
        mon = first_hitting_time(g, cfg, init0, horizon_windows * tw,
                                 pulse_filter=model.sampler(paths), rng=policy_rng(model.seed, paths),
                                 monitor=True, track_windows=True)
        rep.v_violations += mon.v_violations
        stated, corrected = jump_bound(r)
        if mon.max_window_fires > stated + 1e-9:
            rep.jump_bound_violations.append(_bundle("random_delivery", k, seed, g, cfg, init0, kind="jump_window",
                                                     fires=mon.max_window_fires, bound=stated))
        if mon.max_window_fires > corrected:
            rep.corrected_jump_bound_violations += 1
        if mon.v_violations:
            rep.violations.append(_bundle("random_delivery", k, seed, g, cfg, init0, kind="lyapunov_increase"))
        censored = sum(s.censored for s in samples)
        rho = rho_details(g, p, r, a.depth)
        top = max((s.window_index for s in samples if s.window_index), default=1)
        bad = survival_check(samples, rho.rho, top)
        if censored:
            rep.violations.append(_bundle("random_delivery", k, seed, g, cfg, [], kind="censored",
                                          censored=censored, p=p, model_seed=model.seed))
        for n_w, emp, allowed in bad:
            rep.violations.append(_bundle("random_delivery", k, seed, g, cfg, [], kind="survival_bound",
                                          window=n_w, empirical=emp, allowed=allowed, p=p,
                                          model_seed=model.seed))
        per_graph.append({"instance": k, "family": family, "n": g.n, "depth": a.depth,
                          "rho": rho.rho, "log_one_minus_rho": rho.log_one_minus_rho,
                          "saturated": rho.saturated, "censored": censored,
                          "max_window_index": top,
                          "mean_hit": float(np.mean([s.hit_time for s in samples if not s.censored]))
                          if censored < len(samples) else None})
    rep.stats["graphs"] = per_graph
    rep.stats["saturated_rho"] = sum(d["saturated"] for d in per_graph)
    return rep


def _jump_window_suite(instances: int, seed: int) -> SuiteReport:
    rep = SuiteReport("jump_window")
    fams = ("random_dag", "random_rooted", "strongly_connected", "quasi_acyclic", "path", "complete")
    for k in range(instances):
        rng = _rng(seed, _tag("jump_window"), k)
        n = int(rng.integers(2, 11))
        g = generate(fams[k % len(fams)], n, seed=int(rng.integers(2**31)))
        r = tuple(float(x) for x in 1.0 - rng.uniform(0, 1, n))
        tie, order = _policies(k)
        cfg = SyncConfig(r, tie_policy=tie, firing_order=order, seed=seed + k)
        init = _init(rng, r, k)
        rep.instances += 1
        rep.runs += 1
        try:
            rec = simulate(g, cfg, init, 5.0, record_events=False)
        except ZenoDetected:
            rep.zeno += 1
            continue
        stated, corrected = jump_bound(r)
        m = rec.max_window_fires()
        if m > stated + 1e-9:
            rep.jump_bound_violations.append(_bundle("jump_window", k, seed, g, cfg, init,
                                                     kind="jump_window", fires=m, bound=stated))
        if m > corrected:
            rep.corrected_jump_bound_violations += 1
            rep.violations.append(_bundle("jump_window", k, seed, g, cfg, init, kind="corrected_bound",
                                          fires=m, bound=corrected))
    return rep


def _robustness_suite(instances: int, seed: int, e_star: float = 1e-4, nu: float = 1e-2) -> SuiteReport:
    """Perturbed rates and thresholds on the fixed-time harness; V must settle below ``nu``."""
    rep = SuiteReport("robustness")
    worst = 0.0
    for k in range(instances):
        rng = _rng(seed, _tag("robustness"), k)
        g, r, bound = _dag_bound(k, rng)
        tie, order = _policies(k)
        cfg = SyncConfig(r, tie_policy=tie, firing_order=order, seed=seed + k)
        init = tuple(float(v) for v in rng.uniform(0, 1, g.n))
        dist = Disturbance.random(g.n, e_star, rng)
        rep.instances += 1
        rep.runs += 1
        settle = bound + 1.0
        rec = simulate(g, cfg, init, settle + 10.0, dist=dist)
        tail = [e.V for e in rec.events if e.t >= settle]
        peak = max(tail, default=0.0)
        worst = max(worst, peak)
        if peak >= nu:
            rep.violations.append(_bundle("robustness", k, seed, g, cfg, init, kind="not_practical",
                                          peak=peak, nu=nu, e_star=e_star,
                                          freq_offsets=list(dist.freq_offsets),
                                          threshold_offsets=list(dist.threshold_offsets)))
    rep.stats.update({"e_star": e_star, "nu": nu, "worst_tail_V": worst})
    return rep


def _exhaustive_suite(instances: int, seed: int) -> SuiteReport:
    """Every firing order and tie branch on small DAGs, against the fixed-time bound."""
    rep = SuiteReport("exhaustive")
    grid = (0.0, 0.25, 0.5, 0.75, 1.0)
    paths = 0
    for k in range(instances):
        rng = _rng(seed, _tag("exhaustive"), k)
        n = int(rng.integers(2, 5))
        g = generate("random_dag", n, seed=int(rng.integers(2**31)))
        r = tuple(float(x) for x in rng.choice(grid[1:], n))
        init = tuple(float(x) for x in rng.choice(grid, n))
        bound = (g.analysis.depth + 1) * 1.0
        cfg = SyncConfig(r)
        res = explore_selections(g, cfg, init, bound + TIME_EPS)
        rep.instances += 1
        rep.runs += res.paths
        paths += res.paths
        if not res.all_hit:
            rep.violations.append(_bundle("exhaustive", k, seed, g, cfg, init, kind="late_path",
                                          unhit=res.unhit_paths, zeno=res.zeno_paths,
                                          truncated=res.truncated))
        elif res.worst_hit is not None:
            rep.worst_ratio = max(rep.worst_ratio, res.worst_hit / bound)
    rep.stats["paths"] = paths
    return rep


def run_theorem_suite(which: str, instances: int | None = None, seed: int = 0, *,
                      keep_records: bool = False, paths: int = 200, p: float = 0.5,
                      horizon_windows: float = 500.0, jobs: int = 1,
                      out_path: str | Path | None = None) -> SuiteReport:
    """Randomized harness for one guarantee; violations come back as reproduction bundles."""
    key = which.lower().replace("-", "_")
    defaults = {"dag_bound": 500, "dag_zero": 500, "strong_relaxed": 200, "strong_tight": 200,
                "quasi_acyclic": 300, "random_delivery": 50, "jump_window": 500, "robustness": 100,
                "exhaustive": 200}
    if key not in defaults:
        raise ValueError(f"unknown suite {which!r}; choose from {', '.join(SUITES)}")
    count = defaults[key] if instances is None else instances
    makers = {"dag_bound": _dag_bound, "dag_zero": _dag_zero, "strong_tight": _strong_tight,
              "strong_relaxed": _strong_relaxed, "quasi_acyclic": _quasi_acyclic}
    if key in makers:
        rep = _deterministic_suite(key, count, seed, keep_records, makers[key])
        if key == "dag_zero":
            _zero_threshold_cycles(rep, max(20, count // 5), seed)
    elif key == "random_delivery":
        rep = _random_delivery_suite(count, seed, paths, p, horizon_windows, jobs)
    elif key == "jump_window":
        rep = _jump_window_suite(count, seed)
    elif key == "robustness":
        rep = _robustness_suite(count, seed)
    else:
        rep = _exhaustive_suite(count, seed)
    if out_path is not None:
        _dump_json(out_path, rep.to_dict())
    return rep


# -- counterexamples ---------------------------------------------------------------------------

@dataclass
class CounterexampleReport:
    fixtures: dict[str, dict]
    passed: bool

    def to_dict(self) -> dict:
        return {"passed": self.passed, "fixtures": self.fixtures}


def _first_cascade_end(rec) -> int:
    seen_fire = False
    for idx, e in enumerate(rec.events):
        if e.kind == "fire":
            seen_fire = True
        elif seen_fire and e.kind == "flow":
            return idx
    return len(rec.events)


def run_counterexample_suite(seed: int = 0, paths: int = 1000, horizon: float = 50.0,
                             stochastic_horizon: float = 200.0, p: float = 0.5,
                             which: Sequence[str] = COUNTEREXAMPLES,
                             out_path: str | Path | None = None) -> CounterexampleReport:
    """Deterministic runs never synchronize; random delivery rescues the rooted ones."""
    out = {}
    ok = True
    for name in which:
        g, cfg, init = counterexample_fixture(name)
        rec = simulate(g, cfg, init, horizon * cfg.T, detect_recurrence=True)
        start = _first_cascade_end(rec)
        tail = [e.V for e in rec.events[start:]]
        v_const = bool(tail) and max(tail) - min(tail) <= 1e-9 and min(tail) > 0
        doc = {"hit_time": rec.hit_time, "recurrence": list(rec.recurrence) if rec.recurrence else None,
               "V_after_first_cascade": tail[0] if tail else None, "V_constant": v_const,
               "periodic": rec.recurrence is not None, "jumps": rec.jumps,
               "lyapunov_violations": len(rec.lyapunov_violations()),
               "max_window_fires": rec.max_window_fires(), "jump_bound": jump_bound(cfg.r)[0]}
        good = rec.hit_time is None and v_const and rec.recurrence is not None
        if name.startswith("pair"):
            model = RandomGraphModel(g, p, seed=seed)
            hits = 0
            for tr in range(paths):
                _, s = simulate_stochastic(model, cfg, init, stochastic_horizon * cfg.T, tr, record=False)
                hits += not s.censored
            doc.update({"stochastic_paths": paths, "stochastic_hits": hits,
                        "stochastic_hit_fraction": hits / paths if paths else None})
            good = good and paths > 0 and hits >= 0.99 * paths
        doc["passed"] = good
        ok = ok and good
        out[name] = doc
    rep = CounterexampleReport(out, ok)
    if out_path is not None:
        _dump_json(out_path, rep.to_dict())
    return rep
