"""Random pulse delivery: each out-edge of a firing agent is active with probability p.

An inactive edge leaves the target's phase untouched; an active one applies
the binary phase rule.  Edge draws come from a per-trajectory counter-based
stream keyed by ``(seed, trial_id)`` and are consumed only when an agent fires,
in canonical out-edge order, so tie and ordering policies never see them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .digraph import Digraph
from .hybrid import (
    TIME_EPS, SyncConfig, TrajectoryRecord, first_hitting_time, policy_rng, simulate,
)

__all__ = [
    "StochasticError", "BadParams", "NotSubgraph",
    "RandomGraphModel", "EdgeSampler", "HittingTimeSample", "RhoBound",
    "edge_stream", "draw_active_out_edges", "draw_feasible_graph",
    "feasible_graph_probability", "simulate_stochastic", "rho_bound", "rho_details",
    "window_length", "window_index", "survival_bound", "empirical_survival",
    "survival_check",
]

EDGE_STREAM = 0
_BLOCK = 4096


class StochasticError(Exception):
    pass


class BadParams(StochasticError, ValueError):
    pass


class NotSubgraph(StochasticError, ValueError):
    pass


def edge_stream(seed: int, trial_id: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, trial_id, EDGE_STREAM])))


@dataclass(frozen=True)
class RandomGraphModel:
    """Base digraph plus edge-activation probability (scalar or one per agent).

    ``utility=True`` admits the degenerate values 0 and 1, which fall outside
    the hypothesis of the almost-sure synchronization result.
    """

    base: Digraph
    p: float | tuple[float, ...]
    seed: int = 0
    utility: bool = False

    def __post_init__(self) -> None:
        if isinstance(self.p, (int, float)):
            ps = (float(self.p),) * self.base.n
        else:
            ps = tuple(float(x) for x in self.p)
            if len(ps) != self.base.n:
                raise BadParams(f"expected {self.base.n} probabilities, got {len(ps)}")
        for x in ps:
            if self.utility:
                if not 0.0 <= x <= 1.0:
                    raise BadParams(f"probability {x} outside [0, 1]")
            elif not 0.0 < x < 1.0:
                raise BadParams(f"probability {x} outside (0, 1); pass utility=True for 0 or 1")
        object.__setattr__(self, "_ps", ps)

    @property
    def probabilities(self) -> tuple[float, ...]:
        return self._ps

    @property
    def p_min(self) -> float:
        return min(self._ps)

    @property
    def q_min(self) -> float:
        return min(1.0 - x for x in self._ps)

    def sampler(self, trial_id: int = 0) -> "EdgeSampler":
        return EdgeSampler(self, trial_id)


class EdgeSampler:
    """Pulse filter backed by the model's edge stream for one trajectory."""

    def __init__(self, model: RandomGraphModel, trial_id: int = 0):
        self.model = model
        self.trial_id = trial_id
        self._gen = edge_stream(model.seed, trial_id)
        self._ps = model.probabilities
        self._buf: list[float] = []
        self._pos = 0
        self.draws = 0

    def uniform(self) -> float:
        if self._pos == len(self._buf):
            self._buf = self._gen.random(_BLOCK).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        self.draws += 1
        return u

    def __call__(self, agent: int, targets: Sequence[int]) -> list[bool]:
        p = self._ps[agent]
        if p >= 1.0:
            return [True] * len(targets)
        if p <= 0.0:
            return [False] * len(targets)
        return [self.uniform() < p for _ in targets]


def draw_active_out_edges(model: RandomGraphModel, firing_agent: int,
                          sampler: EdgeSampler | None = None) -> frozenset[tuple[int, int]]:
    if not 0 <= firing_agent < model.base.n:
        raise ValueError(f"agent {firing_agent} out of range")
    sampler = sampler if sampler is not None else model.sampler()
    targets = model.base.out_neighbors[firing_agent]
    flags = sampler(firing_agent, targets)
    return frozenset((firing_agent, k) for k, on in zip(targets, flags) if on)


def draw_feasible_graph(model: RandomGraphModel, sampler: EdgeSampler | None = None) -> Digraph:
    """One whole-graph draw: every base edge kept independently, canonical order."""
    sampler = sampler if sampler is not None else model.sampler()
    kept = []
    for (i, k) in model.base.edges:
        p = model.probabilities[i]
        if p >= 1.0 or (p > 0.0 and sampler.uniform() < p):
            kept.append((i, k))
    return Digraph(model.base.n, tuple(kept))


def feasible_graph_probability(base: Digraph, subgraph_edges: Iterable[tuple[int, int]],
                               p: float) -> float:
    sub = {tuple(e) for e in subgraph_edges}
    missing = sub - set(base.edges)
    if missing:
        raise NotSubgraph(f"edges not in base graph: {sorted(missing)}")
    if not 0.0 <= p <= 1.0:
        raise BadParams("p must lie in [0, 1]")
    return p ** len(sub) * (1.0 - p) ** (base.num_edges - len(sub))


# -- hitting times ----------------------------------------------------------------------

def window_length(depth: int, T: float = 1.0) -> float:
    return (depth + 1) * T


def window_index(hit_time: float, T_window: float) -> int:
    """Smallest n >= 1 with ``hit_time <= n * T_window`` (with event-time slack)."""
    return max(1, math.ceil((hit_time - TIME_EPS) / T_window))


@dataclass(frozen=True)
class HittingTimeSample:
    hit_time: float | None
    window_index: int | None
    jumps_to_hit: int
    T_window: float

    @property
    def censored(self) -> bool:
        return self.hit_time is None

    @classmethod
    def from_hit(cls, hit_time: float | None, jumps: int, T_window: float) -> "HittingTimeSample":
        if hit_time is None:
            return cls(None, None, jumps, T_window)
        return cls(hit_time, window_index(hit_time, T_window), jumps, T_window)


def simulate_stochastic(model: RandomGraphModel, cfg: SyncConfig, init: Sequence[float],
                        horizon: float, trial_id: int = 0, *, depth: int | None = None,
                        record: bool = True, monitor: bool = False,
                        ) -> tuple[TrajectoryRecord | None, HittingTimeSample]:
    """One random-delivery trajectory and its first hitting time.

    With ``record=True`` the full event log comes from the reference executor
    (run to ``horizon``); otherwise the fast executor stops at the hit.  Both
    consume identical random numbers, so the hitting times agree.
    """
    g = model.base
    if depth is None:
        depth = g.analysis.depth
    tw = window_length(depth, cfg.T)
    edges = model.sampler(trial_id)
    prng = policy_rng(model.seed, trial_id)
    if record:
        rec = simulate(g, cfg, init, horizon, pulse_filter=edges, rng=prng)
        hit = rec.hit_time
        jumps = sum(1 for t in rec.fire_times if hit is not None and t <= hit) if hit is not None else rec.jumps
        return rec, HittingTimeSample.from_hit(hit, jumps, tw)
    res = first_hitting_time(g, cfg, init, horizon, pulse_filter=edges, rng=prng, monitor=monitor)
    return None, HittingTimeSample.from_hit(res.hit_time, res.jumps, tw)


# -- theoretical bound --------------------------------------------------------------------

@dataclass(frozen=True)
class RhoBound:
    rho: float
    log_one_minus_rho: float
    exponent: float
    saturated: bool

    def to_dict(self) -> dict:
        return {"rho": self.rho, "log_one_minus_rho": self.log_one_minus_rho,
                "exponent": self.exponent, "saturated": self.saturated}


def rho_details(base: Digraph, p: float | Sequence[float], r: Sequence[float],
                depth: int) -> RhoBound:
    """Per-window failure probability bound, computed in the log domain.

    ``1 - rho = (p^(N-1) (1-p)^(|E|-N+1)) ** (depth * N / r_min)``.  For
    per-agent probabilities the smallest ``p`` and smallest ``1 - p`` are used,
    which can only loosen the bound.  When ``1 - rho`` underflows double
    precision, ``rho`` prints as 1.0 and ``saturated`` is set; the exact size
    is kept in ``log_one_minus_rho``.
    """
    n = base.n
    ps = [float(p)] * n if isinstance(p, (int, float)) else [float(x) for x in p]
    if len(ps) != n or len(r) != n:
        raise BadParams("p and r must match the number of agents")
    if any(not 0.0 < x < 1.0 for x in ps):
        raise BadParams("p must lie strictly inside (0, 1)")
    r_min = min(r)
    if not r_min > 0:
        raise BadParams("the bound needs min(r) > 0")
    if depth < 0:
        raise BadParams("depth must be non-negative")
    if not base.analysis.is_rooted:
        raise BadParams("the bound needs a rooted graph")
    p_lo = min(ps)
    q_lo = min(1.0 - x for x in ps)
    extra = base.num_edges - n + 1
    log_tree = (n - 1) * math.log(p_lo) + extra * math.log(q_lo)
    exponent = depth * n / r_min
    log_alpha = exponent * log_tree if exponent else 0.0
    rho = -math.expm1(log_alpha) + 0.0
    return RhoBound(rho, log_alpha, exponent, rho >= 1.0)


def rho_bound(base: Digraph, p: float | Sequence[float], r: Sequence[float], depth: int) -> float:
    return rho_details(base, p, r, depth).rho


def survival_bound(n: int, rho: float, depth: int, T: float = 1.0) -> tuple[float, float]:
    """``rho ** n`` together with the window length it refers to."""
    if n < 1:
        raise BadParams("n must be a positive integer")
    if not 0.0 <= rho <= 1.0:
        raise BadParams("rho must lie in [0, 1]")
    return rho ** n, window_length(depth, T)


def empirical_survival(samples: Sequence[HittingTimeSample], n_max: int) -> list[float]:
    """Fraction of paths with window index above ``n``, for n = 1..n_max (censored count as above)."""
    total = len(samples)
    if total == 0:
        return [0.0] * n_max
    idx = [s.window_index for s in samples]
    out = []
    for n in range(1, n_max + 1):
        alive = sum(1 for w in idx if w is None or w > n)
        out.append(alive / total)
    return out


def survival_check(samples: Sequence[HittingTimeSample], rho: float, n_max: int,
                   min_surviving: int = 20) -> list[tuple[int, float, float]]:
    """Windows where the empirical survival exceeds ``rho^n`` plus three binomial sigmas.

    Only windows with at least ``min_surviving`` surviving paths are judged.
    Returns ``(n, empirical, allowed)`` for each failing window.
    """
    paths = len(samples)
    bad = []
    for n, s in enumerate(empirical_survival(samples, n_max), start=1):
        if s * paths < min_surviving:
            continue
        b = rho ** n
        allowed = b + 3.0 * math.sqrt(b * (1.0 - b) / paths)
        if s > allowed:
            bad.append((n, s, allowed))
    return bad
