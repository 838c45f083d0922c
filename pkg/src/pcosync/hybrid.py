"""Deterministic hybrid dynamics of a pulse-coupled oscillator network.

Every agent's phase grows at rate ``1/T`` on ``[0, 1]``.  An agent at 1 fires:
it resets to 0 and pulses its out-neighbours, each of which jumps to 0 or 1
according to its partition threshold ``r_k`` (the binary phase rule).  Agents
pushed to 1 fire in turn, one jump at a time, until nobody is at 1.

Because all flows share one slope, event times are computed in closed form.
Two executors are provided:

* :func:`simulate` steps :func:`flow_to_next_event` / :func:`fire_cascade` on
  explicit phase vectors and records every event with its Lyapunov value.
* :func:`first_hitting_time` keeps phases as offsets from one shared
  reference, so a flow is O(1), and only reports the hitting time.  It is the
  Monte Carlo workhorse.
"""
from __future__ import annotations

import enum
import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .digraph import Digraph, feeder_pair_graph

__all__ = [
    "HybridError", "OutOfRange", "AlreadyInJumpSet", "InvalidInit", "ZenoDetected",
    "TiePolicy", "FiringOrder", "SyncConfig", "PhaseState", "Disturbance",
    "Event", "TrajectoryRecord", "HitResult",
    "arc_lyapunov", "apply_bpr", "zeno_budget", "flow_to_next_event", "fire_cascade",
    "simulate", "first_hitting_time", "counterexample_fixture", "policy_rng",
    "ExplorationResult", "explore_selections", "COUNTEREXAMPLES",
]

PulseFilter = Callable[[int, Sequence[int]], Sequence[bool]]

TIME_EPS = 1e-9
"""Slack for comparing accumulated event times against closed-form bounds."""

# the fast kernel runs the tie_eps synchronization test once this few distinct offsets remain
_NEAR_SYNC_KEYS = 32


class HybridError(Exception):
    pass


class OutOfRange(HybridError, ValueError):
    pass


class InvalidInit(HybridError, ValueError):
    pass


class AlreadyInJumpSet(HybridError):
    pass


class ZenoDetected(HybridError):
    """A jump cascade exceeded its budget on a graph that has a cycle."""

    def __init__(self, message: str, jumps: int = 0, t: float = 0.0):
        super().__init__(message)
        self.jumps = jumps
        self.t = t
        self.record: TrajectoryRecord | None = None


class TiePolicy(str, enum.Enum):
    TO_ZERO = "to_zero"
    TO_ONE = "to_one"
    COIN_FLIP = "coin_flip"


class FiringOrder(str, enum.Enum):
    ASCENDING = "ascending"
    DESCENDING = "descending"
    RANDOM = "random"


@dataclass(frozen=True)
class SyncConfig:
    """Partition vector and period, plus selection policies for set-valued jumps."""

    r: tuple[float, ...]
    T: float = 1.0
    tie_policy: TiePolicy = TiePolicy.TO_ZERO
    firing_order: FiringOrder = FiringOrder.ASCENDING
    tie_eps: float = 1e-12
    zeno_budget_multiplier: int = 4
    seed: int = 0

    def __post_init__(self) -> None:
        r = tuple(float(x) for x in self.r)
        if not r:
            raise ValueError("partition vector is empty")
        if any(not 0.0 <= x <= 1.0 for x in r):
            raise ValueError(f"partition entries must lie in [0, 1]: {r}")
        if not self.T > 0:
            raise ValueError("period T must be positive")
        if self.tie_eps < 0:
            raise ValueError("tie_eps must be non-negative")
        if self.zeno_budget_multiplier < 1:
            raise ValueError("zeno_budget_multiplier must be a positive integer")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "tie_policy", TiePolicy(self.tie_policy))
        object.__setattr__(self, "firing_order", FiringOrder(self.firing_order))

    @property
    def n(self) -> int:
        return len(self.r)

    @property
    def r_min(self) -> float:
        return min(self.r)

    @classmethod
    def uniform(cls, n: int, value: float, **kw) -> "SyncConfig":
        return cls(r=(value,) * n, **kw)

    def to_dict(self) -> dict:
        return {
            "r": list(self.r),
            "T": self.T,
            "tie_policy": self.tie_policy.value,
            "firing_order": self.firing_order.value,
            "tie_eps": self.tie_eps,
            "zeno_budget_multiplier": self.zeno_budget_multiplier,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SyncConfig":
        known = {"r", "T", "tie_policy", "firing_order", "tie_eps",
                 "zeno_budget_multiplier", "seed"}
        extra = set(doc) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**doc)


@dataclass(frozen=True)
class PhaseState:
    phases: tuple[float, ...]
    t: float = 0.0
    j: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "phases", tuple(float(x) for x in self.phases))

    @property
    def n(self) -> int:
        return len(self.phases)


@dataclass(frozen=True)
class Disturbance:
    """Bounded perturbation of the flow rates and of the firing thresholds.

    Agent ``i`` flows at ``1/T + freq_offsets[i]`` and fires once its phase
    reaches ``1 + threshold_offsets[i]`` (clipped to ``(0, 1]``).
    """

    freq_offsets: tuple[float, ...]
    threshold_offsets: tuple[float, ...]
    bound: float

    def __post_init__(self) -> None:
        f = tuple(float(x) for x in self.freq_offsets)
        h = tuple(float(x) for x in self.threshold_offsets)
        if len(f) != len(h):
            raise ValueError("offset vectors differ in length")
        if self.bound < 0:
            raise ValueError("disturbance bound must be non-negative")
        if any(abs(x) > self.bound for x in f + h):
            raise ValueError("offset exceeds the disturbance bound")
        object.__setattr__(self, "freq_offsets", f)
        object.__setattr__(self, "threshold_offsets", h)

    @classmethod
    def random(cls, n: int, bound: float, rng: np.random.Generator) -> "Disturbance":
        return cls(tuple(rng.uniform(-bound, bound, n)),
                   tuple(rng.uniform(-bound, bound, n)), bound)

    def rates(self, T: float) -> list[float]:
        rates = [1.0 / T + f for f in self.freq_offsets]
        if any(x <= 0 for x in rates):
            raise ValueError("disturbance makes a flow rate non-positive")
        return rates

    def thresholds(self) -> list[float]:
        return [min(1.0, max(1.0 + h, 1e-12)) for h in self.threshold_offsets]


# -- Lyapunov function and the binary phase rule --------------------------------

def arc_lyapunov(phases: Sequence[float], eps: float = 1e-12) -> float:
    """Length of the shortest arc of the unit circle covering every agent.

    0 and 1 are the same point.  Returns 0 exactly when all agents share one
    point (up to ``eps``); never exceeds ``1 - 1/N``.
    """
    pos = []
    for x in phases:
        if not 0.0 <= x <= 1.0:
            raise OutOfRange(f"phase {x!r} outside [0, 1]")
        pos.append(0.0 if x >= 1.0 else x)
    pos.sort()
    widest = pos[0] + 1.0 - pos[-1]
    for a, b in zip(pos, pos[1:]):
        if b - a > widest:
            widest = b - a
    v = 1.0 - widest
    return 0.0 if v <= eps else v


def apply_bpr(tau: float, r: float, policy: TiePolicy = TiePolicy.TO_ZERO,
              rng: np.random.Generator | None = None, eps: float = 1e-12) -> int:
    """Reset target of a pulsed agent: 0 below its threshold, 1 above it."""
    if tau < r - eps:
        return 0
    if tau > r + eps:
        return 1
    if policy is TiePolicy.TO_ZERO:
        return 0
    if policy is TiePolicy.TO_ONE:
        return 1
    if rng is None:
        raise ValueError("coin-flip ties need a random generator")
    return 1 if rng.random() < 0.5 else 0


def zeno_budget(cfg: SyncConfig) -> int:
    """Jumps allowed in one cascade before it is declared Zeno."""
    n = cfg.n
    # thresholds within tie_eps of 0 act exactly like 0 under the phase rule
    if cfg.r_min > cfg.tie_eps:
        return cfg.zeno_budget_multiplier * n * math.ceil(1.0 / cfg.r_min)
    return cfg.zeno_budget_multiplier * n * n


def policy_rng(seed: int, *key: int) -> np.random.Generator:
    """Generator for tie and firing-order selections, independent of edge draws."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *key, 1])))


def _order_firers(agents: list[int], order: FiringOrder, rng) -> list[int]:
    agents.sort()
    if order is FiringOrder.DESCENDING:
        agents.reverse()
    elif order is FiringOrder.RANDOM and len(agents) > 1:
        agents = [agents[k] for k in rng.permutation(len(agents))]
    return agents


# -- events and trajectory records ------------------------------------------------

@dataclass(frozen=True, slots=True)
class Event:
    t: float
    j: int
    kind: str  # "init", "flow", "fire" or "pulse"
    phases: tuple[float, ...]
    V: float
    agent: int | None = None
    target: int | None = None
    outcome: str | None = None  # pulses: "0", "1" or "skip"

    @property
    def label(self) -> str:
        if self.kind == "pulse":
            return f"pulse:{self.target}:{self.outcome}"
        return self.kind


@dataclass
class TrajectoryRecord:
    n: int
    T: float
    events: list[Event] = field(default_factory=list)
    fire_times: list[float] = field(default_factory=list)
    hit_time: float | None = None
    zeno: bool = False
    left_sync_set: bool = False
    recurrence: tuple[int, int] | None = None
    t_end: float = 0.0
    cascades: int = 0
    _record: bool = True
    _fingerprints: list = field(default_factory=list, repr=False)
    _tie_eps: float = 1e-12

    @property
    def jumps(self) -> int:
        return len(self.fire_times)

    @property
    def final_phases(self) -> tuple[float, ...]:
        return self.events[-1].phases

    def add(self, ev: Event) -> None:
        if ev.kind == "fire":
            self.fire_times.append(ev.t)
        if self._record:
            self.events.append(ev)

    def window_counts(self, length: float | None = None) -> list[int]:
        """Fires in ``[t_k, t_k + length)`` for every fire time ``t_k``."""
        length = self.T if length is None else length
        ft = self.fire_times
        counts = []
        hi = 0
        for lo in range(len(ft)):
            hi = max(hi, lo)
            while hi < len(ft) and ft[hi] < ft[lo] + length:
                hi += 1
            counts.append(hi - lo)
        return counts

    @property
    def jump_windows(self) -> list[int]:
        return self.window_counts()

    def max_window_fires(self, length: float | None = None) -> int:
        return max(self.window_counts(length), default=0)

    def lyapunov_violations(self, tol: float = 1e-9) -> list[int]:
        """Indices of events where V grew, or changed across a flow."""
        bad = []
        ev = self.events
        for k in range(1, len(ev)):
            prev, cur = ev[k - 1].V, ev[k].V
            if cur > prev + tol:
                bad.append(k)
            elif ev[k].kind == "flow" and abs(cur - prev) > tol:
                bad.append(k)
        return bad

    def v_series(self) -> list[tuple[float, float]]:
        return [(e.t, e.V) for e in self.events]


# -- reference steps on explicit phase vectors ---------------------------------

def flow_to_next_event(state: PhaseState, cfg: SyncConfig,
                       dist: Disturbance | None = None) -> tuple[PhaseState, float]:
    """Flow until the first agent reaches its firing threshold.

    Unperturbed flows advance every phase by ``1 - max`` and set the leaders
    to exactly 1.  Under a disturbance each agent has its own rate and
    threshold; agents reaching theirs are placed at 1 so they fire next.
    """
    ph = state.phases
    if dist is None:
        m = max(ph)
        if m >= 1.0:
            raise AlreadyInJumpSet("an agent is already at 1")
        step = 1.0 - m
        new = tuple(1.0 if x == m else min(1.0, x + step) for x in ph)
        dt = cfg.T * step
        return PhaseState(new, state.t + dt, state.j), dt
    rates = dist.rates(cfg.T)
    thr = dist.thresholds()
    if any(x >= h for x, h in zip(ph, thr)):
        raise AlreadyInJumpSet("an agent is already past its threshold")
    waits = [(h - x) / rate for x, h, rate in zip(ph, thr, rates)]
    dt = min(waits)
    new = []
    for x, h, rate, w in zip(ph, thr, rates, waits):
        y = x + rate * dt
        new.append(1.0 if (w == dt or y >= h) else min(1.0, y))
    return PhaseState(tuple(new), state.t + dt, state.j), dt


def fire_cascade(state: PhaseState, g: Digraph, cfg: SyncConfig,
                 pulse_filter: PulseFilter | None = None,
                 record: TrajectoryRecord | None = None,
                 rng: np.random.Generator | None = None) -> PhaseState:
    """Run sequential jumps until no agent is at 1.

    The queue starts with every agent at 1 (ordered by ``cfg.firing_order``);
    agents pushed to 1 by a pulse join the back.  A pulse to an agent already
    at 1 leaves it alone.
    """
    ph = list(state.phases)
    n = len(ph)
    if n != g.n or n != cfg.n:
        raise ValueError("state size does not match the graph or config")
    at1 = [i for i in range(n) if ph[i] >= 1.0]
    if not at1:
        raise ValueError("fire_cascade needs an agent at 1")
    for i in at1:
        ph[i] = 1.0
    queue = deque(_order_firers(at1, cfg.firing_order, rng))
    queued = set(queue)
    budget = zeno_budget(cfg)
    cyclic = not g.analysis.is_acyclic
    out = g.out_neighbors
    r = cfg.r
    eps = cfg.tie_eps
    t, j = state.t, state.j
    fired = 0
    want_v = record is not None and record._record
    while queue:
        i = queue.popleft()
        queued.discard(i)
        ph[i] = 0.0
        j += 1
        fired += 1
        if record is not None:
            record.add(Event(t, j, "fire", tuple(ph), arc_lyapunov(ph, eps) if want_v else 0.0, i))
        if fired > budget and cyclic:
            exc = ZenoDetected(f"cascade at t={t:.15g} exceeded {budget} jumps", fired, t)
            raise exc
        targets = out[i]
        if not targets:
            continue
        active = pulse_filter(i, targets) if pulse_filter is not None else None
        for idx, k in enumerate(targets):
            if active is not None and not active[idx]:
                continue
            if k in queued:
                outcome = "skip"
            else:
                new = apply_bpr(ph[k], r[k], cfg.tie_policy, rng, eps)
                ph[k] = float(new)
                outcome = str(new)
                if new:
                    queue.append(k)
                    queued.add(k)
            if record is not None:
                record.add(Event(t, j, "pulse", tuple(ph),
                                 arc_lyapunov(ph, eps) if want_v else 0.0, i, k, outcome))
    return PhaseState(tuple(ph), t, j)


def _check_init(init: Sequence[float], n: int) -> tuple[float, ...]:
    init = tuple(float(x) for x in init)
    if len(init) != n:
        raise InvalidInit(f"expected {n} initial phases, got {len(init)}")
    if any(not 0.0 <= x <= 1.0 for x in init):
        raise InvalidInit("initial phases must lie in [0, 1]")
    return init


def _same_state(a: Sequence[float], b: Sequence[float], tol: float) -> bool:
    for x, y in zip(a, b):
        d = abs(x - y)
        if min(d, 1.0 - d) > tol:
            return False
    return True


def simulate(g: Digraph, cfg: SyncConfig, init: Sequence[float], horizon: float,
             dist: Disturbance | None = None, pulse_filter: PulseFilter | None = None,
             rng: np.random.Generator | None = None, *, record_events: bool = True,
             detect_recurrence: bool = False, recurrence_tol: float = 1e-9,
             stop_at_hit: bool = False) -> TrajectoryRecord:
    """Alternate flows and jump cascades from ``init`` until ``horizon`` seconds.

    ``hit_time`` is the first time the agents occupy a single point of the
    circle; afterwards the record flags any departure from that set.
    Raises :class:`ZenoDetected` (with ``.record`` attached) if a cascade
    blows its jump budget.
    """
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    init = _check_init(init, g.n)
    if cfg.n != g.n:
        raise ValueError("config and graph sizes differ")
    if rng is None:
        rng = policy_rng(cfg.seed)
    eps = cfg.tie_eps
    rec = TrajectoryRecord(g.n, cfg.T, _record=record_events, _tie_eps=eps)
    state = PhaseState(init)
    v0 = arc_lyapunov(init, eps)
    rec.add(Event(0.0, 0, "init", init, v0))
    if v0 == 0.0:
        rec.hit_time = 0.0
    thresholds = dist.thresholds() if dist is not None else None

    def in_jump_set(ph):
        if thresholds is None:
            return max(ph) >= 1.0
        return any(x >= h for x, h in zip(ph, thresholds))

    def note(ev_start: int) -> None:
        if not record_events:
            v = arc_lyapunov(state.phases, eps)
            vals = [v]
        else:
            vals = [e.V for e in rec.events[ev_start:]]
        for v in vals:
            if v == 0.0 and rec.hit_time is None:
                rec.hit_time = state.t
            elif v > 0.0 and rec.hit_time is not None and dist is None:
                rec.left_sync_set = True

    while True:
        if stop_at_hit and rec.hit_time is not None:
            break
        if in_jump_set(state.phases):
            ph = state.phases
            if thresholds is not None:
                ph = tuple(1.0 if x >= h else x for x, h in zip(ph, thresholds))
                state = PhaseState(ph, state.t, state.j)
            start = len(rec.events)
            try:
                state = fire_cascade(state, g, cfg, pulse_filter, rec, rng)
            except ZenoDetected as exc:
                rec.zeno = True
                rec.t_end = state.t
                exc.record = rec
                raise
            rec.cascades += 1
            note(start)
            if detect_recurrence and rec.recurrence is None:
                first = rec.events[start].agent if record_events else None
                fp = (first, state.phases)
                for k, (a, ph_old) in enumerate(rec._fingerprints):
                    if a == first and _same_state(ph_old, state.phases, recurrence_tol):
                        rec.recurrence = (k, len(rec._fingerprints))
                        break
                rec._fingerprints.append(fp)
            continue
        nxt, dt = flow_to_next_event(state, cfg, dist)
        if nxt.t > horizon:
            break
        state = nxt
        start = len(rec.events)
        rec.add(Event(state.t, state.j, "flow", state.phases,
                      arc_lyapunov(state.phases, eps) if record_events else 0.0))
        note(start)
    rec.t_end = max(state.t, horizon if not stop_at_hit else state.t)
    return rec


# -- fast executor ------------------------------------------------------------------

@dataclass
class HitResult:
    hit_time: float | None
    jumps: int
    cascades: int
    t_end: float
    max_window_fires: int = 0
    v_violations: int = 0
    final_phases: tuple[float, ...] = ()

    @property
    def censored(self) -> bool:
        return self.hit_time is None


def first_hitting_time(g: Digraph, cfg: SyncConfig, init: Sequence[float], horizon: float,
                       pulse_filter: PulseFilter | None = None,
                       rng: np.random.Generator | None = None, *,
                       monitor: bool = False, track_windows: bool = False,
                       v_tol: float = 1e-9) -> HitResult:
    """Run until the agents first share one point of the circle, or ``horizon``.

    Same jump semantics and random-number consumption as :func:`simulate`,
    but phases are stored as ``tau_i = phi_i + c`` with a shared reference
    ``c`` and the next firer comes off a heap.  ``monitor`` recomputes the
    Lyapunov value around every cascade and counts increases;
    ``track_windows`` keeps the largest number of fires in any window of
    length ``T``.
    """
    n = g.n
    init = _check_init(init, n)
    if cfg.n != n:
        raise ValueError("config and graph sizes differ")
    if rng is None:
        rng = policy_rng(cfg.seed)
    T = cfg.T
    r = cfg.r
    eps = cfg.tie_eps
    tie = cfg.tie_policy
    order = cfg.firing_order
    out = g.out_neighbors
    budget = zeno_budget(cfg)
    cyclic = not g.analysis.is_acyclic

    phi = list(init)
    c = 0.0
    t = 0.0
    jumps = 0
    cascades = 0
    counts: dict[float, int] = {}
    for x in phi:
        counts[x] = counts.get(x, 0) + 1
    if arc_lyapunov(init, eps) == 0.0:
        return HitResult(0.0, 0, 0, 0.0, final_phases=init)
    version = [0] * n
    heap = [(-x, i, 0) for i, x in enumerate(phi)]
    heapq.heapify(heap)
    window: deque[float] = deque()
    max_win = 0
    v_bad = 0
    v_last = arc_lyapunov(init, eps) if monitor else 0.0

    def move(k: int, new_phi: float) -> None:
        old = phi[k]
        cnt = counts[old] - 1
        if cnt:
            counts[old] = cnt
        else:
            del counts[old]
        counts[new_phi] = counts.get(new_phi, 0) + 1
        phi[k] = new_phi
        version[k] += 1
        heapq.heappush(heap, (-new_phi, k, version[k]))

    def current() -> list[float]:
        return [min(1.0, max(0.0, x + c)) for x in phi]

    while True:
        # next firing: every agent whose offset equals the largest one
        while heap[0][2] != version[heap[0][1]]:
            heapq.heappop(heap)
        top = -heap[0][0]
        tau_top = top + c
        if tau_top < 1.0:
            step = 1.0 - tau_top
            dt = T * step
            if t + dt > horizon:
                break
            t += dt
            c += step
        firers = []
        while heap and -heap[0][0] == top:
            _, i, ver = heapq.heappop(heap)
            if ver == version[i]:
                firers.append(i)
        if monitor:
            v_flow = arc_lyapunov(current(), eps)
            if abs(v_flow - v_last) > v_tol:
                v_bad += 1
            v_last = v_flow
        zero = -c
        queue = deque(_order_firers(firers, order, rng))
        queued = set(queue)
        for i in queue:
            move(i, zero)
        fired = 0
        while queue:
            i = queue.popleft()
            queued.discard(i)
            fired += 1
            jumps += 1
            if track_windows:
                window.append(t)
                while window[0] <= t - T:
                    window.popleft()
                if len(window) > max_win:
                    max_win = len(window)
            if fired > budget and cyclic:
                raise ZenoDetected(f"cascade at t={t:.15g} exceeded {budget} jumps", fired, t)
            targets = out[i]
            if not targets:
                continue
            active = pulse_filter(i, targets) if pulse_filter is not None else None
            for idx, k in enumerate(targets):
                if active is not None and not active[idx]:
                    continue
                if k in queued:
                    continue
                tau = phi[k] + c
                if tau < r[k] - eps:
                    new = 0
                elif tau > r[k] + eps:
                    new = 1
                else:
                    new = apply_bpr(tau, r[k], tie, rng, eps)
                if phi[k] != zero:
                    move(k, zero)
                if new:
                    queue.append(k)
                    queued.add(k)
        cascades += 1
        if monitor:
            v_jump = arc_lyapunov(current(), eps)
            if v_jump > v_last + v_tol:
                v_bad += 1
            v_last = v_jump
        if len(counts) == 1 or (len(counts) <= _NEAR_SYNC_KEYS and arc_lyapunov(
                [min(1.0, max(0.0, x + c)) for x in counts], eps) == 0.0):
            return HitResult(t, jumps, cascades, t, max_win, v_bad, tuple(current()))
        if c >= 1.0:
            phi = [x + c for x in phi]
            c = 0.0
            counts = {}
            for x in phi:
                counts[x] = counts.get(x, 0) + 1
            version = [v + 1 for v in version]
            heap = [(-x, i, version[i]) for i, x in enumerate(phi)]
            heapq.heapify(heap)
    return HitResult(None, jumps, cascades, horizon, max_win, v_bad, tuple(current()))


# -- every selection ------------------------------------------------------------------

@dataclass
class ExplorationResult:
    paths: int = 0
    worst_hit: float | None = None
    unhit_paths: int = 0
    zeno_paths: int = 0
    truncated: bool = False

    @property
    def all_hit(self) -> bool:
        return self.paths > 0 and not (self.unhit_paths or self.zeno_paths or self.truncated)


def explore_selections(g: Digraph, cfg: SyncConfig, init: Sequence[float], horizon: float,
                       max_paths: int = 500_000) -> ExplorationResult:
    """Follow every solution of the set-valued jump map from ``init``.

    At each jump any agent at 1 may fire, and every pulsed agent sitting
    exactly on its threshold branches to both 0 and 1.  A branch ends when
    the agents share one point or would flow past ``horizon``; a cascade that
    blows the jump budget ends it as well.  Meant for N <= 4.
    """
    init = _check_init(init, g.n)
    eps = cfg.tie_eps
    r = cfg.r
    out = g.out_neighbors
    budget = zeno_budget(cfg)
    cyclic = not g.analysis.is_acyclic
    res = ExplorationResult()
    stack = [(init, 0.0, 0)]
    while stack:
        if res.paths >= max_paths:
            res.truncated = True
            break
        ph, t, fired = stack.pop()
        if arc_lyapunov(ph, eps) == 0.0:
            res.paths += 1
            if res.worst_hit is None or t > res.worst_hit:
                res.worst_hit = t
            continue
        at1 = [i for i, x in enumerate(ph) if x >= 1.0]
        if not at1:
            step = 1.0 - max(ph)
            dt = cfg.T * step
            if t + dt > horizon:
                res.paths += 1
                res.unhit_paths += 1
                continue
            m = max(ph)
            stack.append((tuple(1.0 if x == m else min(1.0, x + step) for x in ph), t + dt, 0))
            continue
        if fired >= budget and cyclic:
            res.paths += 1
            res.zeno_paths += 1
            continue
        for i in at1:
            base = list(ph)
            base[i] = 0.0
            choices = []
            for k in out[i]:
                x = base[k]
                if x >= 1.0:
                    continue
                if x < r[k] - eps:
                    opts = (0.0,)
                elif x > r[k] + eps:
                    opts = (1.0,)
                else:
                    opts = (0.0, 1.0)
                choices.append((k, opts))
            branches = [base]
            for k, opts in choices:
                nxt = []
                for b in branches:
                    for v in opts:
                        c = list(b)
                        c[k] = v
                        nxt.append(c)
                branches = nxt
            for b in branches:
                stack.append((tuple(b), t, fired + 1))
    return res


# -- counterexamples ---------------------------------------------------------------

COUNTEREXAMPLES = ("cycle_chase", "pair_half", "pair_high")


def counterexample_fixture(which: str) -> tuple[Digraph, SyncConfig, tuple[float, ...]]:
    """Scenarios whose deterministic solutions never synchronize.

    ``cycle_chase``: 3-cycle, all thresholds 0.6; two diametrically opposite
    clusters chase each other forever.  ``pair_half`` / ``pair_high``: the rooted
    graph 0 -> 1 <-> 2 with thresholds 0.5 / 0.7, entering a periodic orbit.
    """
    key = which.lower().replace("_", "").replace("-", "")
    if key == "cyclechase":
        g = Digraph(3, ((0, 1), (1, 2), (2, 0)))
        return g, SyncConfig.uniform(3, 0.6), (0.9, 0.3, 0.4)
    if key == "pairhalf":
        return feeder_pair_graph(), SyncConfig.uniform(3, 0.5), (0.6, 0.9, 0.2)
    if key == "pairhigh":
        return feeder_pair_graph(), SyncConfig.uniform(3, 0.7), (0.3, 0.8, 0.1)
    raise ValueError(f"unknown counterexample {which!r}")
