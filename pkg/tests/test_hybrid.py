import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from pcosync.digraph import Digraph, depth, feeder_pair_graph, generate
from pcosync.hybrid import (
    COUNTEREXAMPLES, AlreadyInJumpSet, Disturbance, FiringOrder, InvalidInit, OutOfRange,
    PhaseState, SyncConfig, TiePolicy, ZenoDetected, apply_bpr, arc_lyapunov,
    counterexample_fixture, explore_selections, fire_cascade, first_hitting_time,
    flow_to_next_event, policy_rng, simulate, zeno_budget,
)

unit = st.floats(0.0, 1.0, allow_nan=False)


@st.composite
def instances(draw, family="random_rooted", max_n=7, r_max=1.0):
    n = draw(st.integers(2, max_n))
    seed = draw(st.integers(0, 10_000))
    g = generate(family, n, seed)
    r = tuple(draw(st.floats(0.0, r_max, allow_nan=False, exclude_max=r_max < 1.0)) for _ in range(n))
    init = tuple(draw(unit) for _ in range(n))
    tie = draw(st.sampled_from(list(TiePolicy)))
    order = draw(st.sampled_from(list(FiringOrder)))
    return g, SyncConfig(r, tie_policy=tie, firing_order=order), init


# -- Lyapunov value ------------------------------------------------------------------

@pytest.mark.parametrize("phases,expected", [
    ((0.3,), 0.0),
    ((0.0, 1.0), 0.0),
    ((0.4, 0.4, 0.4), 0.0),
    ((0.0, 0.5), 0.5),
    ((0.1, 0.2, 0.9), 0.3),
    ((0.05, 0.95), 0.1),
    ((0.0, 0.25, 0.5, 0.75), 0.75),
])
def test_arc_lyapunov_examples(phases, expected):
    assert arc_lyapunov(phases) == pytest.approx(expected, abs=1e-12)


def test_arc_lyapunov_rejects_out_of_range():
    with pytest.raises(OutOfRange):
        arc_lyapunov((0.2, 1.2))


@settings(max_examples=300)
@given(st.lists(unit, min_size=1, max_size=12), unit)
def test_arc_lyapunov_range_and_rotation(phases, shift):
    v = arc_lyapunov(phases)
    assert 0.0 <= v <= 1.0 - 1.0 / len(phases) + 1e-12
    rotated = [(x + shift) % 1.0 for x in phases]
    assert arc_lyapunov(rotated) == pytest.approx(v, abs=1e-9)


# -- binary phase rule -----------------------------------------------------------------

def test_bpr_sides_and_ties():
    assert apply_bpr(0.2, 0.5) == 0
    assert apply_bpr(0.8, 0.5) == 1
    assert apply_bpr(0.5, 0.5, TiePolicy.TO_ZERO) == 0
    assert apply_bpr(0.5, 0.5, TiePolicy.TO_ONE) == 1
    assert apply_bpr(0.5 + 1e-14, 0.5, TiePolicy.TO_ZERO) == 0
    with pytest.raises(ValueError):
        apply_bpr(0.5, 0.5, TiePolicy.COIN_FLIP)
    rng = np.random.default_rng(3)
    flips = [apply_bpr(0.5, 0.5, TiePolicy.COIN_FLIP, rng) for _ in range(2000)]
    assert 900 < sum(flips) < 1100


def test_bpr_threshold_extremes():
    # r = 0: every positive phase goes to 1; r = 1: everything below 1 goes to 0
    assert apply_bpr(1e-6, 0.0) == 1
    assert apply_bpr(0.0, 0.0, TiePolicy.TO_ZERO) == 0
    assert apply_bpr(0.999, 1.0) == 0


# -- config and steps --------------------------------------------------------------------

def test_config_validation_and_round_trip():
    cfg = SyncConfig((0.2, 0.4), T=2.0, tie_policy="to_one", firing_order="random", seed=5)
    assert SyncConfig.from_dict(cfg.to_dict()) == cfg
    assert cfg.r_min == 0.2 and cfg.n == 2
    for bad in (dict(r=()), dict(r=(1.2,)), dict(r=(0.5,), T=0), dict(r=(0.5,), tie_eps=-1),
                dict(r=(0.5,), zeno_budget_multiplier=0)):
        with pytest.raises(ValueError):
            SyncConfig(**bad)
    with pytest.raises(ValueError):
        SyncConfig.from_dict({"r": [0.5], "colour": 1})


def test_flow_to_next_event():
    cfg = SyncConfig.uniform(3, 0.5, T=2.0)
    s, dt = flow_to_next_event(PhaseState((0.1, 0.7, 0.7)), cfg)
    assert dt == pytest.approx(0.6)
    assert s.phases == pytest.approx((0.4, 1.0, 1.0))
    assert s.t == pytest.approx(0.6)
    with pytest.raises(AlreadyInJumpSet):
        flow_to_next_event(PhaseState((1.0, 0.2)), SyncConfig.uniform(2, 0.5))


def test_cascade_pulse_to_queued_agent_is_skipped():
    # 0 and 1 both at 1, each pulses the other: neither is reset twice
    g = Digraph(3, ((0, 1), (1, 0), (1, 2)))
    cfg = SyncConfig.uniform(3, 0.5)
    from pcosync.hybrid import TrajectoryRecord
    rec = TrajectoryRecord(3, 1.0)
    s = fire_cascade(PhaseState((1.0, 1.0, 0.7)), g, cfg, record=rec)
    assert s.phases == (0.0, 0.0, 0.0)
    assert [e.label for e in rec.events] == ["fire", "pulse:1:skip", "fire", "pulse:0:0",
                                             "pulse:2:1", "fire"]
    assert s.j == 3


def test_firing_order_changes_cascade():
    g = Digraph(3, ((0, 2), (1, 2)))
    cfg_a = SyncConfig((0.5, 0.5, 0.5))
    # ascending: 0 fires first and pushes 2 (at 0.6) to 1; 1's pulse is then skipped
    s = fire_cascade(PhaseState((1.0, 1.0, 0.6)), g, cfg_a)
    assert s.phases == (0.0, 0.0, 0.0) and s.j == 3


def test_zeno_budget_values():
    assert zeno_budget(SyncConfig((0.25, 0.5, 0.5))) == 4 * 3 * 4
    assert zeno_budget(SyncConfig((0.0, 0.5))) == 4 * 2 * 2


def test_policy_rng_is_keyed():
    a = policy_rng(1, 2).random(4)
    assert np.array_equal(a, policy_rng(1, 2).random(4))
    assert not np.array_equal(a, policy_rng(1, 3).random(4))


def test_invalid_init():
    g = generate("path", 3)
    cfg = SyncConfig.uniform(3, 0.5)
    with pytest.raises(InvalidInit):
        simulate(g, cfg, (0.1, 0.2), 1.0)
    with pytest.raises(InvalidInit):
        first_hitting_time(g, cfg, (0.1, 0.2, 1.5), 1.0)


# -- counterexamples ---------------------------------------------------------------------

def _cascade_ends(rec):
    ev = rec.events
    return [tuple(round(x, 9) for x in ev[k - 1].phases)
            for k in range(1, len(ev)) if ev[k].kind == "flow" and ev[k - 1].kind != "flow"]


def test_cycle_chase_rotates_forever():
    g, cfg, init = counterexample_fixture("cycle_chase")
    assert g.analysis.num_components == 1 and cfg.r == (0.6,) * 3
    rec = simulate(g, cfg, init, 6.0, detect_recurrence=True)
    assert rec.hit_time is None
    assert _cascade_ends(rec)[1:4] == [(0.0, 0.0, 0.5), (0.0, 0.5, 0.0), (0.5, 0.0, 0.0)]
    assert {round(e.V, 9) for e in rec.events} == {0.5}
    assert rec.recurrence is not None


@pytest.mark.parametrize("which,v_after", [("pair_half", {0.3, 0.6}), ("pair_high", {0.5})])
def test_feeder_pair_cycles(which, v_after):
    g, cfg, init = counterexample_fixture(which)
    assert g == feeder_pair_graph() and g.analysis.is_rooted
    rec = simulate(g, cfg, init, 6.0, detect_recurrence=True)
    assert rec.hit_time is None and rec.recurrence is not None
    assert {round(e.V, 9) for e in rec.events} == v_after


def test_pair_half_trace():
    g, cfg, init = counterexample_fixture("pair-half")
    ends = _cascade_ends(simulate(g, cfg, init, 2.0))
    assert ends[1:4] == [(0.7, 0.0, 0.0), (0.0, 0.0, 0.3), (0.7, 0.0, 0.0)]


def test_counterexample_names():
    assert len(COUNTEREXAMPLES) == 3
    with pytest.raises(ValueError):
        counterexample_fixture("nope")


# -- fast executor agrees with the reference executor --------------------------------------

@settings(max_examples=250, deadline=None)
@given(instances(), st.integers(0, 1000))
def test_fast_matches_reference(inst, key):
    g, cfg, init = inst
    horizon = 6.0
    try:
        ref = simulate(g, cfg, init, horizon, rng=policy_rng(key, 0), stop_at_hit=True)
    except ZenoDetected:
        with pytest.raises(ZenoDetected):
            first_hitting_time(g, cfg, init, horizon, rng=policy_rng(key, 0))
        return
    fast = first_hitting_time(g, cfg, init, horizon, rng=policy_rng(key, 0))
    if ref.hit_time is None:
        assert fast.hit_time is None
    else:
        assert fast.hit_time == pytest.approx(ref.hit_time, abs=1e-9)
        assert fast.jumps == ref.jumps



def test_fast_kernel_uses_tolerance_for_near_equal_phases():
    g = Digraph(5, ((0, 1), (0, 4), (1, 2), (2, 1), (2, 3)))
    cfg = SyncConfig((0.0,) * 5, tie_policy="to_zero", firing_order="ascending")
    init = (0.0, 0.0, 1.0, 0.5, 1.3204739464715158e-281)
    ref = simulate(g, cfg, init, 6.0, rng=policy_rng(0, 0), stop_at_hit=True)
    fast = first_hitting_time(g, cfg, init, 6.0, rng=policy_rng(0, 0))
    assert ref.hit_time == fast.hit_time == 0.0
    assert fast.jumps == ref.jumps

# -- invariants -----------------------------------------------------------------------------

@settings(max_examples=200, deadline=None)
@given(instances(family="random_dag"))
def test_trajectory_invariants_on_dags(inst):
    g, cfg, init = inst
    rec = simulate(g, cfg, init, 4.0, rng=policy_rng(0, 0))
    for e in rec.events:
        assert all(0.0 <= x <= 1.0 for x in e.phases)
    assert rec.lyapunov_violations() == []
    assert not rec.left_sync_set
    d, _ = depth(g)
    assert rec.hit_time is not None and rec.hit_time <= (d + 1) * cfg.T + 1e-9
    # once synchronized, V stays 0
    after = [e.V for e in rec.events if e.t > rec.hit_time + 1e-9]
    assert all(v == 0.0 for v in after)


@settings(max_examples=150, deadline=None)
@given(instances(family="strongly_connected", max_n=6), st.floats(0.0, 1.0, exclude_max=True))
def test_strong_relaxed_bound(inst, frac):
    g, cfg, init = inst
    n = g.n
    r = tuple(min(x, frac) / max(1, n - 1) * 0.999 for x in cfg.r)
    assume(min(r) > 1e-9)
    cfg = SyncConfig(r, tie_policy=cfg.tie_policy, firing_order=cfg.firing_order)
    res = first_hitting_time(g, cfg, init, 3 * cfg.T, rng=policy_rng(1, 0))
    assert res.hit_time is not None and res.hit_time <= 2 * cfg.T + 1e-9


def test_sync_state_is_invariant():
    g = generate("cycle", 5)
    cfg = SyncConfig.uniform(5, 0.3)
    rec = simulate(g, cfg, (0.4,) * 5, 5.0)
    assert rec.hit_time == 0.0
    assert all(e.V == 0.0 for e in rec.events)
    assert len(rec.fire_times) == 5 * 5


def test_zero_thresholds_on_cycle_are_zeno():
    g = generate("cycle", 3)
    cfg = SyncConfig.uniform(3, 0.0, tie_policy="to_one")
    with pytest.raises(ZenoDetected) as err:
        simulate(g, cfg, (0.2, 0.5, 0.9), 2.0)
    assert err.value.jumps > zeno_budget(cfg)


def test_zero_thresholds_on_dag_terminate():
    g = generate("path", 4)
    cfg = SyncConfig.uniform(4, 0.0, tie_policy="to_one")
    rec = simulate(g, cfg, (0.2, 0.5, 0.9, 0.1), 2.0)
    assert rec.hit_time is not None and rec.hit_time <= 1.0 + 1e-9


def test_exhaustive_selection_on_dag():
    g = generate("random_dag", 4, 2)
    cfg = SyncConfig((0.5, 0.25, 0.5, 0.75))
    init = (0.5, 0.25, 1.0, 1.0)
    res = explore_selections(g, cfg, init, horizon=(depth(g)[0] + 2) * cfg.T)
    assert res.paths > 1 and res.all_hit and not res.truncated
    assert res.worst_hit <= (depth(g)[0] + 1) * cfg.T + 1e-9


def test_exhaustive_selection_finds_cycle_chase():
    g, cfg, init = counterexample_fixture("cycle_chase")
    res = explore_selections(g, cfg, init, horizon=3.0)
    assert not res.all_hit and res.unhit_paths >= 1


# -- jumps per period ------------------------------------------------------------------------

def test_fires_per_period_stay_below_ceiling_sum():
    rng = np.random.default_rng(11)
    for k in range(200):
        n = int(rng.integers(2, 8))
        g = generate("random_rooted", n, k)
        r = tuple(rng.uniform(0.05, 1.0, n))
        rec = simulate(g, SyncConfig(r), tuple(rng.random(n)), 5.0, record_events=False)
        assert rec.max_window_fires() <= sum(math.ceil(1.0 / x) for x in r)


def test_window_counts_are_half_open():
    from pcosync.hybrid import TrajectoryRecord
    rec = TrajectoryRecord(2, 1.0)
    rec.fire_times = [0.0, 0.5, 1.0, 1.0, 2.5]
    assert rec.window_counts() == [2, 3, 2, 1, 1]
    assert rec.max_window_fires(2.0) == 4


# -- frozen witnesses: instances exceeding bounds stated without extra conditions -----------

def test_witness_strong_tight_exceeds_one_period():
    g = Digraph(3, ((0, 2), (1, 0), (2, 1)))
    r = (0.26218780747291587, 0.07628053757789244, 0.2615183657431694)
    init = (0.9522524282873251, 0.8197150672944531, 0.10687044158281866)
    assert max(r) < 1.0 / 3
    rec = simulate(g, SyncConfig(r), init, 3.0)
    assert rec.hit_time == pytest.approx(1.0477475717126747, abs=1e-12)
    assert rec.fire_times[:2] == pytest.approx([0.04774757171267485, 0.1802849327055469])


def test_witness_quasi_acyclic_exceeds_one_period():
    g = generate("cycle", 3)
    r = (0.1799270635792043, 0.27071754684617017, 0.21968400112229686)
    init = (0.039686418459000006, 0.8016644050918733, 0.9600709170261761)
    assert max(r) < 1.0 / 2
    res = first_hitting_time(g, SyncConfig(r), init, 3.0)
    assert res.hit_time == pytest.approx(1.039929082973824, abs=1e-12)


def test_witness_jumps_exceed_n_over_rmin():
    g = Digraph(2, ((0, 1),))
    r = (0.8903524682948638, 0.8755648515495347)
    init = (0.08218056214596636, 0.9801643821353233)
    rec = simulate(g, SyncConfig(r), init, 3.0)
    assert rec.max_window_fires() == 3
    assert 3 > 2 / min(r)
    assert 3 <= sum(math.ceil(1.0 / x) for x in r)


# -- disturbances ------------------------------------------------------------------------------

def test_disturbance_validation():
    with pytest.raises(ValueError):
        Disturbance((0.1,), (0.0,), 0.05)
    with pytest.raises(ValueError):
        Disturbance((0.0, 0.0), (0.0,), 0.1)
    d = Disturbance((0.0, 0.01), (-0.02, 0.0), 0.02)
    assert d.rates(1.0) == [1.0, 1.01]
    assert d.thresholds() == [0.98, 1.0]


def test_small_disturbance_keeps_near_sync():
    rng = np.random.default_rng(5)
    worst = 0.0
    for k in range(30):
        n = int(rng.integers(2, 8))
        g = generate("random_dag", n, k)
        r = tuple(rng.uniform(0.05, 1.0, n))
        dist = Disturbance.random(n, 1e-4, rng)
        bound = (depth(g)[0] + 1)
        rec = simulate(g, SyncConfig(r), tuple(rng.random(n)), bound + 3.0, dist=dist)
        tail = [e.V for e in rec.events if e.t > bound + 1.0]
        worst = max([worst] + tail)
    assert worst < 1e-2


def test_zero_thresholds_zeno_from_agent_at_one():
    g = Digraph(3, ((0, 1), (1, 2), (2, 0)))
    cfg = SyncConfig.uniform(3, 0.0, tie_policy="to_one")
    with pytest.raises(ZenoDetected):
        fire_cascade(PhaseState((1.0, 0.5, 0.2)), g, cfg)
