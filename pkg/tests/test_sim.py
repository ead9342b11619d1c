import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cogaoi.aoi import aoi_gw
from cogaoi.config import NetworkConfig, TrafficConfig
from cogaoi.markov import drop_probability, qr_steady_state
from cogaoi.sim import SlotOutcome, age_update, init_world, run_simulation, step_slot
from cogaoi.sim.world import FcfsQueue, ReplacementQueue


def noise_only(mu, **kw):
    """Network without STs whose primary link succeeds with probability ``mu``."""
    sigma2 = -math.log(mu) / 200.0**4 if mu < 1 else 0.0
    return NetworkConfig(st_density=0.0, noise_power=sigma2, **kw)


def test_age_update_conventions():
    assert age_update(7, 30, 30) == 1
    assert age_update(3, 14, 10) == 5
    assert age_update(3, 14) == 4


def test_fcfs_queue_order():
    q = FcfsQueue()
    q.arrive(1)
    q.arrive(2)
    assert q.serve(False) is None
    assert q.serve(True) == 1 and len(q) == 1


@pytest.mark.parametrize("handoff, expected", [("freshest", (5, 5, None)), ("fifo", (5, 7, 9))])
def test_replacement_queue_handoff(handoff, expected):
    q = ReplacementQueue(handoff)
    q.serve_and_arrive(False, 5)
    q.serve_and_arrive(False, 6)
    assert q.serve_and_arrive(False, 7) == (None, True)     # 6 replaced by 7
    delivered, dropped = q.serve_and_arrive(True, 9)
    assert delivered == expected[0]
    assert q.in_service == (9 if handoff == "freshest" else expected[1])
    assert q.waiting == expected[2]
    assert dropped is (handoff == "freshest")
    assert len(q) <= 2


def test_idle_slot_outcome_is_empty():
    net = NetworkConfig()
    world = init_world(net, TrafficConfig(policy="fcfs", arrival_rate=1e-9),
                       "fcfs", np.random.default_rng(0))
    out = step_slot(world, np.random.default_rng(1))
    assert out.full_count == 0 and out.active_st_count == 0
    assert not (out.primary_attempted or out.primary_success or out.dropped_packet or out.arrival)
    assert out.secondary_successes == 0 and out.delivered_birth is None
    assert world.age == 2 and world.slot == 1


@pytest.mark.parametrize("factor, ok", [(1 - 1e-9, True), (1 + 1e-9, False)])
def test_primary_sinr_single_interferer_by_hand(factor, ok):
    d_p, P_p, P_s, sigma2, alpha = 200.0, 1.0, 1e-3, 1e-10, 4.0
    pos = np.array([[150.0, 0.0]])
    d = math.hypot(150.0, 200.0)
    exact = P_p * d_p**-alpha / (sigma2 + P_s * d**-alpha)
    net = NetworkConfig(sinr_threshold=exact * factor, access_prob=1.0, gz_radius=10.0)
    world = init_world(net, TrafficConfig(policy="fcfs"), "fcfs", np.random.default_rng(0), n_nodes=1)
    world.positions = pos
    world.sr_angles = np.zeros(1)
    world.battery[:] = True
    world.queue.arrive(-1)
    out = step_slot(world, np.random.default_rng(3), fixed_gains=True, resample=False)
    assert out.active_st_count == 1
    assert out.channel_success is ok and out.primary_success is ok
    assert not world.battery[0]   # transmitting spent the charge


def test_guard_zone_blocks_access():
    net = NetworkConfig(access_prob=1.0)
    world = init_world(net, TrafficConfig(), "gw", np.random.default_rng(0), n_nodes=1)
    world.positions = np.array([[0.0, 150.0]])   # 50 m from the PR
    world.battery[:] = True
    out = step_slot(world, np.random.default_rng(1), fixed_gains=True, resample=False)
    assert out.active_st_count == 0 and world.battery[0]


def test_harvesting_only_in_zone():
    net = NetworkConfig()
    world = init_world(net, TrafficConfig(), "gw", np.random.default_rng(0), n_nodes=2)
    world.positions = np.array([[10.0, 0.0], [0.0, -300.0]])
    step_slot(world, np.random.default_rng(1), resample=False)
    assert world.battery.tolist() == [True, False]


def test_reference_engine_battery_fraction():
    net = NetworkConfig()
    rng = np.random.default_rng(7)
    world = init_world(net, TrafficConfig(), "gw", rng)
    full = []
    for t in range(3000):
        out = step_slot(world, rng)
        if t >= 300:
            full.append(out.full_count / world.n_nodes)
    p_ch = 0.0256 / (0.0256 + 0.5 - 0.0576 * 0.5)
    assert np.mean(full) == pytest.approx(p_ch, rel=0.03)


def test_reference_engine_agrees_with_kernel():
    net = NetworkConfig(st_density=3e-3)
    tr = TrafficConfig(arrival_rate=0.3)
    rng = np.random.default_rng(5)
    world = init_world(net, tr, "fcfs", rng)
    ok = np.array([step_slot(world, rng).channel_success for _ in range(6000)])
    m = run_simulation(net, tr, 100_000, 3, policy="fcfs", max_pairs=0)
    se = math.sqrt(m.emp_mu_p * (1 - m.emp_mu_p) / len(ok))
    assert abs(ok.mean() - m.emp_mu_p) < 4 * se + 3 * m.stderr["emp_mu_p"]


def test_determinism():
    a = run_simulation(NetworkConfig(), TrafficConfig(), 50_000, 17, policy="qr", replications=2)
    b = run_simulation(NetworkConfig(), TrafficConfig(), 50_000, 17, policy="qr", replications=2)
    fa, fb = dataclasses.asdict(a), dataclasses.asdict(b)
    assert fa.keys() == fb.keys()
    for k in fa:
        if k != "trace":
            assert repr(fa[k]) == repr(fb[k]), k
    c = run_simulation(NetworkConfig(), TrafficConfig(), 50_000, 18, policy="qr")
    assert c.mean_age != a.mean_age


@pytest.mark.parametrize("policy", ["fcfs", "qr", "gw"])
def test_conservation(policy):
    m = run_simulation(NetworkConfig(), TrafficConfig(arrival_rate=0.5), 40_000, 2,
                       policy=policy, replications=1)
    assert m.arrivals == m.delivered + m.dropped + m.in_system
    assert m.arrivals > 0


def test_queue_length_bounds_from_trace():
    qr = run_simulation(NetworkConfig(), TrafficConfig(arrival_rate=0.7), 20_000, 4, policy="qr", trace=True)
    assert qr.trace.shape == (20_000, 5)
    assert qr.trace[:, 1].max() <= 2 and qr.trace[:, 1].min() >= 0
    fc = run_simulation(NetworkConfig(), TrafficConfig(arrival_rate=0.7), 20_000, 4, policy="fcfs", trace=True)
    steps = np.diff(fc.trace[:, 1])
    assert fc.trace[:, 1].min() >= 0 and set(np.unique(steps)) <= {-1, 0, 1}
    assert (fc.trace[:, 0] == np.arange(20_000)).all()


def test_unstable_fcfs_flagged():
    m = run_simulation(noise_only(0.4), TrafficConfig(arrival_rate=0.5), 20_000, 1, policy="fcfs")
    assert m.diverged


def test_gw_perfect_channel_exact():
    net = NetworkConfig(st_density=0.0, noise_power=0.0, sinr_threshold=1.0)
    m = run_simulation(net, TrafficConfig(arrival_rate=0.5, sampling_rate=1.0), 20_000, 1, policy="gw")
    assert m.emp_mu_p == 1.0 and m.mean_age == 1.0


def test_gw_renewal_identity():
    m = run_simulation(noise_only(0.6), TrafficConfig(sampling_rate=1.0), 400_000, 3, policy="gw")
    assert m.mean_age == pytest.approx(1 / 0.6, rel=0.01)
    d = run_simulation(NetworkConfig(), TrafficConfig(sampling_rate=0.3), 400_000, 3, policy="gw")
    assert d.mean_age * d.emp_mu_p * 0.3 == pytest.approx(1.0, abs=0.01)
    assert d.mean_age == pytest.approx(aoi_gw(0.3, d.emp_mu_p).mean_age, rel=0.01)


def test_noise_only_success_rate():
    net = NetworkConfig(st_density=0.0, noise_power=2e-10)
    m = run_simulation(net, TrafficConfig(), 200_000, 8, policy="gw", replications=1)
    exact = math.exp(-2e-10 * 200.0**4)
    assert abs(m.emp_mu_p - exact) <= 3 * m.stderr["emp_mu_p"]


def test_freshest_handoff_realises_closed_form_drop():
    m = run_simulation(noise_only(0.5), TrafficConfig(arrival_rate=0.2), 1_000_000, 5, policy="qr")
    assert abs(m.emp_drop - drop_probability(0.2, 0.5, "closed_form")) <= 3 * m.stderr["emp_drop"]


def test_fifo_handoff_realises_three_state_chain():
    m = run_simulation(noise_only(0.5), TrafficConfig(arrival_rate=0.2), 1_000_000, 5, policy="qr",
                       qr_handoff="fifo")
    pi2 = qr_steady_state(0.2, 0.5).pi[2]
    assert abs(m.emp_full_buffer - pi2) <= 3 * m.stderr["emp_full_buffer"]
    # per-arrival drops: a waiting packet is overwritten only when service fails
    assert abs(m.emp_drop - pi2 * 0.5) <= 3 * m.stderr["emp_drop"]


def test_active_fraction_matches_product():
    m = run_simulation(NetworkConfig(), TrafficConfig(), 200_000, 6, policy="gw", max_pairs=0)
    p_ch = 0.0256 / (0.0256 + 0.5 - 0.0576 * 0.5)
    p_tr = p_ch * (1 - 0.0576) * 0.5
    assert abs(m.emp_p_tr - p_tr) <= 3 * m.stderr["emp_p_tr"]
    assert abs(m.emp_p_ch - p_ch) <= 3 * m.stderr["emp_p_ch"]
    assert math.isnan(m.emp_p_sx)


def test_replications_shrink_half_width():
    one = run_simulation(NetworkConfig(), TrafficConfig(), 100_000, 9, policy="gw", replications=1)
    ten = run_simulation(NetworkConfig(), TrafficConfig(), 100_000, 9, policy="gw", replications=10)
    ratio = ten.ci_halfwidth("mean_age") / one.ci_halfwidth("mean_age")
    assert 0.5 / math.sqrt(10) < ratio < 1.6 / math.sqrt(10)


def test_pt_active_harvesting_reduces_charge():
    tr = TrafficConfig(arrival_rate=0.05)
    always = run_simulation(NetworkConfig(), tr, 100_000, 1, policy="fcfs", max_pairs=0)
    strict = run_simulation(NetworkConfig(), tr, 100_000, 1, policy="fcfs", max_pairs=0, harvest="pt_active")
    assert strict.emp_p_ch < 0.5 * always.emp_p_ch


def test_argument_checks():
    with pytest.raises(ValueError):
        run_simulation(NetworkConfig(), TrafficConfig(), 100, 1, policy="gw")
    with pytest.raises(ValueError):
        run_simulation(NetworkConfig(), TrafficConfig(), 20_000, 1)
    with pytest.raises(ValueError):
        run_simulation(NetworkConfig(), TrafficConfig(), 20_000, 1, policy="gw", batches=4)
    with pytest.raises(ValueError):
        run_simulation(NetworkConfig(), TrafficConfig(), 20_000, 1, policy="gw", harvest="sometimes")


def test_slot_outcome_defaults():
    assert SlotOutcome().delivered_birth is None


@settings(max_examples=15, deadline=None)
@given(lam=st.floats(0.02, 0.98), seed=st.integers(0, 2**32 - 1),
       policy=st.sampled_from(["fcfs", "qr", "gw"]), handoff=st.sampled_from(["freshest", "fifo"]))
def test_conservation_property(lam, seed, policy, handoff):
    m = run_simulation(NetworkConfig(), TrafficConfig(arrival_rate=lam), 10_000, seed,
                       policy=policy, qr_handoff=handoff, max_pairs=2)
    assert m.arrivals == m.delivered + m.dropped + m.in_system
    assert m.mean_age >= 1.0


@settings(max_examples=10, deadline=None)
@given(lam=st.floats(0.05, 0.95), seed=st.integers(0, 2**32 - 1))
def test_replacement_never_older_than_fcfs(lam, seed):
    # same seed means the same channel and arrival sample paths; the replacement
    # queue serves whenever FCFS does and always sends a packet at least as fresh
    kw = dict(max_pairs=0, trace=True)
    f = run_simulation(NetworkConfig(), TrafficConfig(arrival_rate=lam), 10_000, seed, policy="fcfs", **kw)
    q = run_simulation(NetworkConfig(), TrafficConfig(arrival_rate=lam), 10_000, seed, policy="qr", **kw)
    assert (q.trace[:, 2] <= f.trace[:, 2]).all()
