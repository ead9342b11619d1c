"""Monte Carlo runs and their batch-means estimators."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import stats as sps

from ..aoi import PolicyKind
from ..config import NetworkConfig, Scenario, TrafficConfig
from . import kernel as K

ESTIMATORS = (
    "mean_age", "emp_mu_p", "emp_p_sx", "emp_p_tr", "emp_p_ch", "emp_drop",
    "emp_throughput", "emp_full_buffer", "emp_attempt_success", "emp_effective_arrival",
)

_POLICY_CODE = {PolicyKind.FCFS: K.FCFS, PolicyKind.QR: K.QR, PolicyKind.GW: K.GW}


@dataclass
class SimMetrics:
    policy: PolicyKind
    slots_run: int
    replications: int
    n_nodes: tuple
    mean_age: float
    emp_mu_p: float
    emp_p_sx: float
    emp_p_tr: float
    emp_p_ch: float
    emp_drop: float
    emp_throughput: float
    emp_full_buffer: float
    emp_attempt_success: float
    emp_effective_arrival: float
    stderr: dict
    n_batches: int
    diverged: bool
    arrivals: int
    delivered: int
    dropped: int
    in_system: int
    queue_trace: tuple = ()
    trace: Optional[np.ndarray] = field(default=None, repr=False)

    def value(self, name: str) -> float:
        return getattr(self, name)

    def ci_halfwidth(self, name: str, level: float = 0.95) -> float:
        se = self.stderr[name]
        if not math.isfinite(se) or self.n_batches < 2:
            return math.nan
        return float(sps.t.ppf(0.5 + level / 2.0, self.n_batches - 1)) * se


def _params(network: NetworkConfig, traffic: TrafficConfig) -> np.ndarray:
    p = np.empty(K.N_PARAMS)
    p[K.P_R] = network.coverage_radius
    p[K.P_DP] = network.pr_distance
    p[K.P_DS] = network.sr_distance
    p[K.P_REH] = network.eh_radius
    p[K.P_RGZ] = network.gz_radius
    p[K.P_PP] = network.primary_power
    p[K.P_PS] = network.secondary_power
    p[K.P_ALPHA] = network.pathloss_exponent
    p[K.P_NOISE] = network.noise_power
    p[K.P_THETA] = network.sinr_threshold
    p[K.P_ACCESS] = network.access_prob
    p[K.P_LAM] = traffic.arrival_rate
    p[K.P_Q] = traffic.q
    return p


def _ratio(num: np.ndarray, den: np.ndarray) -> tuple[float, float]:
    total = den.sum()
    if total <= 0:
        return math.nan, math.nan
    point = num.sum() / total
    ok = den > 0
    if ok.sum() < 2:
        return point, math.nan
    per_batch = num[ok] / den[ok]
    return float(point), float(per_batch.std(ddof=1) / math.sqrt(ok.sum()))


def run_simulation(network: NetworkConfig, traffic: TrafficConfig, slots: int, seed: int, *,
                   policy: PolicyKind | str | None = None, replications: int = 1,
                   batches: int = 20, warmup_fraction: float = 0.1, harvest: str = "always",
                   qr_handoff: str = "freshest", max_pairs: int = 8,
                   trace: bool = False, queue_trace_points: int = 200) -> SimMetrics:
    """Simulate ``replications`` independent runs of ``slots`` slots and pool their batches.

    ``max_pairs`` caps the secondary pairs whose SINR is evaluated per slot
    (0 disables secondary statistics).  With ``trace`` the per-slot trace of
    the first replication is attached as an int array with columns
    ``slot, queue_len, age, active_count, primary_success``.
    """
    if policy is None:
        if traffic.policy == "all":
            raise ValueError("run_simulation needs a single policy")
        policy = traffic.policy
    policy = PolicyKind.parse(policy)
    if slots < 10_000:
        raise ValueError(f"slots must be >= 10000, got {slots}")
    if batches < 20:
        raise ValueError(f"batches must be >= 20, got {batches}")
    if harvest not in ("always", "pt_active"):
        raise ValueError(f"harvest must be 'always' or 'pt_active', got {harvest!r}")
    if qr_handoff not in ("freshest", "fifo"):
        raise ValueError(f"qr_handoff must be 'freshest' or 'fifo', got {qr_handoff!r}")
    warmup = int(slots * warmup_fraction)
    if slots - warmup < batches:
        raise ValueError("too few measured slots for the batch count")

    params = _params(network, traffic)
    area = math.pi * network.coverage_radius**2
    all_stats = []
    totals = np.zeros(K.N_TOTALS, np.int64)
    nodes = []
    qtrace_out = ()
    trace_out = None
    for rep, child in enumerate(np.random.SeedSequence(seed).spawn(replications)):
        pop_ss, ch_ss, tr_ss = child.spawn(3)
        n_nodes = int(np.random.default_rng(pop_ss).poisson(network.st_density * area))
        nodes.append(n_nodes)
        stats = np.zeros((batches, K.N_STATS))
        tr_arr = np.zeros((slots if (trace and rep == 0) else 0, 5), np.int64)
        qtr = np.zeros(queue_trace_points if rep == 0 else 0, np.int64)
        K.run_kernel(np.random.default_rng(ch_ss), np.random.default_rng(tr_ss), n_nodes,
                     slots, warmup, params, _POLICY_CODE[policy], harvest == "always",
                     qr_handoff == "fifo", max_pairs, stats, totals, tr_arr, qtr)
        all_stats.append(stats)
        if rep == 0:
            qtrace_out = tuple(int(v) for v in qtr)
            trace_out = tr_arr if trace else None

    s = np.concatenate(all_stats)

    def col(c):
        return s[:, c]

    est, se = {}, {}
    est["mean_age"], se["mean_age"] = _ratio(col(K.S_AGE), col(K.S_SLOTS))
    est["emp_mu_p"], se["emp_mu_p"] = _ratio(col(K.S_CHAN_OK), col(K.S_SLOTS))
    est["emp_p_ch"], se["emp_p_ch"] = _ratio(col(K.S_FULL), col(K.S_NODES))
    est["emp_p_tr"], se["emp_p_tr"] = _ratio(col(K.S_ACTIVE), col(K.S_NODES))
    if max_pairs > 0:
        est["emp_p_sx"], se["emp_p_sx"] = _ratio(col(K.S_PAIR_OK_W), col(K.S_ACTIVE))
        est["emp_throughput"], se["emp_throughput"] = _ratio(col(K.S_PAIR_OK_W), col(K.S_SLOTS) * area)
    else:
        est["emp_p_sx"] = se["emp_p_sx"] = math.nan
        est["emp_throughput"] = se["emp_throughput"] = math.nan
    est["emp_drop"], se["emp_drop"] = _ratio(col(K.S_DROPS), col(K.S_ARRIVALS))
    est["emp_full_buffer"], se["emp_full_buffer"] = _ratio(col(K.S_FULL_BUF), col(K.S_SLOTS))
    est["emp_attempt_success"], se["emp_attempt_success"] = _ratio(col(K.S_PRIM_OK), col(K.S_ATTEMPTS))
    est["emp_effective_arrival"], se["emp_effective_arrival"] = _ratio(
        col(K.S_ARRIVALS) - col(K.S_DROPS), col(K.S_SLOTS))
    if policy is not PolicyKind.QR:
        est["emp_full_buffer"] = se["emp_full_buffer"] = math.nan

    diverged = policy is PolicyKind.FCFS and traffic.arrival_rate >= est["emp_mu_p"]
    return SimMetrics(
        policy=policy, slots_run=slots, replications=replications, n_nodes=tuple(nodes),
        stderr=se, n_batches=len(s), diverged=bool(diverged),
        arrivals=int(totals[K.T_ARRIVALS]), delivered=int(totals[K.T_DELIVERED]),
        dropped=int(totals[K.T_DROPPED]), in_system=int(totals[K.T_IN_SYSTEM]),
        queue_trace=qtrace_out, trace=trace_out, **est)


def simulate_scenario(scenario: Scenario, policy: PolicyKind | str, *,
                      slots: Optional[int] = None, seed: Optional[int] = None,
                      trace: bool = False, max_pairs: int = 8) -> SimMetrics:
    sim = scenario.sim
    return run_simulation(
        scenario.network, scenario.traffic,
        slots if slots is not None else sim.slots,
        seed if seed is not None else sim.seed,
        policy=policy, replications=sim.replications, batches=sim.batches,
        warmup_fraction=sim.warmup_fraction, harvest=sim.harvest,
        qr_handoff=sim.qr_handoff, trace=trace, max_pairs=max_pairs)
