"""Per-node reference model of one slot.

This is the readable counterpart of :mod:`cogaoi.sim.kernel`: every ST is
an explicit node with a position, a battery and an SR direction.  It is
slow (numpy per slot) and is used for tracing, for unit-level checks and as
a statistical cross-check of the compiled kernel.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Optional

import numpy as np

from ..aoi import PolicyKind
from ..config import NetworkConfig, TrafficConfig
from ..geometry import Point2, uniform_in_disk


class Battery(IntEnum):
    EMPTY = 0
    FULL = 1


@dataclass(frozen=True)
class StNode:
    position: Point2
    battery: Battery
    sr_direction: float  # radians


@dataclass
class SlotOutcome:
    primary_attempted: bool = False
    primary_success: bool = False
    channel_success: bool = False
    active_st_count: int = 0
    secondary_successes: int = 0
    dropped_packet: bool = False
    arrival: bool = False
    delivered_birth: Optional[int] = None
    full_count: int = 0


def age_update(age: int, current_slot: int, delivered_birth: Optional[int] = None) -> int:
    """Age at the end of ``current_slot``: reset to the delivered packet's age
    (transmission slot included) or grow by one."""
    if delivered_birth is None:
        return age + 1
    return current_slot - delivered_birth + 1


class FcfsQueue:
    policy = PolicyKind.FCFS

    def __init__(self):
        self.births: deque[int] = deque()

    def __len__(self):
        return len(self.births)

    def has_packet(self) -> bool:
        return bool(self.births)

    def serve(self, success: bool) -> Optional[int]:
        if self.births and success:
            return self.births.popleft()
        return None

    def arrive(self, slot: int) -> None:
        self.births.append(slot)


class ReplacementQueue:
    """One packet in service plus at most one waiting.

    ``handoff='freshest'``: when a service completes in a slot with a new
    arrival, the arrival takes the server and any waiting packet is dropped.
    ``handoff='fifo'``: the waiting packet takes the server and the arrival waits.
    """

    policy = PolicyKind.QR

    def __init__(self, handoff: str = "freshest"):
        self.in_service: Optional[int] = None
        self.waiting: Optional[int] = None
        self.handoff = handoff

    def __len__(self):
        return (self.in_service is not None) + (self.waiting is not None)

    def has_packet(self) -> bool:
        return self.in_service is not None

    def serve_and_arrive(self, success: bool, arrival_slot: Optional[int]) -> tuple[Optional[int], bool]:
        """Returns ``(delivered_birth, dropped)``."""
        delivered, dropped = None, False
        if self.in_service is not None and success:
            delivered = self.in_service
            if arrival_slot is None:
                self.in_service, self.waiting = self.waiting, None
            elif self.handoff == "fifo" and self.waiting is not None:
                self.in_service, self.waiting = self.waiting, arrival_slot
            else:
                dropped = self.waiting is not None
                self.in_service, self.waiting = arrival_slot, None
        elif arrival_slot is not None:
            if self.in_service is None:
                self.in_service = arrival_slot
            else:
                dropped = self.waiting is not None
                self.waiting = arrival_slot
        return delivered, dropped


class GenerateAtWill:
    policy = PolicyKind.GW

    def __len__(self):
        return 0


@dataclass
class World:
    network: NetworkConfig
    traffic: TrafficConfig
    policy: PolicyKind
    battery: np.ndarray                    # bool, True = Full
    positions: np.ndarray = field(default=None)
    sr_angles: np.ndarray = field(default=None)
    queue: object = None
    slot: int = 0
    age: int = 1
    harvest_always: bool = True

    @property
    def n_nodes(self) -> int:
        return len(self.battery)

    def nodes(self) -> list[StNode]:
        return [StNode(Point2(*self.positions[i]), Battery(int(self.battery[i])),
                       float(self.sr_angles[i])) for i in range(self.n_nodes)]


def init_world(network: NetworkConfig, traffic: TrafficConfig, policy: PolicyKind | str,
               rng: np.random.Generator, n_nodes: Optional[int] = None,
               qr_handoff: str = "freshest", harvest: str = "always") -> World:
    policy = PolicyKind.parse(policy)
    if n_nodes is None:
        n_nodes = int(rng.poisson(network.st_density * network.region.area))
    queue = {PolicyKind.FCFS: FcfsQueue,
             PolicyKind.QR: lambda: ReplacementQueue(qr_handoff),
             PolicyKind.GW: GenerateAtWill}[policy]()
    return World(network, traffic, policy, np.zeros(n_nodes, bool),
                 uniform_in_disk(rng, n_nodes, network.coverage_radius),
                 rng.uniform(0, 2 * math.pi, n_nodes), queue,
                 harvest_always=(harvest == "always"))


def _gains(rng, n, fixed):
    return np.ones(n) if fixed else rng.exponential(size=n)


def step_slot(world: World, rng: np.random.Generator,
              traffic_rng: Optional[np.random.Generator] = None,
              fixed_gains: bool = False, resample: bool = True) -> SlotOutcome:
    """Advance ``world`` by one slot.

    ``fixed_gains`` sets every fading gain to 1 and ``resample=False`` keeps
    the current node positions; both exist for hand-checkable tests.
    """
    net = world.network
    traffic_rng = traffic_rng if traffic_rng is not None else rng
    alpha = net.pathloss_exponent
    t = world.slot
    out = SlotOutcome()

    if world.policy is PolicyKind.GW:
        attempting = bool(traffic_rng.random() < world.traffic.q)
    else:
        attempting = world.queue.has_packet()
    out.primary_attempted = attempting

    n = world.n_nodes
    if resample:
        world.positions = uniform_in_disk(rng, n, net.coverage_radius)
        world.sr_angles = rng.uniform(0, 2 * math.pi, n)
    pos = world.positions
    full = world.battery.copy()
    out.full_count = int(full.sum())
    d_pr = np.hypot(pos[:, 0], pos[:, 1] - net.pr_distance)
    outside_gz = d_pr > net.gz_radius
    tx = full & outside_gz & (rng.random(n) < net.access_prob)
    in_eh = np.hypot(pos[:, 0], pos[:, 1]) <= net.eh_radius
    charge = ~full & in_eh
    if not (world.harvest_always or attempting):
        charge[:] = False
    world.battery = (full & ~tx) | charge
    out.active_st_count = int(tx.sum())

    # SINR at the PR
    tx_pos = pos[tx]
    interference = float(np.sum(net.secondary_power * _gains(rng, len(tx_pos), fixed_gains)
                                * d_pr[tx] ** (-alpha)))
    signal = net.primary_power * _gains(rng, 1, fixed_gains)[0] * net.pr_distance ** (-alpha) \
        if net.pr_distance > 0 else math.inf
    out.channel_success = bool(signal > net.sinr_threshold * (net.noise_power + interference))
    out.primary_success = attempting and out.channel_success

    # SINR at each active pair's SR
    if len(tx_pos):
        ang = world.sr_angles[tx]
        sr = tx_pos + net.sr_distance * np.column_stack((np.cos(ang), np.sin(ang)))
        d = np.hypot(tx_pos[None, :, 0] - sr[:, None, 0], tx_pos[None, :, 1] - sr[:, None, 1])
        k = len(tx_pos)
        g = np.ones((k, k)) if fixed_gains else rng.exponential(size=(k, k))
        rx = net.secondary_power * g * d ** (-alpha)
        sig = np.diag(rx).copy()
        np.fill_diagonal(rx, 0.0)
        pt = net.primary_power * _gains(rng, k, fixed_gains) * np.hypot(sr[:, 0], sr[:, 1]) ** (-alpha)
        out.secondary_successes = int(np.sum(sig > net.sinr_threshold * (net.noise_power + rx.sum(axis=1) + pt)))

    # primary queue
    q = world.queue
    if world.policy is PolicyKind.FCFS:
        out.delivered_birth = q.serve(out.channel_success)
        out.arrival = bool(traffic_rng.random() < world.traffic.arrival_rate)
        if out.arrival:
            q.arrive(t)
    elif world.policy is PolicyKind.QR:
        out.arrival = bool(traffic_rng.random() < world.traffic.arrival_rate)
        out.delivered_birth, out.dropped_packet = q.serve_and_arrive(
            out.channel_success, t if out.arrival else None)
    else:
        out.arrival = attempting
        if attempting:
            if out.channel_success:
                out.delivered_birth = t
            else:
                out.dropped_packet = True

    world.age = age_update(world.age, t, out.delivered_birth)
    world.slot += 1
    return out
