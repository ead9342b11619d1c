"""Compiled slot loop.

STs are exchangeable and their positions are redrawn every slot, so the
population is carried as a count of Full batteries.  Each slot:

1. PT activity is fixed from the queue state at slot start (GW draws its
   sample here);
2. every Full ST draws a uniform position; those outside the guard disk
   transmit with probability p_s and end the slot Empty;
3. every ST that started the slot Empty lands in the harvesting disk with
   probability r_eh^2/R^2 and ends the slot Full (only when the PT radiates,
   in ``pt_active`` harvest mode);
4. SINR at the PR and at the SRs of (up to ``max_pairs``) transmitting pairs,
   with fresh unit-mean exponential gains on every link;
5. queue service, arrival and age update.

Two random streams are used: ``ch`` for geometry and fading, ``tr`` for
arrivals and GW sampling.  Policies run with the same seed therefore see the
same channel sample path when harvesting does not depend on the PT queue.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

FCFS, QR, GW = 0, 1, 2

# per-batch accumulator columns
S_SLOTS = 0
S_AGE = 1
S_CHAN_OK = 2
S_FULL = 3
S_ACTIVE = 4
S_NODES = 5
S_PAIRS = 6
S_PAIR_OK = 7
S_PAIR_OK_W = 8     # pair successes scaled by active/evaluated
S_ARRIVALS = 9
S_DROPS = 10
S_DELIVERED = 11
S_ATTEMPTS = 12
S_PRIM_OK = 13
S_FULL_BUF = 14
N_STATS = 15

# totals over the whole run, warm-up included
T_ARRIVALS = 0
T_DELIVERED = 1
T_DROPPED = 2
T_IN_SYSTEM = 3
N_TOTALS = 4

P_R, P_DP, P_DS, P_REH, P_RGZ, P_PP, P_PS, P_ALPHA, P_NOISE, P_THETA, P_ACCESS, P_LAM, P_Q = range(13)
N_PARAMS = 13


@njit(cache=True)
def _pathloss(d2, half_alpha, int_half):
    # d^-alpha from the squared distance
    if int_half > 0:
        v = d2
        for _ in range(int_half - 1):
            v *= d2
        return 1.0 / v
    return math.exp(-half_alpha * math.log(d2))


@njit(cache=True)
def run_kernel(ch, tr, n_nodes, slots, warmup, params, policy, harvest_always,
               qr_fifo, max_pairs, stats, totals, trace, qtrace):
    R = params[P_R]
    d_p = params[P_DP]
    d_s = params[P_DS]
    rgz2 = params[P_RGZ] ** 2
    p_eh = (params[P_REH] / R) ** 2
    P_p = params[P_PP]
    P_s = params[P_PS]
    half_alpha = 0.5 * params[P_ALPHA]
    int_half = int(half_alpha) if half_alpha == int(half_alpha) else 0
    noise = params[P_NOISE]
    theta = params[P_THETA]
    p_s = params[P_ACCESS]
    lam = params[P_LAM]
    q = params[P_Q]

    if d_p > 0:
        pr_gain = _pathloss(d_p * d_p, half_alpha, int_half)
    else:
        pr_gain = np.inf
    sr_gain = _pathloss(d_s * d_s, half_alpha, int_half)

    tx_x = np.empty(max(n_nodes, 1))
    tx_y = np.empty(max(n_nodes, 1))
    sr_x = np.empty(max(n_nodes, 1))
    sr_y = np.empty(max(n_nodes, 1))

    cap = 1024
    buf = np.empty(cap, np.int64)
    head = 0
    count = 0
    in_service = -1
    waiting = -1

    full = 0
    age = 1
    n_batches = stats.shape[0]
    n_meas = slots - warmup
    record_trace = trace.shape[0] == slots
    n_q = qtrace.shape[0]
    q_stride = max(1, slots // max(n_q, 1))
    qi = 0

    for t in range(slots):
        # 1. PT activity at slot start
        if policy == GW:
            attempting = tr.random() < q
        elif policy == FCFS:
            attempting = count > 0
        else:
            attempting = in_service >= 0

        # 2. access by Full STs
        k_start = full
        n_tx = 0
        for _ in range(k_start):
            while True:
                x = R * (2.0 * ch.random() - 1.0)
                y = R * (2.0 * ch.random() - 1.0)
                if x * x + y * y <= R * R:
                    break
            dy = y - d_p
            if x * x + dy * dy > rgz2 and ch.random() < p_s:
                tx_x[n_tx] = x
                tx_y[n_tx] = y
                n_tx += 1

        # 3. harvesting by STs that started Empty
        charged = 0
        if harvest_always or attempting:
            empty = n_nodes - k_start
            if empty > 0 and p_eh > 0.0:
                charged = ch.binomial(empty, p_eh)
        full = k_start - n_tx + charged

        # 4a. SINR at the PR
        interference = 0.0
        for i in range(n_tx):
            dx = tx_x[i]
            dy = tx_y[i] - d_p
            interference += P_s * ch.exponential() * _pathloss(dx * dx + dy * dy, half_alpha, int_half)
        signal = P_p * ch.exponential() * pr_gain
        chan_ok = signal > theta * (noise + interference)

        # 4b. SINR at the SRs of the first min(n_tx, max_pairs) transmitters;
        # transmitter order is exchangeable, so this is a uniform subset
        n_eval = min(n_tx, max_pairs)
        pair_ok = 0
        for i in range(n_eval):
            phi = 2.0 * math.pi * ch.random()
            sr_x[i] = tx_x[i] + d_s * math.cos(phi)
            sr_y[i] = tx_y[i] + d_s * math.sin(phi)
        for i in range(n_eval):
            acc = noise
            for j in range(n_tx):
                if j != i:
                    dx = tx_x[j] - sr_x[i]
                    dy = tx_y[j] - sr_y[i]
                    acc += P_s * ch.exponential() * _pathloss(dx * dx + dy * dy, half_alpha, int_half)
            acc += P_p * ch.exponential() * _pathloss(sr_x[i] * sr_x[i] + sr_y[i] * sr_y[i],
                                                      half_alpha, int_half)
            if P_s * ch.exponential() * sr_gain > theta * acc:
                pair_ok += 1

        # 5. queue
        delivered = False
        birth = -1
        dropped = 0
        arrival = False
        if policy == FCFS:
            if count > 0 and chan_ok:
                birth = buf[head]
                head = (head + 1) & (cap - 1)
                count -= 1
                delivered = True
            arrival = tr.random() < lam
            if arrival:
                if count == cap:
                    grown = np.empty(2 * cap, np.int64)
                    for k in range(count):
                        grown[k] = buf[(head + k) & (cap - 1)]
                    buf = grown
                    head = 0
                    cap *= 2
                buf[(head + count) & (cap - 1)] = t
                count += 1
        elif policy == QR:
            arrival = tr.random() < lam
            if in_service >= 0 and chan_ok:
                birth = in_service
                delivered = True
                if arrival:
                    if qr_fifo:
                        if waiting >= 0:
                            in_service = waiting
                            waiting = t
                        else:
                            in_service = t
                    else:
                        if waiting >= 0:
                            dropped = 1
                        in_service = t
                        waiting = -1
                else:
                    in_service = waiting
                    waiting = -1
            elif arrival:
                if in_service < 0:
                    in_service = t
                else:
                    if waiting >= 0:
                        dropped = 1
                    waiting = t
        else:
            arrival = attempting
            if attempting:
                if chan_ok:
                    birth = t
                    delivered = True
                else:
                    dropped = 1

        if delivered:
            age = t - birth + 1
        else:
            age += 1

        totals[T_ARRIVALS] += arrival
        totals[T_DELIVERED] += delivered
        totals[T_DROPPED] += dropped

        if policy == FCFS:
            qlen = count
        elif policy == QR:
            qlen = (in_service >= 0) + (waiting >= 0)
        else:
            qlen = 0

        if t >= warmup:
            b = (t - warmup) * n_batches // n_meas
            stats[b, S_SLOTS] += 1
            stats[b, S_AGE] += age
            stats[b, S_CHAN_OK] += chan_ok
            stats[b, S_FULL] += k_start
            stats[b, S_ACTIVE] += n_tx
            stats[b, S_NODES] += n_nodes
            stats[b, S_PAIRS] += n_eval
            stats[b, S_PAIR_OK] += pair_ok
            if n_eval > 0:
                stats[b, S_PAIR_OK_W] += pair_ok * n_tx / n_eval
            stats[b, S_ARRIVALS] += arrival
            stats[b, S_DROPS] += dropped
            stats[b, S_DELIVERED] += delivered
            stats[b, S_ATTEMPTS] += attempting
            stats[b, S_PRIM_OK] += attempting and chan_ok
            stats[b, S_FULL_BUF] += waiting >= 0

        if record_trace:
            trace[t, 0] = t
            trace[t, 1] = qlen
            trace[t, 2] = age
            trace[t, 3] = n_tx
            trace[t, 4] = attempting and chan_ok
        if n_q > 0 and t % q_stride == 0 and qi < n_q:
            qtrace[qi] = qlen
            qi += 1

    if policy == FCFS:
        totals[T_IN_SYSTEM] = count
    elif policy == QR:
        totals[T_IN_SYSTEM] = (in_service >= 0) + (waiting >= 0)
    return full
