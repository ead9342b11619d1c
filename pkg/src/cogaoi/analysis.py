"""End-to-end closed-form evaluation of one scenario."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .aoi import AoiResult, PolicyKind, aoi_fcfs, aoi_gw, aoi_qr, secondary_throughput
from .channel import primary_success_probability, secondary_success_probability
from .config import NetworkConfig, TrafficConfig
from .geometry import eh_zone_probability, expected_pt_sr_distance, gz_zone_probability
from .markov import (
    DropForm,
    QueueSteadyState,
    battery_charge_probability,
    drop_probability,
    effective_arrival,
    fcfs_steady_state,
    qr_steady_state,
    transmit_probability,
)

FORMULAS = {
    "p_eh": "r_eh^2 / R^2",
    "p_gz": "|C(0,R) ∩ C((0,d_p),r_gz)| / (pi R^2)",
    "p_ch": "p_eh / (p_eh + p_s - p_gz p_s)",
    "p_tr": "p_ch (1 - p_gz) p_s",
    "active_density": "lambda_s p_tr",
    "mean_pt_sr_distance": "2R/3",
    "mu_p": "L_I*(theta d_p^a P_s/P_p, lambda_s p_tr, r_gz) exp(-theta sigma^2 d_p^a / P_p)",
    "p_sx": "exp(-pi lambda_s p_ch p_s d_s^2 theta^(2/a)) exp(-theta sigma^2 d_s^a/P_s) / (1 + d_s^2/E[d]^2 (theta P_p/P_s)^(2/a))",
    "throughput": "lambda_s p_tr p_sx",
    "fcfs.rho": "lambda (1-mu_p) / (mu_p (1-lambda))",
    "fcfs.pi0": "mu_p (1-lambda)/lambda pi1",
    "fcfs.pi1": "lambda (1-rho) / mu_p",
    "qr.pi0": "(lambda - mu_p) / (lambda rho^2 - mu_p)",
    "qr.pi1": "lambda / (mu_p (1-lambda)) pi0",
    "qr.pi2": "lambda^2 (1-mu_p) / (mu_p^2 (1-lambda)^2) pi0",
    "p_d.definitional": "pi1 lambda (1-mu_p) + pi2 (1-s)",
    "p_d.closed_form": "a2 / (1 + a1 + a2), a1 = lambda/(mu_p(1-lambda)), a2 = lambda^2(1-mu_p)/(mu_p^2(1-lambda))",
    "lambda_e": "lambda - lambda^3(1-mu_p) / (lambda^2(1-mu_p) + lambda(1-mu_p)mu_p + mu_p^2)",
    "aoi.fcfs": "1/lambda + (1-lambda)/(mu_p-lambda) - lambda/mu_p^2 + lambda/mu_p",
    "aoi.qr": "replacement-queue age expression in (lambda, mu_p, delta, epsilon)",
    "aoi.gw": "1 / (mu_p q)",
}


@dataclass(frozen=True)
class AnalyticReport:
    p_eh: float
    p_gz: float
    p_ch: Optional[float]
    p_tr: float
    active_density: float
    mean_pt_sr_distance: float
    mu_p: float
    p_sx: Optional[float]
    throughput: float
    arrival_rate: float
    sampling_rate: float
    fcfs: Optional[QueueSteadyState]
    qr: Optional[QueueSteadyState]
    p_d_definitional: Optional[float]
    p_d_closed: Optional[float]
    lambda_e: Optional[float]
    aoi: dict

    @property
    def fcfs_stable(self) -> bool:
        return self.fcfs is not None and self.fcfs.stable

    def items(self) -> list[tuple[str, object, str]]:
        """Flat ``(name, value, formula)`` triples in pipeline order."""
        out = [(k, getattr(self, k), FORMULAS[k]) for k in
               ("p_eh", "p_gz", "p_ch", "p_tr", "active_density", "mean_pt_sr_distance",
                "mu_p", "p_sx", "throughput")]
        out.append(("lambda", self.arrival_rate, "input"))
        out.append(("q", self.sampling_rate, "input"))
        if self.fcfs is not None:
            out.append(("fcfs.stable", self.fcfs.stable, "lambda < mu_p"))
            out.append(("fcfs.rho", self.fcfs.rho, FORMULAS["fcfs.rho"]))
            if self.fcfs.stable:
                out.append(("fcfs.pi0", self.fcfs.pi[0], FORMULAS["fcfs.pi0"]))
                out.append(("fcfs.pi1", self.fcfs.pi[1], FORMULAS["fcfs.pi1"]))
        if self.qr is not None:
            for i in range(3):
                out.append((f"qr.pi{i}", self.qr.pi[i], FORMULAS[f"qr.pi{i}"]))
        out.append(("p_d.definitional", self.p_d_definitional, FORMULAS["p_d.definitional"]))
        out.append(("p_d.closed_form", self.p_d_closed, FORMULAS["p_d.closed_form"]))
        out.append(("lambda_e", self.lambda_e, FORMULAS["lambda_e"]))
        for policy, res in self.aoi.items():
            value = res.mean_age if res.stable else "unstable"
            out.append((f"aoi.{policy.value}", value, FORMULAS[f"aoi.{policy.value}"]))
        return out


def analyze(network: NetworkConfig, traffic: TrafficConfig,
            policies: Optional[list[PolicyKind]] = None) -> AnalyticReport:
    region, radio = network.region, network.radio
    p_s = network.access_prob
    p_eh = eh_zone_probability(region)
    p_gz = gz_zone_probability(region)
    try:
        p_ch = battery_charge_probability(p_eh, p_gz, p_s)
        p_tr = transmit_probability(p_ch, p_gz, p_s)
    except ValueError:
        # frozen battery chain: no ST ever transmits
        p_ch, p_tr = None, 0.0
    active = network.st_density * p_tr
    mu = primary_success_probability(radio, region, active)
    p_sx = None
    if p_ch is not None:
        p_sx = secondary_success_probability(radio, region, network.sr_distance,
                                             network.st_density, p_ch, p_s)
    thr = secondary_throughput(network.st_density, p_tr, p_sx if p_sx is not None else 0.0)

    lam, q = traffic.arrival_rate, traffic.q
    policies = policies if policies is not None else traffic.policies
    fcfs = qr = None
    p_dd = p_dc = lam_e = None
    aoi: dict[PolicyKind, AoiResult] = {}
    if mu > 0:
        fcfs = fcfs_steady_state(lam, mu)
        qr = qr_steady_state(lam, mu)
        p_dd = drop_probability(lam, mu, DropForm.DEFINITIONAL)
        p_dc = drop_probability(lam, mu, DropForm.CLOSED_FORM)
        lam_e = effective_arrival(lam, mu)
        for policy in policies:
            if policy is PolicyKind.FCFS:
                aoi[policy] = aoi_fcfs(lam, mu)
            elif policy is PolicyKind.QR:
                aoi[policy] = aoi_qr(lam, mu)
            else:
                aoi[policy] = aoi_gw(q, mu)
    else:
        for policy in policies:
            aoi[policy] = AoiResult(policy, None, False, {"reason": "mu_p = 0"})
    return AnalyticReport(p_eh, p_gz, p_ch, p_tr, active, expected_pt_sr_distance(region),
                          mu, p_sx, thr, lam, q, fcfs, qr, p_dd, p_dc, lam_e, aoi)


def format_value(value) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    if isinstance(value, float) and not math.isfinite(value):
        return "n/a"
    return repr(float(value)) if isinstance(value, float) else str(value)
