"""Analytic-versus-simulation comparison table."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional

from .aoi import PolicyKind, aoi_fcfs, aoi_gw, aoi_qr
from .analysis import AnalyticReport, analyze, format_value
from .config import Scenario
from .sim.runner import SimMetrics, simulate_scenario

# relative tolerances; "3se" rows are judged against the batch-means standard error
TOLERANCES = {
    "p_ch": "3se",
    "p_tr": "3se",
    "mu_p": 0.05,
    "p_sx": 0.15,
    "throughput": 0.15,
    "aoi.fcfs|emp_mu_p": 0.02,
    "aoi.qr|emp_mu_p": 0.05,
    "aoi.gw|emp_mu_p": 0.01,
}
# with no secondary users every analytic quantity is exact
DEGENERATE_TOLERANCE = 0.01


@dataclass
class ValidationRow:
    quantity: str
    analytic: Optional[float]
    empirical: Optional[float]
    stderr: Optional[float]
    tolerance: str
    verdict: str          # pass | fail | report | n/a
    note: str = ""

    @property
    def rel_err(self) -> Optional[float]:
        if not _finite(self.analytic) or not _finite(self.empirical):
            return None
        if self.analytic == 0:
            return 0.0 if self.empirical == 0 else math.inf
        return (self.empirical - self.analytic) / abs(self.analytic)


@dataclass
class ValidationReport:
    analytic: AnalyticReport
    metrics: dict
    rows: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.verdict != "fail" for r in self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["quantity", "analytic", "empirical", "stderr", "rel_err", "tolerance", "verdict", "note"])
        for r in self.rows:
            w.writerow([r.quantity, format_value(r.analytic), format_value(r.empirical),
                        format_value(r.stderr), format_value(r.rel_err), r.tolerance,
                        r.verdict, r.note])
        return buf.getvalue()

    def format_table(self) -> str:
        lines = [f"{'quantity':<26}{'analytic':>14}{'empirical':>14}{'rel_err':>10}  {'tol':>6}  verdict"]
        for r in self.rows:
            rel = r.rel_err
            lines.append(f"{r.quantity:<26}{_fmt(r.analytic):>14}{_fmt(r.empirical):>14}"
                         f"{(f'{100 * rel:+.2f}%' if rel is not None and math.isfinite(rel) else 'n/a'):>10}"
                         f"  {r.tolerance:>6}  {r.verdict}{'  ' + r.note if r.note else ''}")
        lines.append("RESULT: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)


def _finite(x) -> bool:
    return x is not None and isinstance(x, (int, float)) and math.isfinite(x)


def _fmt(x) -> str:
    return f"{x:.6g}" if _finite(x) else "n/a"


def _judge(name: str, analytic, empirical, se, tol, tight: bool) -> ValidationRow:
    if not (_finite(analytic) and _finite(empirical)):
        return ValidationRow(name, analytic, empirical, se, str(tol), "n/a")
    if tol == "3se":
        if not _finite(se):
            return ValidationRow(name, analytic, empirical, se, "3se", "n/a", "no standard error")
        z = (empirical - analytic) / se if se > 0 else (0.0 if empirical == analytic else math.inf)
        verdict = "pass" if abs(z) <= 3.0 else "fail"
        return ValidationRow(name, analytic, empirical, se, "3se", verdict, f"z={z:+.2f}")
    if tight:
        tol = min(tol, DEGENERATE_TOLERANCE)
    row = ValidationRow(name, analytic, empirical, se, f"{100 * tol:g}%", "pass")
    if abs(row.rel_err) > tol:
        row.verdict = "fail"
    return row


def _report(name: str, analytic, empirical, se) -> ValidationRow:
    row = ValidationRow(name, analytic, empirical, se, "-", "report")
    if _finite(analytic) and _finite(empirical) and _finite(se) and se > 0:
        z = (empirical - analytic) / se
        row.note = f"z={z:+.2f} ({'within' if abs(z) <= 3 else 'outside'} 3se)"
    return row


def validate(scenario: Scenario, *, slots: Optional[int] = None,
             seed: Optional[int] = None) -> ValidationReport:
    net, traffic = scenario.network, scenario.traffic
    policies = traffic.policies
    rep = analyze(net, traffic, list(PolicyKind))
    metrics: dict[PolicyKind, SimMetrics] = {
        p: simulate_scenario(scenario, p, slots=slots, seed=seed) for p in policies}
    out = ValidationReport(rep, metrics)
    tight = net.st_density == 0
    # every policy run shares the channel stream, so channel rows use the first run
    m0 = metrics[policies[0]]
    rows = out.rows
    rows.append(_judge("p_ch", rep.p_ch, m0.emp_p_ch, m0.stderr["emp_p_ch"], TOLERANCES["p_ch"], tight))
    rows.append(_judge("p_tr", rep.p_tr, m0.emp_p_tr, m0.stderr["emp_p_tr"], TOLERANCES["p_tr"], tight))
    rows.append(_judge("mu_p", rep.mu_p, m0.emp_mu_p, m0.stderr["emp_mu_p"], TOLERANCES["mu_p"], tight))
    rows.append(_judge("p_sx", rep.p_sx, m0.emp_p_sx, m0.stderr["emp_p_sx"], TOLERANCES["p_sx"], tight))
    rows.append(_judge("throughput", rep.throughput, m0.emp_throughput, m0.stderr["emp_throughput"],
                       TOLERANCES["throughput"], tight))

    lam, q = traffic.arrival_rate, traffic.q
    if PolicyKind.QR in metrics:
        mq = metrics[PolicyKind.QR]
        mu = mq.emp_mu_p
        rows.append(_report("p_d.closed_form|emp_mu_p", _maybe(_drop, lam, mu, "closed_form"),
                            mq.emp_drop, mq.stderr["emp_drop"]))
        rows.append(_report("p_d.definitional|emp_mu_p", _maybe(_drop, lam, mu, "definitional"),
                            mq.emp_drop, mq.stderr["emp_drop"]))
        rows.append(_report("qr.pi2|emp_mu_p", _maybe(_pi2, lam, mu), mq.emp_full_buffer,
                            mq.stderr["emp_full_buffer"]))
        rows.append(_report("lambda_e|emp_mu_p", _maybe(_lambda_e, lam, mu),
                            mq.emp_effective_arrival, mq.stderr["emp_effective_arrival"]))

    formulas = {PolicyKind.FCFS: lambda mu: aoi_fcfs(lam, mu),
                PolicyKind.QR: lambda mu: aoi_qr(lam, mu),
                PolicyKind.GW: lambda mu: aoi_gw(q, mu)}
    for policy, m in metrics.items():
        key = f"aoi.{policy.value}"
        emp_mu = m.emp_mu_p
        res = formulas[policy](emp_mu) if emp_mu > 0 else None
        if res is None or not res.stable or m.diverged:
            rows.append(ValidationRow(key + "|emp_mu_p", None, m.mean_age, m.stderr["mean_age"],
                                      str(TOLERANCES[key + "|emp_mu_p"]), "n/a", "unstable"))
        else:
            rows.append(_judge(key + "|emp_mu_p", res.mean_age, m.mean_age, m.stderr["mean_age"],
                               TOLERANCES[key + "|emp_mu_p"], tight))
        full = rep.aoi[policy]
        rows.append(_report(key, full.mean_age if full.stable else None, m.mean_age,
                            m.stderr["mean_age"]))
    return out


def _maybe(fn, *args):
    try:
        return fn(*args)
    except ValueError:
        return None


def _drop(lam, mu, form):
    from .markov import drop_probability
    return drop_probability(lam, mu, form)


def _pi2(lam, mu):
    from .markov import qr_steady_state
    return qr_steady_state(lam, mu).pi[2]


def _lambda_e(lam, mu):
    from .markov import effective_arrival
    return effective_arrival(lam, mu)
