"""Stationary behaviour of the small Markov chains in the model.

* the two-state ST battery chain (Empty -> Full with the harvesting probability,
  Full -> Empty when the ST transmits),
* the Geo/Geo/1 FCFS queue at the PT (birth-death chain, up-rate
  ``r = λ(1-μ)``, down-rate ``s = μ(1-λ)``),
* the three-state queue-with-replacement chain.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .geometry import Region, eh_zone_probability, gz_zone_probability


def _check_prob(name: str, p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {p}")


@dataclass(frozen=True)
class AccessProbabilities:
    p_eh: float
    p_gz: float
    p_s: float
    p_ch: float
    p_tr: float = field(init=False)

    def __post_init__(self):
        for name in ("p_eh", "p_gz", "p_s", "p_ch"):
            _check_prob(name, getattr(self, name))
        object.__setattr__(self, "p_tr", transmit_probability(self.p_ch, self.p_gz, self.p_s))

    @classmethod
    def from_region(cls, region: Region, p_s: float) -> "AccessProbabilities":
        p_eh = eh_zone_probability(region)
        p_gz = gz_zone_probability(region)
        return cls(p_eh, p_gz, p_s, battery_charge_probability(p_eh, p_gz, p_s))


def battery_charge_probability(p_eh: float, p_gz: float, p_s: float) -> float:
    """Stationary probability that an ST starts a slot with a full battery."""
    for name, p in (("p_eh", p_eh), ("p_gz", p_gz), ("p_s", p_s)):
        _check_prob(name, p)
    denom = p_eh + p_s - p_gz * p_s
    if denom <= 0:
        raise ValueError("battery chain is frozen (no charging and no discharging); "
                         "p_ch is undefined")
    return p_eh / denom


def transmit_probability(p_ch: float, p_gz: float, p_s: float) -> float:
    return p_ch * (1.0 - p_gz) * p_s


@dataclass(frozen=True)
class QueueSteadyState:
    """Stationary distribution of a PT queue chain.

    For FCFS ``pi`` holds ``(π0, π1)`` and ``π_n = ρ^(n-1) π1`` for ``n >= 1``;
    for QR it holds all three states.  Unstable chains carry ``pi == ()``.
    """

    pi: tuple[float, ...]
    rho: float
    r: float
    s: float
    stable: bool
    geometric_tail: bool = False

    def prob(self, n: int) -> float:
        if not self.stable:
            raise ValueError("unstable queue has no stationary distribution")
        if n < 0:
            return 0.0
        if self.geometric_tail and n >= 1:
            return self.rho ** (n - 1) * self.pi[1]
        return self.pi[n] if n < len(self.pi) else 0.0

    def total_mass(self) -> float:
        if self.geometric_tail:
            return self.pi[0] + self.pi[1] / (1.0 - self.rho)
        return sum(self.pi)


def _check_rates(lam: float, mu: float) -> None:
    if not 0.0 < lam < 1.0:
        raise ValueError(f"arrival rate must lie in (0, 1), got {lam}")
    if not 0.0 < mu <= 1.0:
        raise ValueError(f"service rate must lie in (0, 1], got {mu}")


def fcfs_steady_state(lam: float, mu: float) -> QueueSteadyState:
    _check_rates(lam, mu)
    r, s = lam * (1.0 - mu), mu * (1.0 - lam)
    rho = r / s
    if lam >= mu:
        return QueueSteadyState((), rho, r, s, stable=False, geometric_tail=True)
    pi1 = lam * (1.0 - rho) / mu
    pi0 = mu * (1.0 - lam) / lam * pi1
    return QueueSteadyState((pi0, pi1), rho, r, s, stable=True, geometric_tail=True)


def qr_steady_state(lam: float, mu: float) -> QueueSteadyState:
    _check_rates(lam, mu)
    r, s = lam * (1.0 - mu), mu * (1.0 - lam)
    rho = r / s
    w1 = lam / (mu * (1.0 - lam))
    w2 = lam**2 * (1.0 - mu) / (mu**2 * (1.0 - lam) ** 2)
    denom = lam * rho**2 - mu
    if lam == mu or denom == 0:
        pi0 = 1.0 / (1.0 + w1 + w2)
    else:
        pi0 = (lam - mu) / denom
    return QueueSteadyState((pi0, w1 * pi0, w2 * pi0), rho, r, s, stable=True)


class DropForm(str, Enum):
    DEFINITIONAL = "definitional"
    CLOSED_FORM = "closed_form"


def drop_probability(lam: float, mu: float, form: DropForm | str = DropForm.CLOSED_FORM) -> float:
    """Drop probability of the replacement queue.

    ``definitional``: ``π1 λ(1-μ) + π2 (1-s)`` over the three-state chain
    (algebraically the stationary mass of the full-buffer state).
    ``closed_form``: the rational expression that the effective-arrival
    formula is built on.  The two disagree; see ``README``.
    """
    _check_rates(lam, mu)
    form = DropForm(form)
    if form is DropForm.DEFINITIONAL:
        st = qr_steady_state(lam, mu)
        return st.pi[1] * lam * (1.0 - mu) + st.pi[2] * (1.0 - st.s)
    a1 = lam / (mu * (1.0 - lam))
    a2 = lam**2 * (1.0 - mu) / (mu**2 * (1.0 - lam))
    return a2 / (1.0 + a1 + a2)


def effective_arrival(lam: float, mu: float) -> float:
    if lam == 0:
        return 0.0
    _check_rates(lam, mu)
    num = lam**3 * (1.0 - mu)
    den = lam**2 * (1.0 - mu) + lam * (1.0 - mu) * mu + mu**2
    return lam - num / den
