"""Closed-form average age of information at the PR, and secondary throughput.

Ages are in slots and include the one-slot transmission time, so a packet
delivered in the slot it was generated has age 1.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .markov import drop_probability, effective_arrival


class PolicyKind(str, Enum):
    FCFS = "fcfs"
    QR = "qr"
    GW = "gw"

    @classmethod
    def parse(cls, value: "str | PolicyKind") -> "PolicyKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown policy {value!r}; expected one of "
                             f"{[p.value for p in cls]}") from None


@dataclass(frozen=True)
class AoiResult:
    policy: PolicyKind
    mean_age: Optional[float]
    stable: bool
    aux: dict = field(default_factory=dict)


def _check(lam: float, mu: float) -> None:
    if not 0.0 < lam < 1.0:
        raise ValueError(f"arrival rate must lie in (0, 1), got {lam}")
    if not 0.0 < mu <= 1.0:
        raise ValueError(f"service rate must lie in (0, 1], got {mu}")


def aoi_fcfs(lam: float, mu: float) -> AoiResult:
    """Geo/Geo/1 FCFS; stable only for ``lam < mu``."""
    _check(lam, mu)
    rho = lam * (1.0 - mu) / (mu * (1.0 - lam))
    if lam >= mu:
        return AoiResult(PolicyKind.FCFS, None, False, {"rho": rho})
    age = 1.0 / lam + (1.0 - lam) / (mu - lam) - lam / mu**2 + lam / mu
    return AoiResult(PolicyKind.FCFS, age, True, {"rho": rho})


def aoi_qr(lam: float, mu: float) -> AoiResult:
    """Queue with replacement (one packet in service, one waiting).

    The expression is finite on the whole open unit square; no stability
    condition applies.  A result below one slot is flagged in ``aux['suspect']``.
    """
    _check(lam, mu)
    l, m = lam, mu
    delta = l * l * (1 - m) + l * (1 - m) * m + m * m
    eps = l + m - l * m
    bracket = (
        delta / (2 * l * m * eps)
        + l * (l * (3 * m - 2) - 2 * m + 1) / (l * l * (m - 1) ** 2 + l * m * (1 - 2 * m) + m * m)
        + (l**3 * (m - 2) * (m - 1) + l * l * (m - 2) * (m - 1) * m) / (2 * l * l * m * m * eps)
        + (l * m * m * (2 - 3 * m) + 2 * m**3) / (2 * l * l * m * m * eps)
        + (1 - l) / (l * m)
        + (2 * l + 1) / eps
        - (l + 1) / eps**2
        + 1 / m**2
    )
    age = l * m * eps * bracket / delta
    aux = {
        "delta": delta,
        "epsilon": eps,
        "p_d": drop_probability(lam, mu),
        "lambda_e": effective_arrival(lam, mu),
        "suspect": not (math.isfinite(age) and age >= 1.0),
    }
    if aux["suspect"]:
        warnings.warn(f"QR age formula gives {age} at lam={lam}, mu={mu}", stacklevel=2)
    return AoiResult(PolicyKind.QR, age, True, aux)


def aoi_gw(q: float, mu: float) -> AoiResult:
    """Generate-at-will with per-slot sampling probability ``q``."""
    if not 0.0 < q <= 1.0:
        raise ValueError(f"sampling rate must lie in (0, 1], got {q}")
    if not 0.0 < mu <= 1.0:
        raise ValueError(f"service rate must lie in (0, 1], got {mu}")
    return AoiResult(PolicyKind.GW, 1.0 / (mu * q), True, {})


def secondary_throughput(st_density: float, p_tr: float, p_sx: float) -> float:
    """Successful secondary transmissions per slot per m^2."""
    if st_density < 0:
        raise ValueError("st_density must be >= 0")
    return st_density * p_tr * p_sx
