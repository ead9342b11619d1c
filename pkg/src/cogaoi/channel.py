"""Link-level radio model: power-law path loss, unit-mean Rayleigh power gains, SINR
and the closed-form success probabilities of the primary and secondary links."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .geometry import Region, expected_pt_sr_distance
from .quadrature import adaptive_simpson


class DegenerateSinrError(ArithmeticError):
    """Raised for 0/0: no signal, no interference and no noise."""


@dataclass(frozen=True)
class RadioParams:
    primary_power: float
    secondary_power: float
    pathloss_exponent: float
    noise_power: float
    sinr_threshold: float  # linear

    def __post_init__(self):
        if not self.primary_power > 0:
            raise ValueError(f"primary_power must be > 0, got {self.primary_power}")
        if not self.secondary_power > 0:
            raise ValueError(f"secondary_power must be > 0, got {self.secondary_power}")
        if not self.pathloss_exponent > 2:
            raise ValueError(f"pathloss_exponent must be > 2, got {self.pathloss_exponent}")
        if not self.noise_power >= 0:
            raise ValueError(f"noise_power must be >= 0, got {self.noise_power}")
        if not self.sinr_threshold > 0:
            raise ValueError(f"sinr_threshold must be > 0, got {self.sinr_threshold}")
        if self.secondary_power > self.primary_power:
            warnings.warn("secondary_power exceeds primary_power; the model assumes P_s << P_p",
                          stacklevel=3)


@dataclass(frozen=True)
class LinkSample:
    gain: float      # |h|^2
    distance: float

    def received_power(self, tx_power: float, alpha: float) -> float:
        return tx_power * self.gain * self.distance ** (-alpha)


def sinr(signal_power: float, interference_sum: float, noise: float) -> float:
    if signal_power < 0 or interference_sum < 0 or noise < 0:
        raise ValueError("powers must be non-negative")
    denom = noise + interference_sum
    if denom == 0:
        if signal_power == 0:
            raise DegenerateSinrError("0/0 SINR: no signal, interference or noise")
        return math.inf
    return signal_power / denom


def interference_integral(t: float, exclusion_radius: float, alpha: float,
                          rel_tol: float = 1e-9) -> float:
    """``∫_r^∞ t v^-α / (1 + t v^-α) v dv``.

    With ``w = v^2 t^(-2/α)`` this is ``(t^(2/α)/2) ∫_{w0}^∞ dw / (1 + w^(α/2))``.
    The part beyond ``W = max(w0, 1)`` is mapped onto a finite interval by
    ``w = s^(-γ)``, ``γ = 1/(α/2 - 1)``, which turns it into
    ``∫_0^{W^(-1/γ)} γ / (1 + s^(γα/2)) ds`` with a bounded integrand for every α > 2.
    """
    if alpha <= 2:
        raise ValueError(f"alpha must be > 2 for a finite interference integral, got {alpha}")
    if t == 0:
        return 0.0
    beta = alpha / 2.0
    scale = t ** (2.0 / alpha)
    w0 = exclusion_radius**2 / scale
    head = 0.0
    if w0 < 1.0:
        head = adaptive_simpson(lambda w: 1.0 / (1.0 + w**beta), w0, 1.0, rel_tol)
    gamma = 1.0 / (beta - 1.0)
    power = gamma * beta
    s_max = max(w0, 1.0) ** (-1.0 / gamma)
    tail = adaptive_simpson(lambda s: gamma / (1.0 + s**power), 0.0, s_max, rel_tol)
    return 0.5 * scale * (head + tail)


def laplace_interference(t: float, active_density: float, exclusion_radius: float,
                         alpha: float, rel_tol: float = 1e-9) -> float:
    """Laplace functional of PPP interference with Rayleigh fading outside a disk of
    radius ``exclusion_radius`` around the receiver:
    ``exp(-2π λ_a ∫_r^∞ t v^-α / (1 + t v^-α) v dv)``."""
    if t < 0 or active_density < 0 or exclusion_radius < 0:
        raise ValueError("t, active_density and exclusion_radius must be non-negative")
    if alpha <= 2:
        raise ValueError(f"alpha must be > 2, got {alpha}")
    if t == 0 or active_density == 0:
        return 1.0
    integral = interference_integral(t, exclusion_radius, alpha, rel_tol)
    return math.exp(-2.0 * math.pi * active_density * integral)


def primary_success_probability(radio: RadioParams, region: Region,
                                active_density: float) -> float:
    """P[SINR_p > θ] with interferers of density ``active_density`` outside the guard disk."""
    a = radio.pathloss_exponent
    dp_a = region.pr_distance ** a
    t = radio.sinr_threshold * dp_a * radio.secondary_power / radio.primary_power
    laplace = laplace_interference(t, active_density, region.gz_radius, a)
    noise = math.exp(-radio.sinr_threshold * radio.noise_power * dp_a / radio.primary_power)
    return laplace * noise


def secondary_success_probability(radio: RadioParams, region: Region, sr_distance: float,
                                  st_density: float, p_ch: float, p_s: float) -> float:
    """Approximate P[SINR_i > θ] for a secondary pair at link distance ``sr_distance``.

    Three factors: the PGFL term for secondary interferers (no fading-shape
    constant), the noise term, and PT interference with the PT-SR distance
    replaced by its mean 2R/3.
    """
    for name, p in (("p_ch", p_ch), ("p_s", p_s)):
        if not 0 <= p <= 1:
            raise ValueError(f"{name} must lie in [0, 1], got {p}")
    if st_density < 0 or sr_distance <= 0:
        raise ValueError("st_density must be >= 0 and sr_distance > 0")
    a = radio.pathloss_exponent
    theta = radio.sinr_threshold
    ds2 = sr_distance**2
    sec = math.exp(-math.pi * st_density * p_ch * p_s * ds2 * theta ** (2.0 / a))
    noise = math.exp(-theta * radio.noise_power * sr_distance**a / radio.secondary_power)
    mean_d = expected_pt_sr_distance(region)
    pt = 1.0 / (1.0 + ds2 / mean_d**2 * (theta * radio.primary_power / radio.secondary_power) ** (2.0 / a))
    return sec * noise * pt
