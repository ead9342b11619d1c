"""Disk geometry for the coverage area, the energy-harvesting zone and the guard zone.

Coordinates: the primary transmitter (PT) sits at the origin and the primary
receiver (PR) at ``(0, d_p)``.  All lengths are in metres.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class Point2(NamedTuple):
    x: float
    y: float

    def distance_to(self, other: "Point2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Region:
    """Coverage disk of radius ``coverage_radius`` centred on the PT, plus the two zones.

    ``eh_radius`` is the harvesting disk around the PT, ``gz_radius`` the
    guard disk around the PR located ``pr_distance`` away from the PT.
    """

    coverage_radius: float
    pr_distance: float
    eh_radius: float
    gz_radius: float

    def __post_init__(self):
        R = self.coverage_radius
        if not (math.isfinite(R) and R > 0):
            raise ValueError(f"coverage_radius must be > 0, got {R}")
        if not (0 <= self.pr_distance < R):
            raise ValueError(f"pr_distance must satisfy 0 <= d_p < R={R}, got {self.pr_distance}")
        if not (0 <= self.eh_radius <= R):
            raise ValueError(f"eh_radius must satisfy 0 <= r_eh <= R={R}, got {self.eh_radius}")
        if not (self.gz_radius >= 0 and math.isfinite(self.gz_radius)):
            raise ValueError(f"gz_radius must be >= 0, got {self.gz_radius}")

    @property
    def pr_position(self) -> Point2:
        return Point2(0.0, self.pr_distance)

    @property
    def area(self) -> float:
        return math.pi * self.coverage_radius**2


def uniform_in_disk(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    """``n`` i.i.d. uniform points on a disk centred at the origin, shape ``(n, 2)``."""
    r = radius * np.sqrt(rng.random(n))
    phi = rng.uniform(0.0, 2.0 * math.pi, n)
    return np.column_stack((r * np.cos(phi), r * np.sin(phi)))


def sample_ppp(intensity: float, region: Region, rng: np.random.Generator) -> np.ndarray:
    """Homogeneous PPP of the given intensity (points/m^2) on the coverage disk.

    Returns an ``(n, 2)`` array; ``n`` is Poisson with mean ``intensity * pi * R^2``.
    """
    if intensity < 0:
        raise ValueError(f"intensity must be >= 0, got {intensity}")
    if intensity == 0:
        return np.empty((0, 2))
    n = rng.poisson(intensity * region.area)
    return uniform_in_disk(rng, n, region.coverage_radius)


def eh_zone_probability(region: Region) -> float:
    """Probability that a uniform point of the coverage disk lies in the harvesting zone."""
    return (region.eh_radius / region.coverage_radius) ** 2


def _lens_fraction(R: float, d: float, r: float) -> float:
    # |C(0,R) ∩ C(d,r)| / (pi R^2) for partially overlapping disks
    phi_gz = math.acos(_clip((d * d + r * r - R * R) / (2.0 * d * r)))
    phi_cov = math.acos(_clip((R * R + d * d - r * r) / (2.0 * d * R)))
    return (phi_gz * r * r / (math.pi * R * R)
            + phi_cov / math.pi
            - d / (math.pi * R) * math.sin(phi_cov))


def _clip(c: float) -> float:
    return min(1.0, max(-1.0, c))


def gz_zone_probability(region: Region) -> float:
    """Fraction of the coverage disk covered by the guard disk around the PR.

    Nested and disjoint configurations are resolved before the lens formula
    is used, since its arccos arguments leave [-1, 1] there.
    """
    R, d, r = region.coverage_radius, region.pr_distance, region.gz_radius
    if r >= R + d:
        return 1.0
    if r + d <= R:
        return r * r / (R * R)
    if R + r <= d:
        return 0.0
    return min(1.0, max(0.0, _lens_fraction(R, d, r)))


def expected_pt_sr_distance(region: Region) -> float:
    """Mean distance from the disk centre to a uniform point of the disk: 2R/3."""
    return 2.0 * region.coverage_radius / 3.0
