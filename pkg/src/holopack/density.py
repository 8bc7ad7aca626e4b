"""Disk averages, density profiles, tilings and elliptic bounds.

The packing density is a limsup over radii and cannot be computed from
finitely many disks. A profile of disk averages is therefore the primary
output, and its windowed maximum over the last few radii is only an estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import specs as S
from .curves import density, energy_over_fundamental_domain
from .errors import ConstantCurve
from .geometry import Normalization
from .quadrature import QuadConfig, gauss_legendre, polar_disk_estimate

PI_LO = Fraction(223, 71)
PI_HI = Fraction(22, 7)
# rational enclosure of sqrt(2)
SQRT2_LO = Fraction(1414213562, 10**9)
SQRT2_HI = Fraction(1414213563, 10**9)
CONSTANT_ENERGY = 1e-12


@dataclass(frozen=True)
class RadiusSchedule:
    radii: tuple

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        if not radii:
            raise ValueError("schedule must be nonempty")
        if any(r <= 0 for r in radii) or any(b <= a for a, b in zip(radii, radii[1:])):
            raise ValueError("radii must be positive and strictly increasing")
        object.__setattr__(self, "radii", radii)

    @classmethod
    def doubling(cls, r0: float = 1.0, k_max: int = 7) -> "RadiusSchedule":
        """``R_k = 2^k r0`` for ``k = 0..k_max``."""
        return cls(tuple(r0 * 2.0**k for k in range(k_max + 1)))


@dataclass(frozen=True)
class DensityProfile:
    """Disk averages ``(R, average)`` with per-sample quadrature errors.

    ``tail_estimate`` is the maximum of the last ``window`` averages.
    """

    samples: tuple
    quad_error: tuple
    window: int = 3

    @property
    def radii(self) -> np.ndarray:
        return np.array([r for r, _ in self.samples])

    @property
    def averages(self) -> np.ndarray:
        return np.array([a for _, a in self.samples])

    @property
    def tail_estimate(self) -> float:
        return max(a for _, a in self.samples[-self.window:])

    def loglog_slope(self, r_min: float = 0.0, r_max: float = math.inf) -> float:
        """Least-squares slope of ``log average`` against ``log R`` on ``[r_min, r_max]``."""
        R, A = self.radii, self.averages
        keep = (R >= r_min) & (R <= r_max) & (A > 0)
        return float(np.polyfit(np.log(R[keep]), np.log(A[keep]), 1)[0])


def disk_average(spec: S.CurveSpec, R: float, quad_config: QuadConfig | None = None,
                 norm: Normalization = Normalization.FUBINI_STUDY) -> tuple[float, float]:
    """``(1/(pi R^2)) int_{|z|<=R} |df|^2`` and its error estimate."""
    cfg = quad_config or QuadConfig()
    value, err = polar_disk_estimate(lambda z: density(spec, z, norm), R, cfg)
    area = math.pi * R * R
    return value / area, err / area


def density_estimate(spec: S.CurveSpec, schedule: RadiusSchedule | None = None, window: int = 3,
                     quad_config: QuadConfig | None = None,
                     norm: Normalization = Normalization.FUBINI_STUDY) -> DensityProfile:
    schedule = schedule or RadiusSchedule.doubling()
    samples, errors = [], []
    for R in schedule.radii:
        avg, err = disk_average(spec, R, quad_config, norm)
        samples.append((R, avg))
        errors.append(err)
    return DensityProfile(tuple(samples), tuple(errors), window)


# -- elliptic sources ------------------------------------------------------------

def elliptic_lower_bound(spec: S.CurveSpec, lattice: S.Lattice | None = None,
                         norm: Normalization = Normalization.FUBINI_STUDY, resolution: int = 64) -> float:
    """``E / (||df||^2 vol)``, an estimate of the lower bound on the target capacity."""
    rep = energy_over_fundamental_domain(spec, lattice, norm=norm, resolution=resolution)
    if rep.energy < CONSTANT_ENERGY:
        raise ConstantCurve(f"energy {rep.energy:.3e} is below {CONSTANT_ENERGY:g}")
    return rep.energy / (rep.sup_df**2 * rep.vol)


def gap_ratio(spec: S.CurveSpec, lattice: S.Lattice | None = None, resolution: int = 64) -> float:
    """``||df||^2 vol / deg`` for a curve into ``CP^n``; at least 1 for non-constant curves."""
    rep = energy_over_fundamental_domain(spec, lattice, resolution=resolution)
    if rep.energy < CONSTANT_ENERGY:
        raise ConstantCurve(f"energy {rep.energy:.3e} is below {CONSTANT_ENERGY:g}")
    return rep.gap_ratio


# -- tilings -------------------------------------------------------------------------

@dataclass(frozen=True)
class TilingReport:
    """Origin-anchored squares of side ``side`` lying in the closed disk of radius ``R``.

    ``sandwich_holds`` certifies ``pi (R - sqrt2 side)^2 <= N side^2 <= pi R^2``
    in exact rationals with enclosures of ``pi`` and ``sqrt 2``.
    """

    R: float
    side: float
    count: int
    squares: tuple = field(repr=False)
    per_square_averages: tuple = field(repr=False)
    max_average: float
    sandwich_holds: bool


def tile_squares(R: float, side: float) -> list[tuple[int, int]]:
    """Lower-left indices ``(i, j)`` of the squares ``[i s, (i+1) s] x [j s, (j+1) s]`` inside the disk."""
    Rq, sq = Fraction(R), Fraction(side)
    n = int(math.ceil(R / side)) + 1
    r2 = (Rq / sq) ** 2
    out = []
    for i in range(-n, n):
        xi = max(abs(i), abs(i + 1))
        for j in range(-n, n):
            yj = max(abs(j), abs(j + 1))
            if xi * xi + yj * yj <= r2:
                out.append((i, j))
    return out


def sandwich_certified(R: float, side: float, count: int) -> bool:
    Rq, sq = Fraction(R), Fraction(side)
    upper = count * sq * sq <= PI_LO * Rq * Rq
    inner = Rq - SQRT2_LO * sq
    lower = inner <= 0 or PI_HI * inner * inner <= count * sq * sq
    return bool(upper and lower)


def tiling_report(spec: S.CurveSpec, R: float, side: float = 1.0, quad_order: int = 16,
                  norm: Normalization = Normalization.FUBINI_STUDY) -> TilingReport:
    if not side > 0:
        raise ValueError("side must be positive")
    if not R > 2 * side:
        raise ValueError("R must exceed 2*side")
    squares = tile_squares(R, side)
    x, w = gauss_legendre(quad_order, 0.0, side)
    W = (w[:, None] * w[None, :]).ravel()
    local = (x[:, None] + 1j * x[None, :]).ravel()
    idx = np.array(squares, dtype=float)
    corners = side * (idx[:, 0] + 1j * idx[:, 1])
    vals = np.asarray(density(spec, corners[:, None] + local[None, :], norm), dtype=float)
    vals = np.broadcast_to(vals, (len(squares), local.size))
    averages = tuple(math.fsum(row * W) / side**2 for row in vals)
    return TilingReport(float(R), float(side), len(squares), tuple(squares), averages,
                        max(averages), sandwich_certified(R, side, len(squares)))
