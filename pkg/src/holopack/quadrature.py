"""Fixed-order quadrature rules over disks, sectors and parallelograms.

Every rule here evaluates the integrand on a node set that depends only on the
geometry and the configuration, and accumulates with ``math.fsum`` in a fixed
order, so results are bit-stable for a given configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import QuadratureDiverged


@lru_cache(maxsize=64)
def _leggauss(n: int):
    x, w = leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n: int, a: float, b: float):
    """Nodes and weights of the ``n``-point Gauss-Legendre rule on ``[a, b]``."""
    x, w = _leggauss(int(n))
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


@dataclass(frozen=True)
class QuadConfig:
    """Node layout for polar quadrature.

    The radial interval is split into annuli no wider than ``annulus_width``,
    each integrated with a ``radial_order``-point Gauss rule. Each annulus
    uses a uniform angular rule with ``angular_density`` nodes per unit of
    arc length at its outer radius (at least ``min_angular``).
    """

    annulus_width: float = 1.0
    radial_order: int = 8
    angular_density: float = 8.0
    min_angular: int = 32
    max_points: int = 40_000_000

    def doubled(self) -> "QuadConfig":
        return replace(self, radial_order=2 * self.radial_order, angular_density=2 * self.angular_density,
                       min_angular=2 * self.min_angular)

    def halved(self) -> "QuadConfig":
        return replace(self, radial_order=max(2, self.radial_order // 2),
                       angular_density=self.angular_density / 2, min_angular=max(8, self.min_angular // 2))


def polar_disk_integral(f, R: float, config: QuadConfig = QuadConfig(), center: complex = 0.0) -> float:
    """Integral of ``f`` over the disk ``|z - center| <= R`` (``f`` maps complex arrays to reals)."""
    if R <= 0:
        raise ValueError("R must be positive")
    n_ann = max(1, int(math.ceil(R / config.annulus_width - 1e-12)))
    edges = np.linspace(0.0, R, n_ann + 1)
    partial = []
    # group annuli into batches of bounded size
    batch_r, batch_w, batch_n = [], [], []
    budget = 2_000_000

    def flush():
        if not batch_r:
            return
        pts, wts = [], []
        for rr, ww, nn in zip(batch_r, batch_w, batch_n):
            th = 2 * math.pi * (np.arange(nn) + 0.5) / nn
            pts.append((rr[:, None] * np.exp(1j * th)[None, :]).ravel())
            wts.append(np.repeat(ww * rr * (2 * math.pi / nn), nn))
        vals = f(center + np.concatenate(pts))
        prod = np.asarray(vals, dtype=float) * np.concatenate(wts)
        offset = 0
        for rr, nn in zip(batch_r, batch_n):
            size = rr.size * nn
            partial.append(math.fsum(prod[offset:offset + size]))
            offset += size
        batch_r.clear(), batch_w.clear(), batch_n.clear()

    total_pts = 0
    for i in range(n_ann):
        r, w = gauss_legendre(config.radial_order, edges[i], edges[i + 1])
        n_theta = max(config.min_angular, int(math.ceil(config.angular_density * 2 * math.pi * edges[i + 1])))
        total_pts += r.size * n_theta
        if total_pts > config.max_points:
            raise QuadratureDiverged(f"node budget {config.max_points} exceeded at R={R}")
        batch_r.append(r), batch_w.append(w), batch_n.append(n_theta)
        if sum(x.size * n for x, n in zip(batch_r, batch_n)) >= budget:
            flush()
    flush()
    return math.fsum(partial)


def polar_disk_estimate(f, R: float, config: QuadConfig = QuadConfig(), rel_floor: float = 1e-12):
    """Disk integral with an error estimate from node doubling.

    Returns ``(value, error)`` where ``value`` uses ``config`` and ``error`` is
    its difference from the layout with half the nodes per direction. Raises
    ``QuadratureDiverged`` if that difference is larger than the one between
    the half and quarter layouts (beyond a noise floor), or if the integrand
    is not finite.
    """
    half = config.halved()
    quarter = half.halved()
    values = [polar_disk_integral(f, R, c) for c in (quarter, half, config)]
    if not all(math.isfinite(v) for v in values):
        raise QuadratureDiverged(f"non-finite integrand on the disk of radius {R}")
    q, h, base = values
    err = abs(base - h)
    prev = abs(h - q)
    floor = rel_floor * abs(base) + 1e-13 * R * R
    if err > floor and err > prev:
        raise QuadratureDiverged(
            f"disk quadrature error grew under doubling at R={R}: {prev:.3e} -> {err:.3e}")
    return base, err


def sector_integral(f, r0: float, alpha: float, opening: float = math.pi / 2,
                    radial_order: int = 48, angular_order: int = 48, center: complex = 0.0) -> float:
    """Integral over ``{center + r e^{i theta}: r <= r0, alpha <= theta <= alpha + opening}``."""
    r, wr = gauss_legendre(radial_order, 0.0, r0)
    th, wt = gauss_legendre(angular_order, alpha, alpha + opening)
    z = center + r[:, None] * np.exp(1j * th)[None, :]
    vals = np.asarray(f(z), dtype=float)
    return math.fsum((vals * (wr * r)[:, None] * wt[None, :]).ravel())


def parallelogram_integral(f, origin: complex, e1: complex, e2: complex, n1: int, n2: int | None = None) -> float:
    """Tensor Gauss rule over ``{origin + s e1 + u e2 : s, u in [0, 1]}``."""
    n2 = n1 if n2 is None else n2
    s, ws = gauss_legendre(n1, 0.0, 1.0)
    u, wu = gauss_legendre(n2, 0.0, 1.0)
    z = origin + s[:, None] * e1 + u[None, :] * e2
    jac = abs((complex(e1).conjugate() * complex(e2)).imag)
    vals = np.asarray(f(z), dtype=float)
    rows = [math.fsum(row) for row in vals * ws[:, None] * wu[None, :]]
    return jac * math.fsum(rows)


def disk_node_count(R: float, config: QuadConfig = QuadConfig()) -> int:
    """Number of integrand evaluations :func:`polar_disk_integral` makes for radius ``R``."""
    n_ann = max(1, int(math.ceil(R / config.annulus_width - 1e-12)))
    edges = np.linspace(0.0, R, n_ann + 1)
    per_ring = [max(config.min_angular, int(math.ceil(config.angular_density * 2 * math.pi * e))) for e in edges[1:]]
    return config.radial_order * sum(per_ring)
