"""Grid maxima over parallelograms with local refinement."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Domain:
    """Parallelogram ``{origin + s e1 + u e2 : s, u in [0, 1]}``."""

    origin: complex
    e1: complex
    e2: complex

    @classmethod
    def rectangle(cls, x0: float, x1: float, y0: float, y1: float) -> "Domain":
        return cls(complex(x0, y0), complex(x1 - x0, 0.0), complex(0.0, y1 - y0))

    @classmethod
    def period(cls, lattice, base: complex = 0.0) -> "Domain":
        return cls(complex(base), lattice.omega1, lattice.omega2)

    def points(self, s, u):
        return self.origin + np.asarray(s)[..., None] * self.e1 + np.asarray(u)[None, ...] * self.e2

    @property
    def area(self) -> float:
        return abs((self.e1.conjugate() * self.e2).imag)


@dataclass(frozen=True)
class SupEstimate:
    """Grid maximum of a scalar field, with where it was found and the final spacing.

    ``spacing`` is the parameter step of the last refinement times the longer
    edge of the domain. The value is a lower bound on the true supremum.
    """

    value: float
    location: complex
    spacing: float


def grid_max(field, domain: Domain, resolution: int = 64, rounds: int = 2, factor: int = 8) -> SupEstimate:
    """Maximum of ``field`` (complex array -> real array) on a grid plus refinement.

    The coarse grid has ``resolution + 1`` points per axis including both
    edges. Each round re-grids the cells adjacent to the current winner with
    ``factor`` times finer spacing.
    """
    if resolution < 64:
        raise ValueError("resolution must be at least 64 per axis")
    h = 1.0 / resolution
    s = np.linspace(0.0, 1.0, resolution + 1)
    vals = np.asarray(field(domain.points(s, s)), dtype=float)
    i, j = np.unravel_index(int(np.argmax(vals)), vals.shape)
    best = float(vals[i, j])
    bs, bu = s[i], s[j]
    for _ in range(rounds):
        hn = h / factor
        ss = np.clip(bs + hn * np.arange(-factor, factor + 1), 0.0, 1.0)
        uu = np.clip(bu + hn * np.arange(-factor, factor + 1), 0.0, 1.0)
        vals = np.asarray(field(domain.points(ss, uu)), dtype=float)
        i, j = np.unravel_index(int(np.argmax(vals)), vals.shape)
        if vals[i, j] >= best:
            best = float(vals[i, j])
            bs, bu = ss[i], uu[j]
        h = hn
    loc = complex(domain.origin + bs * domain.e1 + bu * domain.e2)
    return SupEstimate(best, loc, h * max(abs(domain.e1), abs(domain.e2)))
