"""Pullback energy density of holomorphic curves.

The Fubini-Study density of a curve with homogeneous lift ``F`` is

    |df|^2 = (|F|^2 |F'|^2 - |<F, F'>|^2) / (pi |F|^4),

evaluated here as ``|F'_perp|^2 / (pi |F|^2)`` with ``F'_perp`` the part of
``F'`` orthogonal to ``F``. The value is invariant under ``F -> hF`` for any
non-vanishing holomorphic ``h``, which is what makes chart switching and
quasi-periodic lifts harmless.

All functions broadcast over leading axes; the component axis is last.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ChartOverflow, InvalidNormalization, ZeroLift

RELIFT_THRESHOLD = 1e100


class Normalization(enum.Enum):
    FUBINI_STUDY = "fubini_study"
    RESCALED_SPHERE = "rescaled_sphere"
    EUCLIDEAN = "euclidean"


@dataclass(frozen=True)
class CurveJet:
    """Values ``F(z)`` and ``F'(z)`` of a homogeneous lift, batched."""

    lift: np.ndarray
    derivative: np.ndarray

    def __post_init__(self):
        lift = np.asarray(self.lift, dtype=complex)
        der = np.asarray(self.derivative, dtype=complex)
        if lift.shape != der.shape:
            raise ValueError("lift and derivative must have equal shape")
        if lift.ndim == 0 or lift.shape[-1] < 2:
            raise ValueError("a jet needs at least two homogeneous components")
        object.__setattr__(self, "lift", lift)
        object.__setattr__(self, "derivative", der)

    @property
    def dim(self) -> int:
        return self.lift.shape[-1] - 1

    def scaled(self, lam) -> "CurveJet":
        lam = np.asarray(lam)[..., None]
        return CurveJet(self.lift * lam, self.derivative * lam)

    def included(self, target_dim: int) -> "CurveJet":
        pad = target_dim - self.dim
        if pad <= 0:
            raise ValueError("target dim must exceed the jet dim")
        width = [(0, 0)] * (self.lift.ndim - 1) + [(0, pad)]
        return CurveJet(np.pad(self.lift, width), np.pad(self.derivative, width))


def relift(jet: CurveJet) -> CurveJet:
    """Divide by the largest-magnitude component wherever any exceeds 1e100."""
    mag = np.abs(jet.lift)
    big = mag.max(axis=-1) > RELIFT_THRESHOLD
    if not np.any(big):
        return jet
    idx = mag.argmax(axis=-1)
    pivot = np.take_along_axis(jet.lift, idx[..., None], axis=-1)[..., 0]
    lam = np.where(big, 1.0 / np.where(big, pivot, 1.0), 1.0)
    return jet.scaled(lam)


def fs_density(jet: CurveJet) -> np.ndarray:
    """Fubini-Study energy density ``|df|^2`` at every point of ``jet``."""
    F, dF = jet.lift, jet.derivative
    scale = np.abs(F).max(axis=-1)
    if np.any(scale == 0) or not np.all(np.isfinite(scale)):
        if np.any(scale == 0):
            raise ZeroLift("lift vanishes in every component; re-lift in another chart")
        raise ChartOverflow("non-finite lift component")
    s = scale[..., None]
    F = F / s
    dF = dF / s
    n2 = np.sum(F.real**2 + F.imag**2, axis=-1)
    inner = np.sum(F.conj() * dF, axis=-1)
    perp = dF - (inner / n2)[..., None] * F
    value = np.sum(perp.real**2 + perp.imag**2, axis=-1) / (math.pi * n2)
    return value


def density_from_jet(jet: CurveJet, norm: Normalization = Normalization.FUBINI_STUDY) -> np.ndarray:
    """Density in a projective normalization; the Euclidean case needs the curve family."""
    if norm is Normalization.FUBINI_STUDY:
        return fs_density(jet)
    if norm is Normalization.RESCALED_SPHERE:
        if jet.dim != 1:
            raise InvalidNormalization("the rescaled sphere metric needs a curve into CP^1")
        return math.pi * fs_density(jet)
    raise InvalidNormalization("Euclidean density depends on the flat target; use curves.density")


def spherical_norm(f_val, f_deriv, norm: Normalization = Normalization.FUBINI_STUDY,
                   inverted: bool = False):
    """Norm ``|df|`` of a meromorphic function from its value and derivative.

    With ``inverted=True`` the inputs are the chart data ``w = 1/f`` and
    ``w'``. Otherwise the chart flips to ``1/f`` whenever ``|f| > 1``.
    """
    if norm is Normalization.EUCLIDEAN:
        raise InvalidNormalization("spherical_norm is defined for the sphere metrics only")
    f = np.asarray(f_val, dtype=complex)
    d = np.asarray(f_deriv, dtype=complex)
    with np.errstate(all="ignore"):
        af = np.abs(f)
        flip = af > 1
        # in the 1/f chart |w'|/(1+|w|^2) = (|f'|/|f|^2)/(1 + 1/|f|^2)
        safe = np.where(flip, af, 1.0)
        value = np.where(flip,
                         (np.abs(d) / safe**2) / (1.0 + 1.0 / safe**2),
                         np.abs(d) / (1.0 + af**2))
    if not np.all(np.isfinite(value)):
        raise ChartOverflow("both charts overflow; supply finite data in the other chart")
    if norm is Normalization.FUBINI_STUDY:
        value = value / math.sqrt(math.pi)
    return value[()] if value.ndim == 0 else value


def rescale_curve(spec, m: float):
    """The curve ``z -> f(z/m)``; its density at ``z`` is ``density(z/m)/m^2``."""
    from .specs import Scaled

    return Scaled(spec, m)
