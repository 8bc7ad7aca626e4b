"""Jet evaluation, sup-norm scans and period energies for the curve registry.

Every family returns analytic derivatives. Lifts are rescaled per point where
that keeps binary64 in range; a per-point constant factor leaves every
density unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from . import specs as S
from .errors import InvalidCurve, InvalidNormalization, NotPeriodic
from .geometry import CurveJet, Normalization, density_from_jet, relift
from .quadrature import parallelogram_integral
from .scan import Domain, SupEstimate, grid_max
from .theta import EmbeddingSpec, phi_l_jet
from .weierstrass import wp_jet

PERIODICITY_TOL = 1e-8


# -- jets ----------------------------------------------------------------------

def _rational_jet(spec: S.Rational, z):
    # clear denominators: F_i = P_i * prod_{j != i} Q_j
    comps = []
    for i, (num, _) in enumerate(spec.components):
        poly = np.array(num, dtype=complex)
        for j, (_, den) in enumerate(spec.components):
            if j != i:
                poly = P.polymul(poly, np.array(den, dtype=complex))
        comps.append(poly)
    lift = np.stack([P.polyval(z, c) for c in comps], axis=-1)
    der = np.stack([P.polyval(z, P.polyder(c)) if len(c) > 1 else np.zeros_like(z) for c in comps], axis=-1)
    return lift, der


def _explinear_jet(spec: S.ExpLinear, z):
    a = np.array([t[0] for t in spec.terms])
    b = np.array([t[1] for t in spec.terms])
    expo = np.concatenate([np.zeros(z.shape + (1,), dtype=complex), z[..., None] * a + b], axis=-1)
    # divide by exp(max real part) so the largest component has modulus 1
    shift = expo.real.max(axis=-1, keepdims=True)
    lift = np.exp(expo - shift)
    der = lift * np.concatenate([[0.0], a])
    return lift, der


def _theta_jet(spec: S.ThetaEmbedding, z):
    """Lift of ``phi_l`` at ``z``, reduced to the cell ``K`` by quasi-periodicity.

    With ``z = z0 + alpha tau + beta`` and integers ``alpha, beta``, the
    components satisfy ``theta_i(z) = h(z) c_i theta_i(z0)`` with a common
    nonvanishing ``h`` and ``c_i = exp(2 pi i (a_i beta - alpha b_i))``.
    Dropping ``h`` is a holomorphic gauge change.
    """
    emb = EmbeddingSpec.for_tau(spec.tau, spec.l, spec.tol)
    tau = spec.tau
    alpha = np.floor(z.imag / tau.imag)
    z1 = z - alpha * tau
    beta = np.floor(z1.real)
    z0 = z1 - beta
    jet = phi_l_jet(z0, emb)
    # alpha*b_i and a_i*beta mod 1 stay exact on the 1/l grid
    l = spec.l
    ai = np.repeat(np.arange(l), l)
    bi = np.tile(np.arange(l), l)
    alpha_i = np.mod(alpha, l).astype(np.int64)[..., None]
    beta_i = np.mod(beta, l).astype(np.int64)[..., None]
    phase = np.mod(ai * beta_i - alpha_i * bi, l) / l
    c = np.exp(2j * math.pi * phase)
    return jet.lift * c, jet.derivative * c


def evaluate_jet(spec: S.CurveSpec, z, chart: str = "auto") -> CurveJet:
    """``(F(z), F'(z))`` for any registry spec.

    ``chart`` only affects Weierstrass curves: ``"direct"`` raises
    ``PoleAtLatticePoint`` at lattice points, ``"inverted"`` uses ``1/wp``.
    """
    z = np.asarray(z, dtype=complex)
    if isinstance(spec, S.Rational):
        lift, der = _rational_jet(spec, z)
    elif isinstance(spec, S.ExpLinear):
        lift, der = _explinear_jet(spec, z)
    elif isinstance(spec, S.WeierstrassP):
        lift, der = wp_jet(z, spec.lattice, spec.tol, chart)
    elif isinstance(spec, S.ThetaEmbedding):
        lift, der = _theta_jet(spec, z)
    elif isinstance(spec, S.Scaled):
        inner = evaluate_jet(spec.inner, z / spec.m, chart)
        return CurveJet(inner.lift, inner.derivative / spec.m)
    elif isinstance(spec, S.Included):
        return evaluate_jet(spec.inner, z, chart).included(spec.target_dim)
    else:
        raise InvalidCurve(f"not a curve spec: {spec!r}")
    return relift(CurveJet(lift, der))


# -- densities -------------------------------------------------------------------

def _euclidean(spec: S.CurveSpec, z):
    if isinstance(spec, S.Rational):
        # affine chart F_i/F_0 of C^n
        jet = evaluate_jet(spec, z)
        F, dF = jet.lift, jet.derivative
        f0, d0 = F[..., :1], dF[..., :1]
        with np.errstate(all="ignore"):
            d = (dF[..., 1:] * f0 - F[..., 1:] * d0) / f0**2
        out = np.sum(np.abs(d) ** 2, axis=-1)
        if not np.all(np.isfinite(out)):
            raise InvalidNormalization("Euclidean density needs F_0 != 0 (a pole of the affine chart)")
        return out
    if isinstance(spec, S.ExpLinear):
        # flat cylinder metric on (C*)^n: |d(a z + b)|^2 per factor
        a = np.array([t[0] for t in spec.terms])
        return np.full(np.shape(z), float(np.sum(np.abs(a) ** 2)))
    if isinstance(spec, S.Scaled):
        return _euclidean(spec.inner, np.asarray(z) / spec.m) / spec.m**2
    if isinstance(spec, S.Included):
        return _euclidean(spec.inner, z)
    raise InvalidNormalization(f"{type(spec).__name__} has no flat target")


def density(spec: S.CurveSpec, z, norm: Normalization = Normalization.FUBINI_STUDY):
    """Energy density ``|df|^2`` of ``spec`` at ``z`` in the requested normalization."""
    z = np.asarray(z, dtype=complex)
    if norm is Normalization.EUCLIDEAN:
        out = _euclidean(spec, z)
    else:
        out = density_from_jet(evaluate_jet(spec, z), norm)
    return out[()] if np.ndim(out) == 0 else out


# -- sup norm ------------------------------------------------------------------------

def sup_norm_df(spec: S.CurveSpec, domain: Domain | None = None, resolution: int = 64,
                norm: Normalization = Normalization.FUBINI_STUDY) -> SupEstimate:
    """Grid estimate of ``sup |df|`` over ``domain`` (default: one period parallelogram).

    Two rounds of 8x refinement around the best grid point; the value is a
    lower bound on the true supremum.
    """
    if domain is None:
        lat = S.lattice_of(spec)
        if lat is None:
            raise InvalidCurve("non-periodic curve needs an explicit scan domain")
        domain = Domain.period(lat)
    est = grid_max(lambda z: density(spec, z, norm), domain, resolution)
    return SupEstimate(math.sqrt(max(est.value, 0.0)), est.location, est.spacing)


# -- period energy ---------------------------------------------------------------------

@dataclass(frozen=True)
class EllipticEnergyReport:
    """Energy over one period, the period area, the sup of ``|df|`` and their ratio.

    ``gap_ratio = sup_df^2 * vol / energy``; it is ``nan`` for constant curves.
    """

    energy: float
    vol: float
    sup_df: float
    gap_ratio: float
    sup_spacing: float = 0.0


def _projective_distance(F, G):
    # |G_perp| / |G|, free of the cancellation in sqrt(1 - cos^2)
    F = F / np.linalg.norm(F, axis=-1, keepdims=True)
    G = G / np.linalg.norm(G, axis=-1, keepdims=True)
    perp = G - np.sum(F.conj() * G, axis=-1, keepdims=True) * F
    return np.linalg.norm(perp, axis=-1)


def periodicity_defect(spec: S.CurveSpec, lattice: S.Lattice, base: complex = 0.0,
                       samples: int = 16, norm: Normalization = Normalization.FUBINI_STUDY) -> float:
    """Largest defect of ``f(z + omega) = f(z)`` over boundary samples of the period cell.

    Projective targets compare points of ``CP^n`` by the Fubini-Study sine
    distance, which ignores the quasi-periodic factor of the lift. Flat
    targets compare densities.
    """
    s = (np.arange(samples) + 0.37) / samples
    w1, w2 = lattice.omega1, lattice.omega2
    z = np.concatenate([base + s * w1, base + s * w2])
    worst = 0.0
    for w in (w1, w2):
        if norm is Normalization.EUCLIDEAN:
            d = np.abs(density(spec, z + w, norm) - density(spec, z, norm))
        else:
            d = _projective_distance(evaluate_jet(spec, z).lift, evaluate_jet(spec, z + w).lift)
        worst = max(worst, float(np.max(d)))
    return worst


def default_quad_order(spec: S.CurveSpec) -> int:
    inner = spec
    while isinstance(inner, (S.Scaled, S.Included)):
        inner = inner.inner
    if isinstance(inner, S.ThetaEmbedding):
        return max(128, 48 * inner.l)
    return 128


def energy_over_fundamental_domain(spec: S.CurveSpec, lattice: S.Lattice | None = None,
                                   base: complex = 0.0, quad_order: int | None = None,
                                   norm: Normalization = Normalization.FUBINI_STUDY,
                                   resolution: int = 64) -> EllipticEnergyReport:
    """Energy ``int |df|^2`` over the period parallelogram based at ``base``.

    ``lattice`` defaults to the lattice of the spec; pass one explicitly for a
    flat self-map such as the identity lift of a torus.
    """
    lat = lattice if lattice is not None else S.lattice_of(spec)
    if lat is None:
        raise InvalidCurve("energy over a period needs an elliptic source or an explicit lattice")
    defect = periodicity_defect(spec, lat, base, norm=norm)
    if defect > PERIODICITY_TOL:
        raise NotPeriodic(f"periodicity defect {defect:.3e} exceeds {PERIODICITY_TOL:g}")
    n = quad_order or default_quad_order(spec)
    energy = parallelogram_integral(lambda z: density(spec, z, norm), complex(base), lat.omega1, lat.omega2, n)
    sup = sup_norm_df(spec, Domain.period(lat, base), resolution, norm)
    ratio = sup.value**2 * lat.vol / energy if energy > 1e-12 else math.nan
    return EllipticEnergyReport(energy, lat.vol, sup.value, ratio, sup.spacing)
