"""Weierstrass elliptic function by row summation.

For the normalized lattice ``Z + Z*tau`` the lattice sum collapses row by row:

    wp(u) = sum_k pi^2 csc^2(pi (u + k tau)) - G2(tau),
    G2(tau) = pi^2/3 - 8 pi^2 sum_n q^n / (1 - q^n)^2,   q = exp(2 pi i tau).

Each row term is ``(2 pi i)^2 w / (1 - w)^2`` with ``w = exp(2 pi i u_k)``
chosen with ``|w| < 1``, so the rows decay like ``|q|^|k|`` and the tail is
certified by a geometric bound. A general lattice is handled through
``wp(z; w1, w2) = w1^-2 wp(z/w1; tau)``.

``direct_sum`` keeps the textbook truncated lattice sum with its own tail
bound; it converges only algebraically and serves as an oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import zeta

from .errors import PoleAtLatticePoint, TruncationTooLoose
from .specs import Lattice

MAX_ROWS = 400
_SMALL_U = 0.1
_N_TAYLOR = 14
# (2k-1) * 2 zeta(2k), k = 1.., the Taylor coefficients of pi^2 csc^2(pi u) - 1/u^2
_REG = np.array([(2 * k - 1) * 2.0 * zeta(2 * k) for k in range(1, _N_TAYLOR + 1)])


@lru_cache(maxsize=256)
def _g2(tau: complex, tol: float) -> complex:
    q = complex(np.exp(2j * math.pi * tau))
    aq = abs(q)
    total = []
    n = 1
    while True:
        qn = q**n
        total.append(qn / (1 - qn) ** 2)
        # remaining terms sum_{m>n} m |q|^m / (1-|q|)^2
        rest = aq ** (n + 1) * (n + 1) / ((1 - aq) ** 3)
        if 8 * math.pi**2 * rest < tol:
            break
        n += 1
        if n > 100_000:
            raise TruncationTooLoose("G2 series failed to converge")
    s = complex(math.fsum(c.real for c in total), math.fsum(c.imag for c in total))
    return math.pi**2 / 3 - 8 * math.pi**2 * s


@lru_cache(maxsize=256)
def row_count(t: float, tol: float) -> int:
    """Rows ``|k| <= N`` so that the discarded rows of both derivatives sum below ``tol``.

    After reduction ``|Im u| <= t/2``, so row ``k`` has ``|w| <= r^(|k|-1/2)`` with
    ``r = exp(-2 pi t)``. The row terms are bounded by ``4 pi^2 |w|/(1-|w|)^2`` and
    ``8 pi^3 |w| (1+|w|)/(1-|w|)^3``.
    """
    r = math.exp(-2 * math.pi * t)
    s = math.sqrt(r)
    c = 8 * math.pi**3 * (1 + s) / (1 - s) ** 3
    for N in range(1, MAX_ROWS + 1):
        # two sides, geometric tail from k = N+1
        tail = 2 * c * r ** (N + 0.5) / (1 - r)
        if tail < tol:
            return N
    raise TruncationTooLoose(f"row sum needs more than {MAX_ROWS} rows for t={t:.3g}, tol={tol:.3g}")


def _reduce(u, tau: complex):
    """Translate ``u`` into the centered cell ``{x + y tau : |x|, |y| <= 1/2}``."""
    y = np.round(u.imag / tau.imag)
    u = u - y * tau
    x = np.round(u.real)
    return u - x


def _regular_small(u):
    """``pi^2 csc^2(pi u) - 1/u^2`` and its derivative, for ``|u| < 0.1``."""
    u2 = u * u
    val = np.zeros_like(u)
    der = np.zeros_like(u)
    for k in range(_N_TAYLOR, 0, -1):
        val = val * u2 + _REG[k - 1]
    for k in range(_N_TAYLOR, 1, -1):
        der = der * u2 + (2 * k - 2) * _REG[k - 1]
    return val, der * u


def _row_terms(u, derivative: bool):
    w = np.exp(2j * math.pi * np.where(u.imag >= 0, u, -u))
    c2 = (2j * math.pi) ** 2
    val = c2 * w / (1 - w) ** 2
    if not derivative:
        return val, None
    der = (2j * math.pi) ** 3 * w * (1 + w) / (1 - w) ** 3
    # csc^2 is even, its derivative odd
    der = np.where(u.imag >= 0, der, -der)
    return val, der


@dataclass(frozen=True)
class WPValue:
    """Reduced evaluation: ``wp = 1/u^2 + reg`` near the pole, plain value elsewhere."""

    u: np.ndarray
    reg: np.ndarray
    reg_prime: np.ndarray
    near: np.ndarray


def _normalized(u, tau: complex, tol: float) -> WPValue:
    u = _reduce(np.asarray(u, dtype=complex), tau)
    N = row_count(tau.imag, tol)
    near = np.abs(u) < _SMALL_U
    safe = np.where(near, 0.5, u)
    v0, d0 = _row_terms(safe, True)
    rs, rd = _regular_small(np.where(near, u, 0.0))
    reg = np.where(near, rs, v0)
    regp = np.where(near, rd, d0)
    for k in range(1, N + 1):
        for sgn in (1, -1):
            v, d = _row_terms(u + sgn * k * tau, True)
            reg = reg + v
            regp = regp + d
    reg = reg - _g2(tau, tol)
    return WPValue(u, reg, regp, near)


def _scale(lattice: Lattice, z):
    w1 = lattice.omega1
    return np.asarray(z, dtype=complex) / w1, w1


def wp(z, lattice: Lattice, tol: float = 1e-13):
    """``wp(z)`` on ``lattice``; raises ``PoleAtLatticePoint`` on lattice points."""
    u, w1 = _scale(lattice, z)
    r = _normalized(u, lattice.tau, tol)
    if np.any(r.u == 0):
        raise PoleAtLatticePoint("wp has a pole at a lattice point")
    val = np.where(r.near, 1.0 / np.where(r.near, r.u, 1.0) ** 2 + r.reg, r.reg) / w1**2
    return val[()] if val.ndim == 0 else val


def wp_prime(z, lattice: Lattice, tol: float = 1e-13):
    u, w1 = _scale(lattice, z)
    r = _normalized(u, lattice.tau, tol)
    if np.any(r.u == 0):
        raise PoleAtLatticePoint("wp' has a pole at a lattice point")
    val = np.where(r.near, -2.0 / np.where(r.near, r.u, 1.0) ** 3 + r.reg_prime, r.reg_prime) / w1**3
    return val[()] if val.ndim == 0 else val


def wp_jet(z, lattice: Lattice, tol: float = 1e-13, chart: str = "auto"):
    """Homogeneous lift of ``[1 : wp]`` and its derivative, shape ``(..., 2)``.

    ``chart="direct"`` returns ``(1, wp), (0, wp')``; ``"inverted"`` returns
    ``(v, 1), (v', 0)`` with ``v = 1/wp``; ``"auto"`` inverts where ``|wp| > 1``.
    The inverted chart is computed from the regular part so it stays exact at
    lattice points.
    """
    if chart not in ("auto", "direct", "inverted"):
        raise ValueError(f"unknown chart {chart!r}")
    u, w1 = _scale(lattice, z)
    r = _normalized(u, lattice.tau, tol)
    uu = r.u
    if chart == "direct" and np.any(uu == 0):
        raise PoleAtLatticePoint("direct chart of [1 : wp] at a lattice point; request the inverted chart")
    # normalized direct values away from the pole
    safe_u = np.where(uu == 0, 1.0, uu)
    p = np.where(r.near, 1.0 / safe_u**2 + r.reg, r.reg)
    pp = np.where(r.near, -2.0 / safe_u**3 + r.reg_prime, r.reg_prime)
    # inverted chart: near the pole v = u^2/(1 + u^2 reg); elsewhere 1/p
    u2 = uu * uu
    den = 1.0 + u2 * r.reg
    with np.errstate(all="ignore"):
        v_near = u2 / den
        vp_near = (2 * uu - u2 * u2 * r.reg_prime) / den**2
        v_far = 1.0 / p
        vp_far = -pp / p**2
    v = np.where(r.near, v_near, v_far)
    vp = np.where(r.near, vp_near, vp_far)
    # undo the normalization: wp = p/w1^2, wp' = pp/w1^3, 1/wp = w1^2 v, (1/wp)' = w1 vp
    P, PP = p / w1**2, pp / w1**3
    V, VP = v * w1**2, vp * w1
    if chart == "direct":
        use_inv = np.zeros(uu.shape, dtype=bool)
    elif chart == "inverted":
        use_inv = np.ones(uu.shape, dtype=bool)
    else:
        use_inv = (uu == 0) | (np.abs(P) > 1)
    one = np.ones(uu.shape, dtype=complex)
    zero = np.zeros(uu.shape, dtype=complex)
    lift = np.stack([np.where(use_inv, V, one), np.where(use_inv, one, P)], axis=-1)
    der = np.stack([np.where(use_inv, VP, zero), np.where(use_inv, zero, PP)], axis=-1)
    return lift, der


def direct_sum(z: complex, lattice: Lattice, M: float) -> tuple[complex, complex, float]:
    """Truncated lattice sums of ``wp`` and ``wp'`` over ``|omega| <= M`` with a tail bound.

    The bound applies to ``wp`` and needs ``M >= 2|z| + d``, ``d`` the lattice
    diameter; pairing ``omega`` with ``-omega`` makes the tail ``O(|z|^2/M^2)``.
    """
    z = complex(z)
    w1, w2 = lattice.omega1, lattice.omega2
    d = lattice.diameter
    K = int(math.ceil(M / min(abs(w1), abs(w2)) * 2)) + 2
    m = np.arange(-K, K + 1)
    W = (m[:, None] * w1 + m[None, :] * w2).ravel()
    W = W[(np.abs(W) <= M) & (W != 0)]
    if np.any(np.abs(z - W) == 0) or z == 0:
        raise PoleAtLatticePoint("direct sum evaluated at a lattice point")
    terms = 1.0 / (z - W) ** 2 - 1.0 / W**2
    val = 1.0 / z**2 + complex(math.fsum(terms.real), math.fsum(terms.imag))
    dterms = -2.0 / (z - W) ** 3
    der = -2.0 / z**3 + complex(math.fsum(dterms.real), math.fsum(dterms.imag))
    if M < 2 * abs(z) + d:
        bound = math.inf
    else:
        bound = (44.0 / 9.0) * abs(z) ** 2 * (1 + d / M) ** 4 * math.pi / (lattice.vol * (M - d) ** 2)
    return val, der, bound
