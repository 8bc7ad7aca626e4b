"""Taylor-coefficient estimates near a point of maximal spherical derivative.

Two halves:

* ``constant_chain`` re-derives every purely arithmetic inequality behind the
  bound ``1 - (pi/16) 1e-30 < 1 - 1e-100`` in exact rationals. ``pi`` enters
  only through the enclosure ``[223/71, 22/7]`` and each comparison uses the
  adverse endpoint; square roots use rational enclosures.
* The numeric tools (Cauchy coefficients, admissibility, pointwise lemma checks,
  sector and square averages) test the same estimates on concrete functions at
  relaxed parameters (``r0`` up to 0.3, ``epsilon`` up to 1e-2), since the
  original parameters sit far below binary64 resolution.

All densities in this module use the rescaled sphere metric
``|df| = |f'| / (1 + |f|^2)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from decimal import Decimal, localcontext
from fractions import Fraction
from math import isqrt

import numpy as np

from .errors import InvalidChainParams, NotVanishingAtOrigin, StepFailed
from .functions import AnalyticFunction
from .quadrature import gauss_legendre, sector_integral

PI_LO = Fraction(223, 71)
PI_HI = Fraction(22, 7)


def to_fraction(value) -> Fraction:
    """Exact rational from a Fraction, int, or decimal string such as ``"1e-100"``."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidChainParams(f"not an exact rational: {value!r}") from exc
    if isinstance(value, float):
        # floats are taken at their shortest decimal repr, not their binary value
        return Fraction(repr(value))
    raise InvalidChainParams(f"not an exact rational: {value!r}")


def fraction_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def decimal_str(q: Fraction, digits: int = 40) -> str:
    """``q`` rounded to ``digits`` significant decimal digits."""
    with localcontext() as ctx:
        ctx.prec = digits
        return str(Decimal(q.numerator) / Decimal(q.denominator))


def sqrt_enclosure(q: Fraction) -> tuple[Fraction, Fraction]:
    """Rationals ``lo <= sqrt(q) <= hi``, equal when ``q`` is a rational square."""
    if q < 0:
        raise ValueError("negative argument")
    p, d = q.numerator, q.denominator
    s = isqrt(p * d)
    if s * s == p * d:
        return Fraction(s, d), Fraction(s, d)
    # refine so that hi - lo <= sqrt(q) * 2^-200
    shift = 4 ** 200
    s = isqrt(p * d * shift)
    scale = d * 2**200
    return Fraction(s, scale), Fraction(s + 1, scale)


@dataclass(frozen=True)
class ChainParams:
    """``epsilon``, ``r0`` and ``delta`` as exact rationals in ``(0, 1)``."""

    epsilon: Fraction = Fraction(1, 10**100)
    r0: Fraction = Fraction(1, 10**10)
    delta: Fraction = Fraction(1, 10**5)

    def __post_init__(self):
        for name in ("epsilon", "r0", "delta"):
            q = to_fraction(getattr(self, name))
            if not 0 < q < 1:
                raise InvalidChainParams(f"ChainParams.{name} must satisfy 0 < {name} < 1, got {q}")
            object.__setattr__(self, name, q)


@dataclass(frozen=True)
class ChainConstants:
    """Constants of the argument that are not chain parameters.

    ``error_cap`` bounds ``E(r)``, ``sector_gap`` is the margin certified on a
    sector and ``vol_ratio`` multiplies ``pi`` in ``vol(D)/vol(K)``.
    """

    error_cap: Fraction = Fraction(1, 10**20)
    sector_gap: Fraction = Fraction(1, 10**30)
    vol_ratio: Fraction = Fraction(1, 16)


@dataclass(frozen=True)
class StepRecord:
    name: str
    lhs: object
    rhs: object
    holds: bool
    strict: bool = False
    note: str = ""

    @property
    def margin(self):
        return self.rhs - self.lhs

    def to_dict(self) -> dict:
        conv = (lambda q: fraction_str(q)) if isinstance(self.lhs, Fraction) else float
        out = {"name": self.name, "lhs": conv(self.lhs), "rhs": conv(self.rhs), "holds": self.holds,
               "margin": conv(self.margin), "strict": self.strict}
        if isinstance(self.margin, Fraction):
            out["margin_decimal"] = decimal_str(self.margin)
        if self.note:
            out["note"] = self.note
        return out


@dataclass(frozen=True)
class ChainReport:
    """Per-step records; ``final_bound`` is set only when every step holds."""

    records: tuple
    final_bound: Fraction | None = None
    square_bound: Fraction | None = None

    @property
    def all_hold(self) -> bool:
        return all(r.holds for r in self.records)

    def step(self, name: str) -> StepRecord:
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"steps": [r.to_dict() for r in self.records],
                "all_hold": self.all_hold,
                "final_bound": None if self.final_bound is None else fraction_str(self.final_bound),
                "square_bound": None if self.square_bound is None else fraction_str(self.square_bound)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# -- exact chain -----------------------------------------------------------------

def _chain_steps(p: ChainParams, k: ChainConstants):
    """Yield ``(name, lhs, rhs, strict)`` in the order the argument uses them.

    Every inequality is monotone in ``r`` on ``[0, r0]`` in the direction that
    makes ``r = r0`` the worst case, so it is checked there.
    """
    eps, r, delta = p.epsilon, p.r0, p.delta
    se_lo, se_hi = sqrt_enclosure(eps)
    E = k.error_cap
    one = Fraction(1)
    # a priori estimate: tan^2 r <= r^2 + 2 r^4 <= 2 r^2
    yield "apriori_quartic", r**2 + 2 * r**4, 2 * r**2, False
    # Cauchy estimate on |z| = pi/4: (4/pi)^n < 2^n
    yield "cauchy_coefficients", 4 / PI_LO, Fraction(2), True
    # denominator
    yield "tail_geometric", 4 / (1 - 2 * r), Fraction(5), False
    yield "modulus_lower_bound", 5 * r, 1 - eps, False
    yield "denominator_quartic", 3 * 2**2 + 2**4 * r**2, Fraction(13), False
    yield "denominator_final", (20 + 13 * r) * r**3 + 4 * eps * r**2, 30 * r**3 + eps, False
    # |a_2|
    yield "a2_probe_radius", se_hi, r, False
    yield "a2_series", 2 + Fraction(24) / (1 - 2 * r) ** 2, Fraction(27), False
    yield "a2_bound", (eps + 27 * eps) * se_hi / eps, 30 * se_lo, False
    # error term
    yield "error_series", Fraction(64) / (1 - 2 * r) ** 2, Fraction(65), False
    yield "error_small", 65 * r**3, E, False
    # |a_3|
    yield "a3_cubic", 2 * r + 65, Fraction(100), False
    yield "a3_constant", eps + 30 * se_hi * r, delta * se_lo, False
    # numerator
    yield "numerator_factor", 2 + 6 * 2**3 * r**2, Fraction(3), False
    yield "numerator_cross", 900 * se_hi * r**2 + 90 * r + 60 * r * E, delta, False
    yield "numerator_error_square", E**2 + 3 * E, 4 * E, False
    yield "numerator_quartic", 576 * r**4, r**3, False
    yield "numerator_final", 201 * r**3 + 4 * 65 * r**3 + 3 * delta * se_hi, 500 * r**3 + se_lo / 2, False
    # product of numerator and denominator bounds, both extremes of cos+
    prod = max(30 * r**3 - 4 * r**4 * c + 60 * r**5 * c + eps + 2 * eps * r**2 * c for c in (0, 1))
    yield "norm_product", prod, 31 * r**3 + 2 * eps, False
    yield "norm_final", 531 * r**3 + (2 * se_hi + Fraction(1, 2)) * se_hi, 600 * r**3 + se_lo, False
    # sector average
    yield "sector_cubic", 600 * Fraction(2, 5), Fraction(240), False
    yield "sector_angular", Fraction(1, 3), 1 - 2 / PI_LO, False
    yield "sector_final", 1 + se_hi - r**2 / 3 + 240 * r**3, 1 - r**2 / 4 + se_hi, False
    yield "sector_gap", 1 - r**2 / 4 + se_hi, 1 - k.sector_gap, True
    # square average
    yield "square_case_small", (1 - eps) ** 2, 1 - eps, True
    yield "square_final", one - PI_LO * k.vol_ratio * k.sector_gap, 1 - eps, True


def constant_chain(params: ChainParams = ChainParams(), constants: ChainConstants = ChainConstants(),
                   stop_on_failure: bool = True) -> ChainReport:
    """Check the chain in exact arithmetic.

    Raises ``StepFailed`` naming the first failing step (its ``report`` holds
    the records up to it) unless ``stop_on_failure`` is false.
    """
    records = []
    for name, lhs, rhs, strict in _chain_steps(params, constants):
        holds = lhs < rhs if strict else lhs <= rhs
        records.append(StepRecord(name, lhs, rhs, bool(holds), strict))
        if not holds and stop_on_failure:
            raise StepFailed(name, ChainReport(tuple(records)))
    report = ChainReport(tuple(records))
    if report.all_hold:
        square = 1 - PI_LO * constants.vol_ratio * constants.sector_gap
        return replace(report, final_bound=1 - params.epsilon, square_bound=square)
    return report


FINAL_CONSTANTS = ("sector_gap", "vol_ratio", "epsilon")


def final_break_even(name: str, params: ChainParams = ChainParams(),
                     constants: ChainConstants = ChainConstants()) -> Fraction:
    """Value of one constant at which ``square_final`` becomes an equality."""
    if name == "sector_gap":
        return params.epsilon / (PI_LO * constants.vol_ratio)
    if name == "vol_ratio":
        return params.epsilon / (PI_LO * constants.sector_gap)
    if name == "epsilon":
        return PI_LO * constants.vol_ratio * constants.sector_gap
    raise KeyError(name)


def mutate_final(name: str, rel: Fraction, params: ChainParams = ChainParams(),
                 constants: ChainConstants = ChainConstants()):
    """Move one final-comparison constant to ``break_even * (1 - rel)`` (``epsilon``: ``* (1 + rel)``).

    A positive ``rel`` is the adverse direction, a negative one the safe side.
    Returns the mutated ``(params, constants)``.
    """
    be = final_break_even(name, params, constants)
    if name == "epsilon":
        return replace(params, epsilon=be * (1 + rel)), constants
    return params, replace(constants, **{name: be * (1 - rel)})


# -- Taylor data ---------------------------------------------------------------------

ZERO_COEFF = 1e-13


@dataclass(frozen=True)
class TaylorData:
    """Coefficients ``a_1..a_N`` and their arguments in ``[0, 2 pi)`` (0 for vanishing ones)."""

    coeffs: np.ndarray
    args: np.ndarray
    radius: float

    def a(self, n: int) -> complex:
        return complex(self.coeffs[n - 1]) if 1 <= n <= len(self.coeffs) else 0j

    def theta(self, n: int) -> float:
        return float(self.args[n - 1]) if 1 <= n <= len(self.args) else 0.0

    @property
    def epsilon_eff(self) -> float:
        return max(0.0, 1.0 - abs(self.a(1)))


def taylor_from_cauchy(fn: AnalyticFunction, N: int = 12, radius: float = 0.5, nodes: int = 256) -> TaylorData:
    """``a_n = (1/2 pi i) int_{|z|=radius} f(z) z^{-n-1} dz`` by the trapezoidal rule."""
    if nodes <= 2 * N:
        raise ValueError("nodes must exceed 2N")
    f0 = complex(fn(np.array(0j)))
    if abs(f0) > 1e-12:
        raise NotVanishingAtOrigin(f"f(0) = {f0:.3e} != 0")
    th = 2 * math.pi * np.arange(nodes) / nodes
    vals = fn(radius * np.exp(1j * th))
    fft = np.fft.fft(vals) / nodes
    n = np.arange(1, N + 1)
    coeffs = fft[n] / radius**n
    mags = np.abs(coeffs)
    args = np.where(mags > ZERO_COEFF, np.mod(np.angle(coeffs), 2 * math.pi), 0.0)
    return TaylorData(coeffs, args, radius)


# -- admissibility -------------------------------------------------------------------

def polar_grid(radius: float, n_r: int = 24, n_theta: int = 64) -> np.ndarray:
    r = radius * np.arange(1, n_r + 1) / n_r
    th = 2 * math.pi * np.arange(n_theta) / n_theta
    return np.concatenate([[0j], (r[:, None] * np.exp(1j * th)[None, :]).ravel()])


@dataclass(frozen=True)
class Admissibility:
    ok: bool
    point: complex | None = None
    value: float | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def admissibility_scan(fn: AnalyticFunction, epsilon, grid=None, tol: float = 1e-12) -> Admissibility:
    """``f(0) = 0``, ``1 - epsilon <= |df|(0) <= 1`` and ``|df| <= 1`` on ``grid``."""
    eps = float(to_fraction(epsilon)) if not isinstance(epsilon, float) else epsilon
    f0 = complex(fn(np.array(0j)))
    if abs(f0) > tol:
        return Admissibility(False, 0j, abs(f0), "f(0) != 0")
    d0 = float(fn.spherical(np.array(0j)))
    if d0 > 1 + tol:
        return Admissibility(False, 0j, d0, "|df|(0) > 1")
    if d0 < 1 - eps - tol:
        return Admissibility(False, 0j, d0, "|df|(0) < 1 - epsilon")
    grid = polar_grid(1.0) if grid is None else np.asarray(grid, dtype=complex).ravel()
    vals = np.asarray(fn.spherical(grid), dtype=float)
    bad = np.nonzero(vals > 1 + tol)[0]
    if bad.size:
        i = int(bad[0])
        return Admissibility(False, complex(grid[i]), float(vals[i]), "|df| > 1")
    return Admissibility(True)


# -- pointwise lemma checks ----------------------------------------------------------

def _pointwise(name: str, lhs, rhs, tol: float, note: str = "") -> StepRecord:
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    gap = rhs - lhs
    i = int(np.argmin(gap))
    return StepRecord(name, float(lhs.ravel()[i]), float(rhs.ravel()[i]), bool(gap.ravel()[i] >= -tol), False, note)


def lemma_suite(fn: AnalyticFunction, r0: float = 0.1, delta: float = 0.1, n_r: int = 16, n_theta: int = 64,
                N: int = 16, tol: float = 1e-12) -> ChainReport:
    """Check each pointwise estimate on a polar grid of ``r <= r0`` with ``epsilon = 1 - |a_1|``.

    Bounds whose distinguishing terms fall below binary64 resolution relative
    to 1 are flagged in the record note.
    """
    if not 0 < r0 <= 0.3:
        raise InvalidChainParams("numeric lemma checks need 0 < r0 <= 0.3")
    td = taylor_from_cauchy(fn, N, radius=min(0.5, 2 * r0 + 0.2))
    eps = td.epsilon_eff
    se = math.sqrt(eps)
    a = np.abs(td.coeffs)
    r = r0 * np.arange(1, n_r + 1) / n_r
    th = 2 * math.pi * np.arange(n_theta) / n_theta
    R, TH = np.meshgrid(r, th, indexing="ij")
    z = R * np.exp(1j * TH)
    fz = fn(z)
    dfz = fn.derivative(z)
    af2 = np.abs(fz) ** 2
    n = np.arange(1, N + 1)
    E = np.sum((n[3:] * a[3:])[:, None] * r[None, :] ** (n[3:, None] - 1), axis=0)[:, None]
    phi = 2 * TH - td.theta(1) + td.theta(3)
    cplus = np.maximum(0.0, np.cos(phi))
    unresolved = "below binary64 resolution" if (r0**3 < 1e-16 or 0 < eps < 1e-32) else ""
    recs = [
        _pointwise("apriori_tan", np.abs(fz), np.tan(R), tol),
        _pointwise("coefficient_bound", a, (4 / math.pi) ** n, tol),
        _pointwise("denominator", 1 / (1 + af2) ** 2, 1 - 2 * R**2 + 30 * R**3 + eps, tol, unresolved),
        _pointwise("a2_bound", 2 * a[1], 30 * se, tol),
        _pointwise("error_term", E, 65 * R**3, tol),
        _pointwise("a3_bound", 3 * a[2] * R**2, R**2 + 100 * R**3 + delta * se, tol),
        _pointwise("numerator", np.abs(dfz) ** 2, 1 + 2 * R**2 * cplus + 500 * R**3 + se / 2, tol, unresolved),
        _pointwise("norm", fn.spherical(z) ** 2, 1 - 2 * R**2 * (1 - cplus) + 600 * R**3 + se, tol, unresolved),
    ]
    return ChainReport(tuple(recs))


# -- sector and square averages ------------------------------------------------------

@dataclass(frozen=True)
class AverageReport:
    average: float
    bound: float
    holds: bool
    epsilon_eff: float
    extra: dict = field(default_factory=dict)


def _rescaled_density(fn: AnalyticFunction):
    return lambda z: np.asarray(fn.spherical(z), dtype=float) ** 2


def sector_average(fn: AnalyticFunction, r0: float, alpha: float = 0.0, epsilon: float | None = None,
                   order: int = 64) -> AverageReport:
    """Average of ``|df|^2`` over the quarter disk of radius ``r0`` starting at angle ``alpha``.

    Compared with ``1 - r0^2/4 + sqrt(epsilon)``; ``epsilon`` defaults to ``1 - |a_1|``.
    """
    if epsilon is None:
        epsilon = taylor_from_cauchy(fn, 4, radius=min(0.5, 2 * r0)).epsilon_eff
    integral = sector_integral(_rescaled_density(fn), r0, alpha, math.pi / 2, order, order)
    avg = integral / (math.pi * r0 * r0 / 4)
    bound = 1 - r0 * r0 / 4 + math.sqrt(epsilon)
    return AverageReport(avg, bound, avg <= bound, epsilon)


def square_average(fn: AnalyticFunction, r0: float, anchor: complex = 0j, epsilon: float | None = None,
                   order: int = 64) -> AverageReport:
    """Average of ``|df|^2`` over the square of side ``2 r0`` centered at ``anchor``.

    Compared with ``1 - epsilon`` and with the sector composition bound
    ``1 - (pi/16)(r0^2/4 - sqrt(epsilon))`` (in ``extra``).
    """
    if epsilon is None:
        epsilon = taylor_from_cauchy(fn, 4, radius=min(0.5, 2 * r0)).epsilon_eff
    x, w = gauss_legendre(order, -r0, r0)
    z = anchor + x[:, None] + 1j * x[None, :]
    vals = _rescaled_density(fn)(z)
    avg = math.fsum((vals * w[:, None] * w[None, :]).ravel()) / (4 * r0 * r0)
    bound = 1 - epsilon
    composed = 1 - (math.pi / 16) * (r0 * r0 / 4 - math.sqrt(epsilon))
    return AverageReport(avg, bound, avg <= bound, epsilon,
                         {"sector_composition_bound": composed, "holds_composition": avg <= composed})


def vol_ratio_over_pi(r0) -> Fraction:
    """``vol(D) / (pi vol(K))`` with ``vol(D) = pi r0^2/4`` and ``vol(K) = 4 r0^2``, exactly."""
    r0 = to_fraction(r0)
    return (r0**2 / 4) / (4 * r0**2)
