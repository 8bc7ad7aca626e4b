"""Proximity and characteristic functions, exponential growth bounds and hyperplane complements."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from . import specs as S
from .curves import evaluate_jet
from .density import DensityProfile, RadiusSchedule
from .errors import DegreeZero, NodeLimit, SingularMatrix, ZeroLeadingCoefficient, ZeroOnCircle
from .functions import AnalyticFunction, exp_poly
from .geometry import CurveJet, fs_density
from .quadrature import QuadConfig, gauss_legendre, polar_disk_estimate, polar_disk_integral

MAX_NODES = 2**22


def circle_mean(g, r: float, tol: float = 1e-10, start: int = 256, max_nodes: int = MAX_NODES) -> tuple[float, float]:
    """``(1/2 pi) int_0^{2 pi} g(r e^{i theta}) d theta`` by trapezoidal node doubling.

    Returns ``(value, error)`` where ``error`` is the last change under doubling.
    Raises ``NodeLimit`` if the change is still above ``tol`` at ``max_nodes``.
    """
    n = start
    th = 2 * math.pi * np.arange(n) / n
    total = math.fsum(np.asarray(g(r * np.exp(1j * th)), dtype=float))
    prev = total / n
    while n < max_nodes:
        # the doubled rule reuses the old nodes and adds the midpoints
        mid = 2 * math.pi * (np.arange(n) + 0.5) / n
        total += math.fsum(np.asarray(g(r * np.exp(1j * mid)), dtype=float))
        n *= 2
        value = total / n
        err = abs(value - prev)
        if err < tol * max(1.0, abs(value)):
            return value, err
        prev = value
    raise NodeLimit(f"circle mean not converged at {max_nodes} nodes (last change {err:.3e})")


def proximity_m(fn: AnalyticFunction, r: float, tol: float = 1e-10) -> tuple[float, float]:
    """``m(r, f) = (1/2 pi) int log+ |f(r e^{i theta})| d theta`` and its error estimate."""
    if r < 1:
        raise ValueError("m(r, f) is defined for r >= 1")
    return circle_mean(lambda z: np.maximum(fn.log_modulus(z), 0.0), r, tol)


def _jensen_mean(fn: AnalyticFunction, r: float, tol: float) -> float:
    return circle_mean(lambda z: fn.log1p_abs2(z), r, tol)[0]


def disk_energy(fn: AnalyticFunction, t: float, config: QuadConfig = QuadConfig()) -> float:
    """``int_{|z| <= t} f^* omega_FS``."""
    return polar_disk_integral(lambda z: fn.fs_density(z), t, config)


def characteristic_T(fn: AnalyticFunction, r: float, route: str = "energy", order: int = 24,
                     config: QuadConfig = QuadConfig(), tol: float = 1e-10) -> float:
    """Shimizu-Ahlfors ``T(r, f) = int_1^r (dt/t) int_{|z|<=t} f^* omega_FS``.

    ``route="energy"`` integrates disk energies at Gauss nodes in ``log t``
    (panels of unit length). ``route="jensen"`` uses the boundary form
    ``(1/4 pi) int log(1 + |f|^2) d theta`` at ``r`` minus the same at 1.
    """
    if r < 1:
        raise ValueError("T(r, f) is defined for r >= 1")
    if r == 1:
        return 0.0
    if route == "jensen":
        return 0.5 * (_jensen_mean(fn, r, tol) - _jensen_mean(fn, 1.0, tol))
    if route != "energy":
        raise ValueError(f"unknown route {route!r}")
    L = math.log(r)
    panels = max(1, int(math.ceil(L)))
    edges = np.linspace(0.0, L, panels + 1)
    parts = []
    for a, b in zip(edges[:-1], edges[1:]):
        s, w = gauss_legendre(order, a, b)
        parts.extend(wi * disk_energy(fn, math.exp(si), config) for si, wi in zip(s, w))
    return math.fsum(parts)


@dataclass(frozen=True)
class GrowthProfile:
    """Rows ``(r, m, T, T - m)``."""

    rows: tuple

    @property
    def max_abs_defect(self) -> float:
        return max(abs(row[3]) for row in self.rows)

    def to_csv(self) -> str:
        lines = ["r,m,T,defect"]
        lines += [f"{r!r},{m!r},{T!r},{d!r}" for r, m, T, d in self.rows]
        return "\n".join(lines) + "\n"


def growth_profile(fn: AnalyticFunction, radii, route: str = "energy", config: QuadConfig = QuadConfig(),
                   order: int = 24) -> GrowthProfile:
    """``m`` and ``T`` on ascending radii; ``T`` is accumulated panel by panel in ``log r``."""
    radii = [float(r) for r in radii]
    if any(r < 1 for r in radii) or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be >= 1 and strictly increasing")
    rows = []
    T_acc = 0.0
    prev = 0.0
    for r in radii:
        L = math.log(r)
        if route == "energy":
            if L > prev:
                n_pan = max(1, int(math.ceil(L - prev)))
                edges = np.linspace(prev, L, n_pan + 1)
                for a, b in zip(edges[:-1], edges[1:]):
                    s, w = gauss_legendre(order, a, b)
                    T_acc = math.fsum([T_acc] + [wi * disk_energy(fn, math.exp(si), config) for si, wi in zip(s, w)])
            prev = L
            T = T_acc
        else:
            T = characteristic_T(fn, r, route)
        m, _ = proximity_m(fn, r)
        rows.append((r, m, T, T - m))
    return GrowthProfile(tuple(rows))


# -- logarithmic derivative ---------------------------------------------------------

@dataclass(frozen=True)
class LogDerivativeRow:
    r: float
    m_log_derivative: float
    T: float
    ratio: float


def log_derivative_check(fn: AnalyticFunction, radii, tol: float = 1e-8) -> tuple:
    """``m(r, f'/f) / (log+ T(r, f) + log r)`` per radius.

    ``T`` is taken from the boundary form, which stays accurate where the
    energy density oscillates too fast for disk quadrature.
    """
    out = []
    for r in radii:
        r = float(r)
        if fn.log_deriv is not None:
            ld = fn.log_deriv
        else:
            def ld(z):
                fv = fn(z)
                if np.any(fv == 0):
                    raise ZeroOnCircle(f"f vanishes on |z| = {r}")
                return fn.derivative(z) / fv
        probe = r * np.exp(2j * math.pi * np.arange(4096) / 4096)
        if np.any(~np.isfinite(fn.log_modulus(probe))):
            raise ZeroOnCircle(f"f vanishes on |z| = {r}")
        with np.errstate(divide="ignore"):
            m, _ = circle_mean(lambda z: np.maximum(np.log(np.abs(ld(z))), 0.0), r, tol)
        T = characteristic_T(fn, r, route="jensen", tol=tol)
        den = max(math.log(T), 0.0) + math.log(r)
        out.append(LogDerivativeRow(r, m, T, m / den if den > 0 else math.inf))
    return tuple(out)


# -- exponential growth ----------------------------------------------------------------

@dataclass(frozen=True)
class ExpPolyGrowth:
    r: float
    m: float
    lower_bound: float
    holds: bool
    C1: float


def exp_poly_growth(coeffs, r: float) -> ExpPolyGrowth:
    """``m(r, e^g)`` against ``a0 r^n/(2 pi n) - (C1/4n) r^(n-1)``.

    ``coeffs`` are ascending; ``a0`` is the modulus of the leading coefficient
    (the circle mean is rotation invariant) and ``C1`` the sum of the moduli of
    the lower coefficients, so that ``|lower part| <= C1 r^(n-1)`` for ``r >= 1``.
    """
    c = [complex(x) for x in coeffs]
    while c and c[-1] == 0:
        c.pop()
    n = len(c) - 1
    if n < 1:
        raise DegreeZero("g must have degree at least 1")
    a0 = abs(c[-1])
    C1 = math.fsum(abs(x) for x in c[:-1])
    m, _ = proximity_m(exp_poly(c), r)
    bound = a0 * r**n / (2 * math.pi * n) - C1 / (4 * n) * r ** (n - 1)
    return ExpPolyGrowth(r, m, bound, m >= bound, C1)


@dataclass(frozen=True)
class ExpLinearEnergy:
    R: float
    energy: float
    error: float
    bound: float
    holds: bool


def exp_linear_energy(a: complex, b: complex, R: float, config: QuadConfig = QuadConfig()) -> ExpLinearEnergy:
    """Disk energy of ``[1 : e^{az+b}]`` against the strip bound ``|a| R / pi``."""
    a, b = complex(a), complex(b)
    bound = abs(a) * R / math.pi
    if a == 0:
        return ExpLinearEnergy(R, 0.0, 0.0, 0.0, True)
    fn = exp_poly([b, a])
    value, err = polar_disk_estimate(lambda z: fn.fs_density(z), R, config)
    return ExpLinearEnergy(R, value, err, bound, value <= bound * (1 + 1e-9) + err)


@dataclass(frozen=True)
class ExceptionalSet:
    """Union of open angular intervals in ``[0, 2 pi]``."""

    intervals: tuple

    @property
    def measure(self) -> float:
        return math.fsum(b - a for a, b in self.intervals)

    def complement(self) -> tuple:
        pts = [0.0]
        for a, b in self.intervals:
            pts += [a, b]
        pts.append(2 * math.pi)
        return tuple((pts[i], pts[i + 1]) for i in range(0, len(pts), 2))


def _tail_moments(alpha: float, beta: float, R: float, kmax: int = 3) -> list[float]:
    """``int_R^inf r^k exp(-alpha r^2 + beta r) dr`` for ``k = 0..kmax``."""
    e = lambda x: math.exp(-alpha * x * x + beta * x)
    T = [math.sqrt(math.pi / (4 * alpha)) * math.exp(beta * beta / (4 * alpha))
         * erfc(math.sqrt(alpha) * (R - beta / (2 * alpha)))]
    # integrate d/dr exp(...) = (-2 alpha r + beta) exp(...) against r^k
    T.append((beta * T[0] + e(R)) / (2 * alpha))
    for k in range(1, kmax):
        T.append((beta * T[k] + k * T[k - 1] + R**k * e(R)) / (2 * alpha))
    return T


@dataclass(frozen=True)
class SectorResult:
    exceptional: ExceptionalSet
    integral: float
    radial_bound: float
    total_bound: float
    truncation_radius: float


def exp_quadratic_sector(a: complex, b: complex, c: complex, delta: float, tail_tol: float = 1e-12,
                         order: int = 64) -> SectorResult:
    """Energy of ``[1 : exp(a z^2 + b z + c)]`` outside four ``delta``-wide angular windows.

    Coordinates are rotated so that ``a > 0``; the windows sit around the odd
    multiples of ``pi/4``. On the complement ``|df|^2`` is bounded by
    ``(1/pi)(2 a r + |b|)^2 exp(2(-a sin(delta) r^2 + |b| r + |c|))``, whose radial
    integral ``radial_bound`` has a closed form. The numeric integral runs to
    the radius where that bound's tail is below ``tail_tol``.
    """
    a, b, c = complex(a), complex(b), complex(c)
    if a == 0:
        raise ZeroLeadingCoefficient("the quadratic coefficient must be nonzero")
    if not 0 < delta < math.pi / 4:
        raise ValueError("delta must lie in (0, pi/4)")
    # z -> e^{i phi} z with 2 phi = -arg(a)
    phi = -0.5 * math.atan2(a.imag, a.real)
    rot = complex(math.cos(phi), math.sin(phi))
    A, B = abs(a), b * rot
    E = ExceptionalSet(tuple(((2 * k + 1) * math.pi / 4 - delta / 2, (2 * k + 1) * math.pi / 4 + delta / 2)
                             for k in range(4)))
    alpha = 2 * A * math.sin(delta)
    beta = 2 * abs(B)
    pref = math.exp(2 * abs(c)) / math.pi

    def bound_tail(R):
        T = _tail_moments(alpha, beta, R)
        return pref * (4 * A * A * T[3] + 4 * A * abs(B) * T[2] + abs(B) ** 2 * T[1])

    radial = bound_tail(0.0)
    R = 1.0
    while bound_tail(R) >= tail_tol:
        R *= 1.25
    fn = exp_poly([c, B, A])
    parts = []
    n_pan = max(4, int(math.ceil(R * max(1.0, A * R) * 4)))
    redges = np.linspace(0.0, R, n_pan + 1)
    for lo, hi in E.complement():
        th, wt = gauss_legendre(order, lo, hi)
        for r0, r1 in zip(redges[:-1], redges[1:]):
            r, wr = gauss_legendre(8, r0, r1)
            z = r[:, None] * np.exp(1j * th)[None, :]
            vals = fn.fs_density(z) * (wr * r)[:, None] * wt[None, :]
            parts.append(math.fsum(vals.ravel()))
    integral = math.fsum(parts)
    return SectorResult(E, integral, radial, (2 * math.pi - E.measure) * radial, R)


# -- hyperplane complements ------------------------------------------------------------

@dataclass(frozen=True)
class HyperplaneArrangement:
    """Hyperplanes ``sum_j A_ij z_j = 0``, ``i = 0..n``."""

    A: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=complex)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 2:
            raise SingularMatrix("A must be a square matrix of size n+1 >= 2")
        n1 = A.shape[0]
        scale = np.linalg.norm(A, 2) ** n1
        if not np.all(np.isfinite(A)) or abs(np.linalg.det(A)) <= 1e-12 * scale:
            raise SingularMatrix("coefficient matrix is singular")
        object.__setattr__(self, "A", A)

    @property
    def n(self) -> int:
        return self.A.shape[0] - 1


def fs_distortion(B: np.ndarray, samples: int = 256, seed: int = 0) -> float:
    """Sup of ``|dB(u)| / |u|`` for the projective map ``[v] -> [B v]`` in the Fubini-Study metric.

    Sampled over seeded random base points plus the right singular vectors of
    ``B``; at the smallest one the sup ``sigma_max/sigma_min`` is attained.
    """
    B = np.asarray(B, dtype=complex)
    n1 = B.shape[0]
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(samples, n1)) + 1j * rng.normal(size=(samples, n1))
    _, _, Vh = np.linalg.svd(B)
    pts = np.concatenate([pts, Vh.conj()])
    best = 0.0
    for v in pts:
        v = v / np.linalg.norm(v)
        # orthonormal basis of the tangent space v-perp
        Q, _ = np.linalg.qr(np.column_stack([v, np.eye(n1, dtype=complex)]))
        T = Q[:, 1:n1]
        w = B @ v
        nw = np.linalg.norm(w)
        img = B @ T
        img = img - np.outer(w, w.conj() @ img) / nw**2
        best = max(best, float(np.linalg.svd(img / nw, compute_uv=False)[0]))
    return best


@dataclass(frozen=True)
class HyperplaneReport:
    profile: DensityProfile
    distortion: float
    bound_coefficient: float
    bounds: tuple
    holds: bool


def hyperplane_density(arr: HyperplaneArrangement, terms, schedule: RadiusSchedule | None = None,
                       config: QuadConfig | None = None) -> HyperplaneReport:
    """Density profile of ``g = A^{-1} [1 : e^{a_1 z + b_1} : ...]``.

    Each average is checked against ``C^2 (sum |a_i| + sum_{i<j} |a_i - a_j|) / (pi^2 R)``
    with ``C`` the measured distortion of ``A^{-1}``.
    """
    spec = S.ExpLinear(tuple(terms))
    if spec.dim != arr.n:
        raise SingularMatrix(f"curve dimension {spec.dim} does not match the arrangement (n={arr.n})")
    B = np.linalg.inv(arr.A)
    C = fs_distortion(B)
    a = [complex(t[0]) for t in spec.terms]
    coef = math.fsum(abs(x) for x in a) + math.fsum(abs(a[i] - a[j]) for i in range(len(a))
                                                    for j in range(i + 1, len(a)))
    K = C * C * coef / math.pi**2

    def dens(z):
        jet = evaluate_jet(spec, z)
        return fs_density(CurveJet(jet.lift @ B.T, jet.derivative @ B.T))

    schedule = schedule or RadiusSchedule.doubling()
    cfg = config or QuadConfig()
    samples, errors, bounds = [], [], []
    for R in schedule.radii:
        value, err = polar_disk_estimate(dens, R, cfg)
        area = math.pi * R * R
        samples.append((R, value / area))
        errors.append(err / area)
        bounds.append(K / R)
    ok = all(avg <= bd * (1 + 1e-9) + e for (_, avg), bd, e in zip(samples, bounds, errors))
    return HyperplaneReport(DensityProfile(tuple(samples), tuple(errors)), C, K, tuple(bounds), ok)
